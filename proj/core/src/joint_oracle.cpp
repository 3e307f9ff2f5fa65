#include "ermab/joint_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "ermab/errors.hpp"

namespace ermab {

namespace {

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

double joint_work_estimate(const GroupedInstance& instance, int budget) {
  const int n = static_cast<int>(instance.n_arms());
  std::size_t max_states = 0;
  for (const auto& arm : instance.arms) max_states = std::max(max_states, arm.n_states());
  double subsets = 0.0;
  for (int k = 0; k <= std::min(budget, n); ++k) subsets += binomial(n, k);
  return std::pow(static_cast<double>(max_states), n) * instance.horizon * subsets;
}

double exact_joint_value(const GroupedInstance& instance, int budget, double work_bound) {
  validate_instance(instance);
  const std::size_t n = instance.n_arms();
  if (budget < 0) throw Error(ErrorKind::InvalidArgument, "budget must be non-negative");
  if (n > 20) throw Error(ErrorKind::InstanceTooLarge, "more than 20 arms");
  const double work = joint_work_estimate(instance, budget);
  if (work > work_bound)
    throw Error(ErrorKind::InstanceTooLarge, "work estimate " + std::to_string(work));

  // Mixed-radix joint state: arm 0 is the most significant digit.
  std::vector<std::size_t> radix(n), stride(n);
  std::size_t joint = 1;
  for (std::size_t i = n; i-- > 0;) {
    radix[i] = instance.arms[i].n_states();
    stride[i] = joint;
    joint *= radix[i];
  }

  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = 0; m < (1u << n); ++m)
    if (std::popcount(m) <= budget) masks.push_back(m);

  std::vector<std::size_t> digits(n);
  std::vector<double> next(joint, 0.0), cur(joint, 0.0);
  std::vector<double> buf_a(joint), buf_b(joint);

  for (int t = instance.horizon - 1; t >= 0; --t) {
    for (std::size_t x = 0; x < joint; ++x) {
      double reward = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        digits[i] = (x / stride[i]) % radix[i];
        reward += instance.arms[i].reward(digits[i]);
      }
      double best = -1e300;
      for (std::uint32_t mask : masks) {
        // Contract the next-value tensor one arm at a time, last arm first.
        std::copy(next.begin(), next.end(), buf_a.begin());
        std::size_t size = joint;
        for (std::size_t i = n; i-- > 0;) {
          const int a = (mask >> i) & 1u;
          const auto row = instance.arms[i].row(digits[i], a);
          const std::size_t outer = size / radix[i];
          for (std::size_t o = 0; o < outer; ++o) {
            double acc = 0.0;
            for (std::size_t j = 0; j < radix[i]; ++j) acc += row[j] * buf_a[o * radix[i] + j];
            buf_b[o] = acc;
          }
          size = outer;
          std::swap(buf_a, buf_b);
        }
        best = std::max(best, reward + buf_a[0]);
      }
      cur[x] = best;
    }
    next.swap(cur);
  }

  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) start += instance.start_states[i] * stride[i];
  return next[start];
}

}  // namespace ermab
