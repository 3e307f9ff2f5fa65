#include "ermab/value_iteration.hpp"

#include <cmath>
#include <string>

#include "ermab/errors.hpp"

namespace ermab {

ChargedValueTable::ChargedValueTable(std::size_t n_states, int start_time, int horizon,
                                     double charge)
    : n_states_(n_states),
      start_time_(start_time),
      horizon_(horizon),
      charge_(charge),
      values_(static_cast<std::size_t>(horizon - start_time + 1) * n_states, 0.0),
      actions_(values_.size(), 0),
      spend_(n_states, 0.0) {}

namespace {

double expect(std::span<const double> row, const double* next) {
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * next[j];
  return acc;
}

// One Bellman backup from `next` into `out`; records chosen actions if asked.
void backup(const ArmModel& arm, double charge, const double* next, double* out, int* act) {
  const std::size_t n = arm.n_states();
  for (std::size_t s = 0; s < n; ++s) {
    const double r = arm.reward(s);
    const double q0 = r + expect(arm.row(s, 0), next);
    const double q1 = r - charge + expect(arm.row(s, 1), next);
    const bool take = q1 > q0 + kTieTolerance;
    out[s] = take ? q1 : q0;
    if (act) act[s] = take ? 1 : 0;
  }
}

}  // namespace

ChargedValueTable charged_value_iteration(const ArmModel& arm, int start_time, int horizon,
                                          double charge) {
  if (start_time < 0 || start_time >= horizon)
    throw Error(ErrorKind::InvalidArgument, "need 0 <= start_time < horizon, got t=" +
                                                std::to_string(start_time) +
                                                " H=" + std::to_string(horizon));
  if (!std::isfinite(charge)) throw Error(ErrorKind::InvalidArgument, "charge must be finite");

  const std::size_t n = arm.n_states();
  ChargedValueTable table(n, start_time, horizon, charge);
  for (int k = horizon - 1; k >= start_time; --k) {
    const double* next = table.values_.data() + table.row(k + 1);
    backup(arm, charge, next, table.values_.data() + table.row(k),
           table.actions_.data() + table.row(k));
  }

  // Expected action count, by the same backward recursion on the fixed policy.
  std::vector<double> spend_next(n, 0.0), spend_cur(n, 0.0);
  for (int k = horizon - 1; k >= start_time; --k) {
    for (std::size_t s = 0; s < n; ++s) {
      const int a = table.action(k, s);
      spend_cur[s] = a + expect(arm.row(s, a), spend_next.data());
    }
    spend_next.swap(spend_cur);
  }
  table.spend_ = spend_next;
  return table;
}

std::vector<double> charged_values(const ArmModel& arm, int remaining, double charge) {
  const std::size_t n = arm.n_states();
  std::vector<double> next(n, 0.0), cur(n, 0.0);
  for (int k = 0; k < remaining; ++k) {
    backup(arm, charge, next.data(), cur.data(), nullptr);
    next.swap(cur);
  }
  return next;
}

std::vector<double> passive_values(const ArmModel& arm, int remaining) {
  const std::size_t n = arm.n_states();
  std::vector<double> next(n, 0.0), cur(n, 0.0);
  for (int k = 0; k < remaining; ++k) {
    for (std::size_t s = 0; s < n; ++s) cur[s] = arm.reward(s) + expect(arm.row(s, 0), next.data());
    next.swap(cur);
  }
  return next;
}

double action_advantage(const ArmModel& arm, std::size_t s, int remaining, double charge) {
  const std::vector<double> next = charged_values(arm, remaining - 1, charge);
  const double q0 = expect(arm.row(s, 0), next.data());
  const double q1 = -charge + expect(arm.row(s, 1), next.data());
  return q1 - q0;
}

}  // namespace ermab
