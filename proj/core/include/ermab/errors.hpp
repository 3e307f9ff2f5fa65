#pragma once

#include <stdexcept>
#include <string>

namespace ermab {

/// Failure categories reported by the solver library. Callers that need to
/// branch on the cause inspect `kind()`; everything else can treat the
/// exception as a std::runtime_error.
enum class ErrorKind {
  RowNotStochastic,
  RewardOutOfRange,
  InvalidArgument,
  InstanceTooLarge,
  BudgetExceedsGroup,
  BudgetExceedsArms,
  NonPositiveValue,
  MissingAllocation,
  DomainLacksClinicalFlag,
  NegativeInput,
  EmptyInput,
  ParseError,
  BadProbability,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ermab
