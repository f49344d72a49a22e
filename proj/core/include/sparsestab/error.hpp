#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparsestab {

// Every failure the library reports carries one of these codes. The CLI maps
// each code to a distinct process exit status (see exit_code()).
enum class Errc {
  InvalidArgument,
  NonRectangular,
  NonFinite,
  ColumnNotUnitNorm,
  ZeroColumn,
  NotPowerOfTwo,
  DimensionMismatch,
  ConfigInvalid,
  IoFailure,
  ParseFailure,
  BudgetExceeded,
  NoSolutionWithinBudget,
  SupportTooLarge,
  NotConverged,
  PreconditionViolated,
  EmptyInput,
};

std::string_view to_string(Errc code) noexcept;

/// Process exit status associated with an error code. 0 is reserved for
/// success and 1 for "violations found" in experiment runs.
int exit_code(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sparsestab
