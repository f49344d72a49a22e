#include "sparsestab/error.hpp"

namespace sparsestab {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonRectangular: return "NonRectangular";
    case Errc::NonFinite: return "NonFinite";
    case Errc::ColumnNotUnitNorm: return "ColumnNotUnitNorm";
    case Errc::ZeroColumn: return "ZeroColumn";
    case Errc::NotPowerOfTwo: return "NotPowerOfTwo";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoFailure: return "IoFailure";
    case Errc::ParseFailure: return "ParseFailure";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::NoSolutionWithinBudget: return "NoSolutionWithinBudget";
    case Errc::SupportTooLarge: return "SupportTooLarge";
    case Errc::NotConverged: return "NotConverged";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::EmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

int exit_code(Errc code) noexcept {
  switch (code) {
    // validation
    case Errc::InvalidArgument: return 10;
    case Errc::NonRectangular: return 11;
    case Errc::NonFinite: return 12;
    case Errc::ColumnNotUnitNorm: return 13;
    case Errc::ZeroColumn: return 14;
    case Errc::NotPowerOfTwo: return 15;
    case Errc::DimensionMismatch: return 16;
    case Errc::ConfigInvalid: return 17;
    case Errc::EmptyInput: return 18;
    // I/O
    case Errc::IoFailure: return 20;
    case Errc::ParseFailure: return 21;
    // budget
    case Errc::BudgetExceeded: return 30;
    case Errc::NoSolutionWithinBudget: return 31;
    case Errc::SupportTooLarge: return 32;
    // convergence / applicability
    case Errc::NotConverged: return 40;
    case Errc::PreconditionViolated: return 41;
  }
  return 99;
}

}  // namespace sparsestab
