#ifndef LOTDECOMP_ERROR_HPP
#define LOTDECOMP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace lotdecomp {

enum class ErrorKind {
  NonPositiveWeight,
  WeightSumMismatch,
  NonFiniteEntry,
  DimensionMismatch,
  MarginalMismatch,
  NegativeEntry,
  SolverFailure,
  InstanceTooLarge,
  NonUniformWeights,
  MissingEdges,
  DegenerateDenominator,
  DegenerateTraces,
  ParseError,
  OutOfGrid,
  NotSymmetric,
  NotPositiveDefinite,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::WeightSumMismatch: return "WeightSumMismatch";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MarginalMismatch: return "MarginalMismatch";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::NonUniformWeights: return "NonUniformWeights";
    case ErrorKind::MissingEdges: return "MissingEdges";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::DegenerateTraces: return "DegenerateTraces";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::OutOfGrid: return "OutOfGrid";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every failure in the library is reported through this type; `kind()` is
// what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lotdecomp

#endif  // LOTDECOMP_ERROR_HPP
