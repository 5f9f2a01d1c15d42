#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowrec {

enum class ErrorCode {
  // network / data validation
  DanglingEdge,
  BrokenPath,
  DuplicateId,
  SelfLoop,
  UnknownIndex,
  DimensionMismatch,
  NonFinite,
  EmptySeries,
  BadParameter,
  // numerics
  NotPositiveDefinite,
  NoConvergence,
  Infeasible,
  Unbounded,
  CyclingDetected,
  SolveFailure,
  RankDeficient,
  NotSpd,
  NonSmoothLoss,
  // dynamic updates
  NoAffectedPaths,
  EdgeExists,
  UnknownComponent,
  Disconnected,
  UnknownEdge,
  // benchmark / io
  InfeasibleTopology,
  IoFailure,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for codes that describe bad input rather than a numerical failure.
bool is_validation_error(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` carries the failure kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace flowrec
