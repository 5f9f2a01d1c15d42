#include "flowrec/error.hpp"

namespace flowrec {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::BrokenPath: return "BrokenPath";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::UnknownIndex: return "UnknownIndex";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::CyclingDetected: return "CyclingDetected";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotSpd: return "NotSpd";
    case ErrorCode::NonSmoothLoss: return "NonSmoothLoss";
    case ErrorCode::NoAffectedPaths: return "NoAffectedPaths";
    case ErrorCode::EdgeExists: return "EdgeExists";
    case ErrorCode::UnknownComponent: return "UnknownComponent";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::InfeasibleTopology: return "InfeasibleTopology";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DanglingEdge:
    case ErrorCode::BrokenPath:
    case ErrorCode::DuplicateId:
    case ErrorCode::SelfLoop:
    case ErrorCode::UnknownIndex:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonFinite:
    case ErrorCode::EmptySeries:
    case ErrorCode::BadParameter:
    case ErrorCode::NonSmoothLoss:
    case ErrorCode::NoAffectedPaths:
    case ErrorCode::EdgeExists:
    case ErrorCode::UnknownComponent:
    case ErrorCode::UnknownEdge:
    case ErrorCode::IoFailure:
    case ErrorCode::ParseError:
      return true;
    default:
      return false;
  }
}

}  // namespace flowrec
