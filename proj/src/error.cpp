#include "distnn/error.hpp"

namespace distnn {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::EmptyCollection: return "EmptyCollection";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoNeighbors: return "NoNeighbors";
    case ErrorCode::NoObservedCells: return "NoObservedCells";
    case ErrorCode::AllTrialsFailed: return "AllTrialsFailed";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ExperimentAborted: return "ExperimentAborted";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BadTarget: return "BadTarget";
  }
  return "Unknown";
}

}  // namespace distnn
