#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace distnn {

enum class ErrorCode {
  EmptyInput,
  NonFiniteSample,
  OutOfDomain,
  SizeMismatch,
  EmptyCollection,
  IndexOutOfRange,
  InvalidArgument,
  NoNeighbors,
  NoObservedCells,
  AllTrialsFailed,
  DegenerateDensity,
  TooLarge,
  ExperimentAborted,
  ParseError,
  BadTarget,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure surfaced by distnn carries a code so
/// callers (and the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace distnn
