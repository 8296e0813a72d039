#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace updown {

enum class ErrorCode {
  UnbalancedBrackets,
  EmptyTree,
  EmptyList,
  DimensionMismatch,
  MalformedNumber,
  EmptyFile,
  TooFewRows,
  SpanOutOfBounds,
  MalformedInstance,
  UpwardNotComputed,
  EmptyArgument,
  ModeParamMissing,
  DegenerateCorpus,
  StateMissing,
  NonFiniteGradient,
  ShapeMismatch,
  EmptyDataset,
  ModeFeatureMapMissing,
  OneClassEmpty,
  LabelMismatch,
  MalformedModel,
  Io,
};

const char* to_string(ErrorCode code);

// Single exception type for the library. `position` is a byte offset for
// parse errors and a 1-based line number for file errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> position = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

}  // namespace updown
