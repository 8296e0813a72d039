#include "updown/error.hpp"

namespace updown {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnbalancedBrackets: return "UnbalancedBrackets";
    case ErrorCode::EmptyTree: return "EmptyTree";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MalformedNumber: return "MalformedNumber";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::SpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorCode::MalformedInstance: return "MalformedInstance";
    case ErrorCode::UpwardNotComputed: return "UpwardNotComputed";
    case ErrorCode::EmptyArgument: return "EmptyArgument";
    case ErrorCode::ModeParamMissing: return "ModeParamMissing";
    case ErrorCode::DegenerateCorpus: return "DegenerateCorpus";
    case ErrorCode::StateMissing: return "StateMissing";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ModeFeatureMapMissing: return "ModeFeatureMapMissing";
    case ErrorCode::OneClassEmpty: return "OneClassEmpty";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& what,
                     std::optional<std::size_t> position) {
  std::string msg = to_string(code);
  msg += ": ";
  msg += what;
  if (position) msg += " (at " + std::to_string(*position) + ")";
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& what,
             std::optional<std::size_t> position)
    : std::runtime_error(decorate(code, what, position)),
      code_(code),
      position_(position) {}

}  // namespace updown
