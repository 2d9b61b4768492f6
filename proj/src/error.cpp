#include "cglkit/error.hpp"

namespace cglkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateDegree: return "DegenerateDegree";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::AllDistancesZero: return "AllDistancesZero";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ZeroNoise: return "ZeroNoise";
    case ErrorCode::UnsupportedShape: return "UnsupportedShape";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::EmptyEmbedding: return "EmptyEmbedding";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidTruncation: return "InvalidTruncation";
    case ErrorCode::InvalidDims: return "InvalidDims";
    case ErrorCode::SeparationFailure: return "SeparationFailure";
    case ErrorCode::GammaNotDominating: return "GammaNotDominating";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateDegree:
    case ErrorCode::NonConvergence:
    case ErrorCode::AllDistancesZero:
    case ErrorCode::ZeroNoise:
    case ErrorCode::NotSymmetric:
    case ErrorCode::EmptyEmbedding:
    case ErrorCode::SeparationFailure:
    case ErrorCode::GammaNotDominating:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), index_(index) {}

}  // namespace cglkit
