#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cglkit {

enum class ErrorCode {
  DegenerateDegree,
  DimensionMismatch,
  InvalidK,
  NonConvergence,
  AllDistancesZero,
  InvalidSpec,
  ZeroNoise,
  UnsupportedShape,
  NotSymmetric,
  EmptyEmbedding,
  IndexOutOfRange,
  InvalidTruncation,
  InvalidDims,
  SeparationFailure,
  GammaNotDominating,
  MetricMismatch,
  EmptyClass,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// True for failures that come from the numbers (as opposed to bad input or
/// configuration). The CLI maps these to exit status 3.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  /// Offending row/node for DegenerateDegree and IndexOutOfRange.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace cglkit
