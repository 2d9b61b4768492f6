#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "cglkit/types.hpp"

namespace cglkit {

enum class NoiseShape { Isotropic, Elliptical };

/// Discrete law of the per-vector scale lambda in the elliptical model.
struct LambdaLaw {
  std::vector<double> values;
  std::vector<double> probs;

  /// {0.5, sqrt(1.75)} with equal probability; E[lambda^2] = 1.
  static LambdaLaw two_point();
  double second_moment() const;
};

struct NoiseSpec {
  double alpha = 0.25;
  double c = 0.4;
  NoiseShape shape = NoiseShape::Isotropic;
  LambdaLaw lambda_law = LambdaLaw::two_point();
  std::uint64_t seed = 0;

  /// Per-coordinate variance c / p^alpha.
  double variance(std::size_t p) const;
  /// Throws InvalidSpec when alpha is outside [0,1], c <= 0, or the lambda
  /// law is malformed or lacks unit second moment.
  void validate() const;
};

void to_json(nlohmann::json& j, const NoiseSpec& spec);
void from_json(const nlohmann::json& j, NoiseSpec& spec);

struct NoiseSample {
  RowMatrix vectors;            // count x p
  std::vector<double> lambda;   // per-vector scale (all 1 for isotropic)
};

/// Vector i is drawn from its own substream of (seed, i), so the output is
/// the same whatever the thread count.
NoiseSample sample_noise(const NoiseSpec& spec, std::size_t p, std::size_t count);

/// 20 log10( sqrt(mean |X_i|^2) / sqrt(mean |Z_i|^2) ) with X the noisy rows
/// and Z = noisy - clean. Throws ZeroNoise when Z vanishes.
double snrdb(const RowMatrix& clean, const RowMatrix& noisy);

/// 2 c p^(1-alpha): trace of Sigma_i + Sigma_j for isotropic noise.
double trace_correction(const NoiseSpec& spec, std::size_t p);

struct PairOffset {
  std::size_t i = 0;
  std::size_t j = 0;
  double offset = 0.0;   // d2_noisy - d2_clean (squared RID)
  bool same_shift = false;
};

/// Squared-RID offsets for all pairs i < j between clean and noisy image
/// rows, plus whether the optimal shift survived the noise.
std::vector<PairOffset> rid_offsets(const RowMatrix& clean, const RowMatrix& noisy);

}  // namespace cglkit
