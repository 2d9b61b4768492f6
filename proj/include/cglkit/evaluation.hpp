#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cglkit/spectral_embeddings.hpp"
#include "cglkit/types.hpp"

namespace cglkit {

/// Ranks (under the clean metric) of every estimated neighbour.
struct RankCdf {
  std::vector<std::size_t> ranks;   // sorted ascending
  std::size_t max_rank = 0;         // n - 1

  /// Fraction of ranks <= r.
  double cdf(std::size_t r) const;
  /// (rank, cdf) for rank = 1..max_rank.
  std::vector<std::pair<std::size_t, double>> table() const;
};

/// For each i, the k_nn nearest j != i under `noisy` (ties by index); each
/// is ranked among all j != i under `clean` (rank 1 = closest, ties by
/// index). Both inputs are n x n dissimilarity matrices; only their order
/// matters. Throws MetricMismatch if the shapes differ, InvalidK unless
/// 1 <= k_nn < n.
RankCdf nn_rank_cdf(const RowMatrix& noisy, const RowMatrix& clean, std::size_t k_nn);

struct AlignmentSummary {
  std::vector<double> per_class_spread;   // circular standard deviation
  std::vector<double> per_class_mean;     // circular mean
  double global_consistency = 0.0;        // fraction within 0.2 rad of class mean
};

inline constexpr double kConsistencyRadius = 0.2;

/// Classes are 0..max(class_id); throws EmptyClass if one has no entries.
AlignmentSummary alignment_summary(std::span<const double> z, std::span<const std::size_t> class_id);

struct EigenDecayReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t count = 0;
};

/// Least squares of log|nu_l| on l^(2/d) for l = 2..min(20, N), where nu_l
/// are the eigenvalues sorted by decreasing magnitude.
EigenDecayReport eigen_decay_report(const SpectralDecomposition& dec, double d);
EigenDecayReport eigen_decay_report(std::span<const double> eigenvalues, double d);

}  // namespace cglkit
