#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cglkit/types.hpp"

namespace cglkit {

/// Symmetric, nonnegative n x n weight matrix.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;
  /// Validates squareness, finiteness, nonnegativity and symmetry (within
  /// `symmetry_tol` relative to the largest entry). Throws Error.
  explicit AffinityMatrix(RowMatrix weights, double symmetry_tol = 1e-12);

  std::size_t n() const { return static_cast<std::size_t>(w_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return w_(i, j); }
  const RowMatrix& weights() const { return w_; }
  std::span<const double> row(std::size_t i) const { return {w_.data() + i * n(), n()}; }

 private:
  RowMatrix w_;
};

/// n x n array of k x k orthogonal blocks with G(j,i) = G(i,j)^T, G(i,i) = I.
class ConnectionBlocks {
 public:
  ConnectionBlocks() = default;
  /// `blocks` holds block (i,j) at offset (i*n + j)*k*k, each block row-major.
  ConnectionBlocks(std::size_t n, std::size_t k, std::vector<double> blocks);

  /// All blocks equal to the identity.
  static ConnectionBlocks trivial(std::size_t n, std::size_t k);
  /// k = 2 blocks from rotation angles: G(i,j) = R(angle(i,j)). `angles`
  /// must be antisymmetric; the diagonal is ignored.
  static ConnectionBlocks from_angles(const RowMatrix& angles);

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  /// Row-major k x k block (i,j).
  std::span<const double> block(std::size_t i, std::size_t j) const {
    return {data_.data() + (i * n_ + j) * k_ * k_, k_ * k_};
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  block_matrix(std::size_t i, std::size_t j) const {
    return {data_.data() + (i * n_ + j) * k_ * k_, static_cast<Eigen::Index>(k_),
            static_cast<Eigen::Index>(k_)};
  }
  /// Unit complex number of a k = 2 rotation block (G00 + i G10).
  Complex phase(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<double> data_;
};

/// d(i) = sum over j != i of w(i,j). Strictly positive for a valid graph.
struct DegreeVector {
  std::vector<double> values;
  std::size_t n() const { return values.size(); }
};

enum class OperatorKind { L, L0, Lsym, Lsym0 };

std::string_view to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(std::string_view s);

/// Dense nk x nk representation of L = D^-1 S, L0, or D^-1/2 S D^-1/2.
struct OperatorMatrix {
  std::size_t n = 0;
  std::size_t k = 1;
  RowMatrix entries;
  OperatorKind kind = OperatorKind::L;
  /// Degrees used in the normalisation (needed to map symmetric-form
  /// eigenvectors back to random-walk ones).
  DegreeVector degrees;

  bool is_symmetric_form() const { return kind == OperatorKind::Lsym || kind == OperatorKind::Lsym0; }
};

/// Complex-form CGL for k = 2 (unit-modulus connections), n x n Hermitian
/// when assembled symmetrically.
struct ComplexOperator {
  std::size_t n = 0;
  ComplexMatrix entries;
  bool zero_diag = false;
  DegreeVector degrees;
};

/// Rows whose off-diagonal sum falls below this are degenerate.
inline constexpr double kDegenerateDegree = 1e-300;

DegreeVector degree(const AffinityMatrix& w);

/// L(W,G) (zero_diag = false) or L0(W,G) (zero_diag = true). When
/// `row_scale` is non-empty the weights are read as w(i,j) / f(i) without
/// forming the scaled matrix; the result is the same operator up to rounding.
OperatorMatrix assemble_cgl(const AffinityMatrix& w, const ConnectionBlocks& g, bool zero_diag,
                            std::span<const double> row_scale = {});

/// D^-1/2 S D^-1/2, similar to L (or to L0 with zero_diag).
OperatorMatrix assemble_symmetric(const AffinityMatrix& w, const ConnectionBlocks& g,
                                  bool zero_diag = false);

/// Hermitian complex form D^-1/2 S D^-1/2 with S(i,j) = w(i,j) r(i,j), for
/// k = 2 connections.
ComplexOperator assemble_complex(const AffinityMatrix& w, const ConnectionBlocks& g,
                                 bool zero_diag);

/// Keeps each row's `kn` largest off-diagonal weights (ties go to the smaller
/// column), then symmetrises by union: W'(i,j) = max(kept(i,j), kept(j,i)).
AffinityMatrix knn_mask(const AffinityMatrix& w, std::size_t kn);

struct OperatorNorm {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

inline constexpr double kOperatorNormTol = 1e-9;
inline constexpr int kOperatorNormMaxIter = 10000;

/// Largest singular value of A - B by power iteration on (A-B)^T (A-B).
/// Stops when the eigen-residual of the iterate is below tol times the
/// estimate; returns the best estimate with converged = false otherwise.
OperatorNorm operator_distance(const RowMatrix& a, const RowMatrix& b,
                               double tol = kOperatorNormTol, int max_iter = kOperatorNormMaxIter);
OperatorNorm operator_distance(const OperatorMatrix& a, const OperatorMatrix& b,
                               double tol = kOperatorNormTol, int max_iter = kOperatorNormMaxIter);

// Gaussian kernel construction shared by the point-cloud and image pipelines.

/// Which statistic the bandwidth quantile is taken over.
enum class BandwidthStat { Distance, SquaredDistance };

std::string_view to_string(BandwidthStat stat);
BandwidthStat bandwidth_stat_from_string(std::string_view s);

/// Quantile with linear interpolation between order statistics
/// (h = (N-1) q). Throws InvalidArgument on empty input or q outside [0,1].
double linear_quantile(std::vector<double> values, double q);

/// Pairwise squared Euclidean distances between the rows of `points`.
/// Exactly symmetric with a zero diagonal.
RowMatrix pairwise_squared_distances(const RowMatrix& points);

/// Quantile of the i<j entries of a squared-distance matrix (or of their
/// square roots for BandwidthStat::Distance). With `positive_only`, zero
/// entries are skipped; throws AllDistancesZero if nothing is left.
double kernel_bandwidth(const RowMatrix& d2, double quantile, BandwidthStat stat,
                        bool positive_only);

/// w(i,j) = exp(-d2(i,j) / bandwidth) off the diagonal, w(i,i) = 1.
AffinityMatrix gaussian_affinity(const RowMatrix& d2, double bandwidth);

}  // namespace cglkit
