#include "cglkit/connection_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cglkit/error.hpp"
#include "cglkit/simd/kernels.hpp"

namespace cglkit {

AffinityMatrix::AffinityMatrix(RowMatrix weights, double symmetry_tol) : w_(std::move(weights)) {
  if (w_.rows() != w_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "affinity matrix must be square");
  }
  const Eigen::Index n = w_.rows();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = w_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::InvalidArgument,
                    "affinity entries must be finite and nonnegative (row " + std::to_string(i) +
                        ", col " + std::to_string(j) + ")");
      }
      scale = std::max(scale, v);
    }
  }
  const double tol = symmetry_tol * std::max(scale, 1e-300);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(w_(i, j) - w_(j, i)) > tol) {
        throw Error(ErrorCode::NotSymmetric, "affinity matrix is not symmetric at (" +
                                                 std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

ConnectionBlocks::ConnectionBlocks(std::size_t n, std::size_t k, std::vector<double> blocks)
    : n_(n), k_(k), data_(std::move(blocks)) {
  if (k_ == 0 || data_.size() != n_ * n_ * k_ * k_) {
    throw Error(ErrorCode::DimensionMismatch, "connection storage does not match n*n*k*k");
  }
  constexpr double tol = 1e-10;
  const auto kk = static_cast<Eigen::Index>(k_);
  const RowMatrix eye = RowMatrix::Identity(kk, kk);
  for (std::size_t i = 0; i < n_; ++i) {
    if ((block_matrix(i, i) - eye).cwiseAbs().maxCoeff() > tol) {
      throw Error(ErrorCode::InvalidArgument,
                  "diagonal connection block " + std::to_string(i) + " is not the identity");
    }
    for (std::size_t j = i + 1; j < n_; ++j) {
      const auto gij = block_matrix(i, j);
      if ((gij.transpose() * gij - eye).cwiseAbs().maxCoeff() > tol) {
        throw Error(ErrorCode::InvalidArgument, "connection block (" + std::to_string(i) + "," +
                                                    std::to_string(j) + ") is not orthogonal");
      }
      if ((block_matrix(j, i) - gij.transpose()).cwiseAbs().maxCoeff() > tol) {
        throw Error(ErrorCode::InvalidArgument, "connection is not Hermitian at (" +
                                                    std::to_string(i) + "," + std::to_string(j) +
                                                    ")");
      }
    }
  }
}

ConnectionBlocks ConnectionBlocks::trivial(std::size_t n, std::size_t k) {
  std::vector<double> data(n * n * k * k, 0.0);
  for (std::size_t b = 0; b < n * n; ++b) {
    for (std::size_t r = 0; r < k; ++r) data[b * k * k + r * k + r] = 1.0;
  }
  return ConnectionBlocks(n, k, std::move(data));
}

ConnectionBlocks ConnectionBlocks::from_angles(const RowMatrix& angles) {
  if (angles.rows() != angles.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "angle matrix must be square");
  }
  const auto n = static_cast<std::size_t>(angles.rows());
  std::vector<double> data(n * n * 4, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double t = i == j ? 0.0 : angles(i, j);
      double* b = data.data() + (i * n + j) * 4;
      b[0] = std::cos(t);
      b[1] = -std::sin(t);
      b[2] = std::sin(t);
      b[3] = std::cos(t);
    }
  }
  return ConnectionBlocks(n, 2, std::move(data));
}

Complex ConnectionBlocks::phase(std::size_t i, std::size_t j) const {
  if (k_ != 2) throw Error(ErrorCode::DimensionMismatch, "phase() needs k = 2 blocks");
  const auto b = block(i, j);
  return {b[0], b[2]};
}

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::L: return "L";
    case OperatorKind::L0: return "L0";
    case OperatorKind::Lsym: return "Lsym";
    case OperatorKind::Lsym0: return "Lsym0";
  }
  return "L";
}

OperatorKind operator_kind_from_string(std::string_view s) {
  if (s == "L") return OperatorKind::L;
  if (s == "L0") return OperatorKind::L0;
  if (s == "Lsym") return OperatorKind::Lsym;
  if (s == "Lsym0") return OperatorKind::Lsym0;
  throw Error(ErrorCode::InvalidArgument, "unknown operator kind '" + std::string(s) + "'");
}

namespace {

double off_diagonal_sum(std::span<const double> row, std::size_t i) {
  return simd::sum(row.first(i)) + simd::sum(row.subspan(i + 1));
}

void check_shapes(const AffinityMatrix& w, const ConnectionBlocks& g) {
  if (w.n() != g.n()) {
    throw Error(ErrorCode::DimensionMismatch, "W has n=" + std::to_string(w.n()) +
                                                  " but G has n=" + std::to_string(g.n()));
  }
  if (w.n() == 0) throw Error(ErrorCode::DimensionMismatch, "empty graph");
}

// Writes c * G(i,j) into block (i,j) of `out`.
void put_block(RowMatrix& out, const ConnectionBlocks& g, std::size_t i, std::size_t j, double c) {
  const std::size_t k = g.k();
  const auto b = g.block(i, j);
  for (std::size_t r = 0; r < k; ++r) {
    double* dst = out.data() + (i * k + r) * out.cols() + j * k;
    for (std::size_t s = 0; s < k; ++s) dst[s] = c * b[r * k + s];
  }
}

}  // namespace

DegreeVector degree(const AffinityMatrix& w) {
  DegreeVector d;
  d.values.resize(w.n());
  for (std::size_t i = 0; i < w.n(); ++i) {
    d.values[i] = off_diagonal_sum(w.row(i), i);
    if (!(d.values[i] > kDegenerateDegree)) {
      throw Error(ErrorCode::DegenerateDegree,
                  "row " + std::to_string(i) + " has zero off-diagonal weight", i);
    }
  }
  return d;
}

OperatorMatrix assemble_cgl(const AffinityMatrix& w, const ConnectionBlocks& g, bool zero_diag,
                            std::span<const double> row_scale) {
  check_shapes(w, g);
  const std::size_t n = w.n();
  const std::size_t k = g.k();
  if (!row_scale.empty() && row_scale.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "row scale length differs from n");
  }
  for (double f : row_scale) {
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw Error(ErrorCode::InvalidArgument, "row scales must be finite and positive");
    }
  }

  OperatorMatrix out;
  out.n = n;
  out.k = k;
  out.kind = zero_diag ? OperatorKind::L0 : OperatorKind::L;
  out.entries = RowMatrix::Zero(static_cast<Eigen::Index>(n * k), static_cast<Eigen::Index>(n * k));

  if (row_scale.empty()) {
    out.degrees = degree(w);
  } else {
    out.degrees.values.resize(n);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = w.row(i);
      for (std::size_t j = 0; j < n; ++j) scaled[j] = row[j] / row_scale[i];
      out.degrees.values[i] = off_diagonal_sum(scaled, i);
      if (!(out.degrees.values[i] > kDegenerateDegree)) {
        throw Error(ErrorCode::DegenerateDegree,
                    "row " + std::to_string(i) + " has zero off-diagonal weight", i);
      }
    }
  }

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto row = w.row(i);
    const double f = row_scale.empty() ? 1.0 : row_scale[i];
    const double d = out.degrees.values[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j && zero_diag) continue;
      const double wij = row_scale.empty() ? row[j] : row[j] / f;
      if (wij == 0.0) continue;
      put_block(out.entries, g, i, j, wij / d);
    }
  }
  return out;
}

OperatorMatrix assemble_symmetric(const AffinityMatrix& w, const ConnectionBlocks& g,
                                  bool zero_diag) {
  check_shapes(w, g);
  const std::size_t n = w.n();
  const std::size_t k = g.k();
  OperatorMatrix out;
  out.n = n;
  out.k = k;
  out.kind = zero_diag ? OperatorKind::Lsym0 : OperatorKind::Lsym;
  out.degrees = degree(w);
  out.entries = RowMatrix::Zero(static_cast<Eigen::Index>(n * k), static_cast<Eigen::Index>(n * k));
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(out.degrees.values[i]);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto row = w.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j && zero_diag) continue;
      if (row[j] == 0.0) continue;
      // Evaluated in the same order for (i,j) and (j,i) so the result is
      // exactly symmetric whenever W is.
      const double c = row[j] * (inv_sqrt[std::min(i, j)] * inv_sqrt[std::max(i, j)]);
      put_block(out.entries, g, i, j, c);
    }
  }
  return out;
}

ComplexOperator assemble_complex(const AffinityMatrix& w, const ConnectionBlocks& g,
                                 bool zero_diag) {
  check_shapes(w, g);
  if (g.k() != 2) throw Error(ErrorCode::DimensionMismatch, "complex form needs k = 2");
  const std::size_t n = w.n();
  ComplexOperator out;
  out.n = n;
  out.zero_diag = zero_diag;
  out.degrees = degree(w);
  out.entries = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(out.degrees.values[i]);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j && zero_diag) continue;
      const double wij = w(i, j);
      if (wij == 0.0) continue;
      const double c = wij * (inv_sqrt[std::min(i, j)] * inv_sqrt[std::max(i, j)]);
      const auto b = g.block(i, j);
      out.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          Complex(c * b[0], c * b[2]);
    }
  }
  return out;
}

AffinityMatrix knn_mask(const AffinityMatrix& w, std::size_t kn) {
  const std::size_t n = w.n();
  if (kn < 1 || kn >= n) {
    throw Error(ErrorCode::InvalidK,
                "kNN count must satisfy 1 <= k < n (k=" + std::to_string(kn) + ", n=" +
                    std::to_string(n) + ")");
  }
  RowMatrix kept = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::vector<std::size_t> cols;
    cols.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cols.push_back(j);
    }
    const auto row = w.row(i);
    std::partial_sort(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(kn), cols.end(),
                      [&](std::size_t a, std::size_t b) {
                        return row[a] > row[b] || (row[a] == row[b] && a < b);
                      });
    for (std::size_t t = 0; t < kn; ++t) kept(ii, static_cast<Eigen::Index>(cols[t])) = row[cols[t]];
  }
  RowMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = i == j ? w.weights()(i, i) : std::max(kept(i, j), kept(j, i));
    }
  }
  return AffinityMatrix(std::move(out));
}

OperatorNorm operator_distance(const RowMatrix& a, const RowMatrix& b, double tol, int max_iter) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "operator_distance needs equal shapes");
  }
  const RowMatrix m = a - b;
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  OperatorNorm result;
  if (rows == 0 || cols == 0 || m.cwiseAbs().maxCoeff() == 0.0) {
    result.value = 0.0;
    return result;
  }

  // Fixed-seed start vector: generic, yet reproducible.
  std::mt19937_64 rng(0x6367'6c6b'6974ULL);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector x(static_cast<Eigen::Index>(cols));
  for (auto& v : x) v = unif(rng);
  x.normalize();
  Vector y(static_cast<Eigen::Index>(rows));
  Vector z(static_cast<Eigen::Index>(cols));

  double best = 0.0;
  result.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    simd::matvec(m.data(), rows, cols, x.data(), y.data());
    simd::matvec_transposed(m.data(), rows, cols, y.data(), z.data());
    const double rho = y.squaredNorm();  // x^T M^T M x with |x| = 1
    best = std::max(best, rho);
    result.iterations = it;
    const double residual = (z - rho * x).norm();
    if (residual <= tol * rho) {
      result.converged = true;
      break;
    }
    const double zn = z.norm();
    if (zn == 0.0) break;
    x = z / zn;
  }
  result.value = std::sqrt(best);
  return result;
}

OperatorNorm operator_distance(const OperatorMatrix& a, const OperatorMatrix& b, double tol,
                               int max_iter) {
  if (a.n != b.n || a.k != b.k) {
    throw Error(ErrorCode::DimensionMismatch, "operators differ in n or k");
  }
  return operator_distance(a.entries, b.entries, tol, max_iter);
}

}  // namespace cglkit

namespace cglkit {

std::string_view to_string(BandwidthStat stat) {
  return stat == BandwidthStat::Distance ? "distance" : "squared_distance";
}

BandwidthStat bandwidth_stat_from_string(std::string_view s) {
  if (s == "distance") return BandwidthStat::Distance;
  if (s == "squared_distance") return BandwidthStat::SquaredDistance;
  throw Error(ErrorCode::InvalidArgument, "unknown bandwidth statistic '" + std::string(s) + "'");
}

double linear_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile outside [0,1]");
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (hi == lo) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                                     values.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

RowMatrix pairwise_squared_distances(const RowMatrix& points) {
  const auto n = points.rows();
  const auto p = static_cast<std::size_t>(points.cols());
  RowMatrix d2 = RowMatrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* a = points.data() + i * points.cols();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d2(i, j) = simd::squared_distance({a, p}, {points.data() + j * points.cols(), p});
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) d2(i, j) = d2(j, i);
  }
  return d2;
}

double kernel_bandwidth(const RowMatrix& d2, double quantile, BandwidthStat stat,
                        bool positive_only) {
  if (d2.rows() != d2.cols() || d2.rows() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "bandwidth needs a square matrix with n >= 2");
  }
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "bandwidth quantile must lie in (0,1)");
  }
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(d2.rows() * (d2.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < d2.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d2.cols(); ++j) {
      const double v = d2(i, j);
      if (positive_only && !(v > 0.0)) continue;
      vals.push_back(stat == BandwidthStat::Distance ? std::sqrt(v) : v);
    }
  }
  if (vals.empty()) throw Error(ErrorCode::AllDistancesZero, "no positive pairwise distance");
  const double m = linear_quantile(std::move(vals), quantile);
  if (!(m > 0.0)) throw Error(ErrorCode::AllDistancesZero, "bandwidth quantile is zero");
  return m;
}

AffinityMatrix gaussian_affinity(const RowMatrix& d2, double bandwidth) {
  if (d2.rows() != d2.cols()) throw Error(ErrorCode::DimensionMismatch, "d2 must be square");
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  RowMatrix w(d2.rows(), d2.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      w(i, j) = i == j ? 1.0 : std::exp(-d2(i, j) / bandwidth);
    }
  }
  return AffinityMatrix(std::move(w), 0.0);
}

}  // namespace cglkit
