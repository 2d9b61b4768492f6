#include "cglkit/spectral_embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "cglkit/error.hpp"
#include "cglkit/matrix_io.hpp"

namespace cglkit {
namespace {

template <typename M>
void check_symmetric(const M& q) {
  if (q.rows() != q.cols()) throw Error(ErrorCode::DimensionMismatch, "operator must be square");
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < q.cols(); ++j) {
      if (std::abs(q(i, j) - std::conj(q(j, i))) > kSymmetryTol) {
        throw Error(ErrorCode::NotSymmetric, "operator is not symmetric at (" + std::to_string(i) +
                                                 "," + std::to_string(j) + ")");
      }
    }
  }
}

double signed_pow(double x, double t) {
  if (t == std::round(t)) return std::pow(x, t);
  return std::copysign(std::pow(std::abs(x), t), x);
}

ComplexVector phases(const ComplexVector& v1) {
  ComplexVector v(v1.size());
  for (Eigen::Index i = 0; i < v1.size(); ++i) {
    const double a = std::abs(v1(i));
    v(i) = a > kAlignmentZero ? v1(i) / a : Complex(1.0, 0.0);
  }
  return v;
}

std::size_t top_multiplicity(const Vector& evals) {
  const double top = evals(0);
  const double tol = kDegenerateEigTol * std::max(1.0, std::abs(top));
  std::size_t m = 1;
  while (m < static_cast<std::size_t>(evals.size()) && evals(static_cast<Eigen::Index>(m)) > top - tol) ++m;
  return m;
}

}  // namespace

SpectralDecomposition eig_sym(const RowMatrix& q) {
  check_symmetric(q);
  const Eigen::MatrixXd sym = q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "eigensolver failed");
  const auto n = sym.rows();
  SpectralDecomposition dec;
  dec.eigenvalues.resize(n);
  dec.eigenvectors.resize(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const Eigen::Index src = n - 1 - l;   // Eigen sorts ascending
    dec.eigenvalues(l) = es.eigenvalues()(src);
    auto col = es.eigenvectors().col(src);
    double sign = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-12) {
        sign = col(i) > 0 ? 1.0 : -1.0;
        break;
      }
    }
    dec.eigenvectors.col(l) = sign * col;
  }
  dec.n = static_cast<std::size_t>(n);
  return dec;
}

SpectralDecomposition eig_sym(const OperatorMatrix& q) {
  SpectralDecomposition dec = eig_sym(q.entries);
  dec.n = q.n;
  dec.k = q.k;
  dec.degrees = q.degrees;
  dec.source_kind = q.is_symmetric_form() ? SourceKind::Lsym : SourceKind::Other;
  return dec;
}

ComplexDecomposition eig_hermitian(const ComplexMatrix& q) {
  check_symmetric(q);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(q);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "eigensolver failed");
  const auto n = q.rows();
  ComplexDecomposition dec;
  dec.n = static_cast<std::size_t>(n);
  dec.eigenvalues = es.eigenvalues().reverse();
  dec.eigenvectors = es.eigenvectors().rowwise().reverse();
  return dec;
}

ComplexDecomposition eig_hermitian(const ComplexOperator& q) { return eig_hermitian(q.entries); }

DiffusionCoordinates diffusion_map(const SpectralDecomposition& dec, double t,
                                   const DimensionRule& rule) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "diffusion time must be positive");
  if (dec.k != 1) throw Error(ErrorCode::DimensionMismatch, "diffusion maps need a k = 1 operator");
  const std::size_t total = dec.size();
  std::size_t m = rule.m;
  if (rule.delta) {
    const double delta = *rule.delta;
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,1)");
    m = 0;
    while (m + 1 < total && dec.eigenvalues(static_cast<Eigen::Index>(m + 1)) > delta) ++m;
    m = std::max(m, std::min(rule.min_dim, total - 1));
  }
  if (m == 0) {
    throw Error(ErrorCode::EmptyEmbedding, "no non-trivial eigenvalue selected");
  }
  if (m + 1 > total) {
    throw Error(ErrorCode::InvalidArgument, "embedding dimension exceeds the number of eigenvectors");
  }

  const bool rescale = dec.source_kind == SourceKind::Lsym;
  if (rescale && dec.degrees.n() != dec.n) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric-form decomposition lacks degrees");
  }
  DiffusionCoordinates phi;
  phi.t = t;
  phi.m = m;
  phi.coords.resize(static_cast<Eigen::Index>(dec.n), static_cast<Eigen::Index>(m));
  for (std::size_t l = 0; l < m; ++l) {
    const double lam = dec.eigenvalues(static_cast<Eigen::Index>(l + 1));
    phi.eigenvalues.push_back(lam);
    const double w = signed_pow(lam, t);
    for (std::size_t i = 0; i < dec.n; ++i) {
      double u = dec.eigenvectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l + 1));
      if (rescale) u /= std::sqrt(dec.degrees.values[i]);
      phi.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = w * u;
    }
  }
  return phi;
}

double diffusion_distance(const DiffusionCoordinates& phi, std::size_t i, std::size_t j) {
  if (i >= phi.n() || j >= phi.n()) {
    throw Error(ErrorCode::IndexOutOfRange, "point index out of range", std::max(i, j));
  }
  return (phi.coords.row(static_cast<Eigen::Index>(i)) - phi.coords.row(static_cast<Eigen::Index>(j))).norm();
}

RowMatrix diffusion_distance_matrix(const DiffusionCoordinates& phi) {
  return pairwise_squared_distances(phi.coords);
}

VdmCoordinates vdm(const SpectralDecomposition& dec, double t, std::size_t r) {
  const std::size_t total = dec.size();
  if (r < 1 || r > total) {
    throw Error(ErrorCode::InvalidTruncation,
                "retained count must satisfy 1 <= r <= nk (r=" + std::to_string(r) + ")");
  }
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "diffusion time must be positive");
  if (dec.n * dec.k != total) throw Error(ErrorCode::DimensionMismatch, "decomposition is not n*k sized");
  VdmCoordinates out;
  out.t = t;
  out.n = dec.n;
  out.k = dec.k;
  out.r = r;
  std::vector<double> weight(r);
  for (std::size_t l = 0; l < r; ++l) {
    weight[l] = std::pow(std::abs(dec.eigenvalues(static_cast<Eigen::Index>(l))), t);
  }
  out.blocks.resize(dec.n);
  for (std::size_t i = 0; i < dec.n; ++i) {
    RowMatrix b(static_cast<Eigen::Index>(dec.k), static_cast<Eigen::Index>(r));
    for (std::size_t a = 0; a < dec.k; ++a) {
      for (std::size_t l = 0; l < r; ++l) {
        b(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(l)) =
            weight[l] * dec.eigenvectors(static_cast<Eigen::Index>(i * dec.k + a), static_cast<Eigen::Index>(l));
      }
    }
    out.blocks[i] = std::move(b);
  }
  return out;
}

double VdmCoordinates::inner(std::size_t i, std::size_t j) const {
  if (i >= n || j >= n) throw Error(ErrorCode::IndexOutOfRange, "point index out of range", std::max(i, j));
  return (blocks[i] * blocks[j].transpose()).squaredNorm();
}

double VdmCoordinates::distance_sq(std::size_t i, std::size_t j) const {
  return std::max(0.0, inner(i, i) + inner(j, j) - 2.0 * inner(i, j));
}

ComplexVector alignment_vector(const ComplexDecomposition& dec) {
  if (dec.n == 0) return {};
  const std::size_t mult = top_multiplicity(dec.eigenvalues);
  if (mult == 1) return phases(dec.eigenvectors.col(0));
  const auto basis = dec.eigenvectors.leftCols(static_cast<Eigen::Index>(mult));
  const ComplexVector ones = ComplexVector::Ones(static_cast<Eigen::Index>(dec.n));
  const ComplexVector proj = basis * (basis.adjoint() * ones);
  return phases(proj);
}

ComplexVector alignment_vector(const SpectralDecomposition& dec) {
  if (dec.k != 2) throw Error(ErrorCode::DimensionMismatch, "alignment needs k = 2 blocks");
  if (dec.n == 0) return {};
  const std::size_t mult = top_multiplicity(dec.eigenvalues);
  Vector v1;
  if (mult == 1) {
    v1 = dec.eigenvectors.col(0);
  } else {
    // The all-ones complex vector is (1, 0) on every node.
    const auto basis = dec.eigenvectors.leftCols(static_cast<Eigen::Index>(mult));
    Vector ones = Vector::Zero(static_cast<Eigen::Index>(2 * dec.n));
    for (std::size_t i = 0; i < dec.n; ++i) ones(static_cast<Eigen::Index>(2 * i)) = 1.0;
    v1 = basis * (basis.transpose() * ones);
  }
  ComplexVector c(static_cast<Eigen::Index>(dec.n));
  for (std::size_t i = 0; i < dec.n; ++i) {
    c(static_cast<Eigen::Index>(i)) = Complex(v1(static_cast<Eigen::Index>(2 * i)), v1(static_cast<Eigen::Index>(2 * i + 1)));
  }
  return phases(c);
}

std::vector<double> alignment_error(const ComplexVector& u, const ComplexVector& v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "u and v differ in length");
  std::vector<double> z(static_cast<std::size_t>(u.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double a = std::arg(std::conj(u(i)) * v(i));
    if (a <= -std::numbers::pi) a = std::numbers::pi;
    z[static_cast<std::size_t>(i)] = a;
  }
  return z;
}

void write_embedding_csv(std::ostream& out, const DiffusionCoordinates& phi) {
  out << "index";
  for (std::size_t l = 1; l <= phi.m; ++l) out << ",coord_" << l;
  out << '\n';
  for (Eigen::Index i = 0; i < phi.coords.rows(); ++i) {
    out << i;
    for (Eigen::Index l = 0; l < phi.coords.cols(); ++l) out << ',' << format_double(phi.coords(i, l));
    out << '\n';
  }
}

void write_embedding_csv(const std::string& path, const DiffusionCoordinates& phi) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_embedding_csv(f, phi);
}

void write_alignment_csv(std::ostream& out, std::span<const double> z,
                         std::span<const std::size_t> class_id) {
  if (!class_id.empty() && class_id.size() != z.size()) {
    throw Error(ErrorCode::DimensionMismatch, "class labels and angles differ in length");
  }
  out << "index,class_id,z_radians\n";
  for (std::size_t i = 0; i < z.size(); ++i) {
    out << i << ',' << (class_id.empty() ? 0 : class_id[i]) << ',' << format_double(z[i]) << '\n';
  }
}

void write_alignment_csv(const std::string& path, std::span<const double> z,
                         std::span<const std::size_t> class_id) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_alignment_csv(f, z, class_id);
}

}  // namespace cglkit
