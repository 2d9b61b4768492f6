#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cglkit/connection_graph.hpp"
#include "cglkit/types.hpp"

namespace cglkit {

enum class SourceKind { Lsym, Other };

/// Eigenpairs of a real symmetric operator, eigenvalues descending. Column l
/// of `eigenvectors` is the l-th eigenvector; its first coordinate with
/// magnitude above 1e-12 is positive.
struct SpectralDecomposition {
  Vector eigenvalues;
  RowMatrix eigenvectors;
  SourceKind source_kind = SourceKind::Other;
  std::size_t n = 0;
  std::size_t k = 1;
  /// Degrees of the source graph (needed for u = D^-1/2 v when the source is
  /// the symmetric form).
  DegreeVector degrees;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// Eigenpairs of a Hermitian complex operator, eigenvalues descending.
struct ComplexDecomposition {
  Vector eigenvalues;
  ComplexMatrix eigenvectors;
  std::size_t n = 0;
};

inline constexpr double kSymmetryTol = 1e-10;

/// Throws NotSymmetric if |Q - Q^T| exceeds 1e-10 anywhere.
SpectralDecomposition eig_sym(const OperatorMatrix& q);
SpectralDecomposition eig_sym(const RowMatrix& q);
ComplexDecomposition eig_hermitian(const ComplexOperator& q);
ComplexDecomposition eig_hermitian(const ComplexMatrix& q);

/// Fixed dimension, or the threshold rule lambda_(m+1) > delta >= lambda_(m+2)
/// (eigenvalue 1 is lambda_1), optionally with a lower bound on m.
struct DimensionRule {
  std::size_t m = 0;
  std::optional<double> delta;
  std::size_t min_dim = 0;

  static DimensionRule fixed(std::size_t m) { return {m, std::nullopt, 0}; }
  static DimensionRule threshold(double delta, std::size_t min_dim = 0) {
    return {0, delta, min_dim};
  }
};

struct DiffusionCoordinates {
  double t = 1.0;
  std::size_t m = 0;
  RowMatrix coords;          // n x m
  std::vector<double> eigenvalues;   // lambda_2 .. lambda_(m+1)
  std::size_t n() const { return static_cast<std::size_t>(coords.rows()); }
};

/// coords(i, l-2) = lambda_l^t u_l(i), l = 2..m+1, u_l = D^-1/2 v_l when the
/// decomposition came from the symmetric form. For non-integer t a negative
/// eigenvalue contributes sign(lambda) |lambda|^t.
DiffusionCoordinates diffusion_map(const SpectralDecomposition& dec, double t,
                                   const DimensionRule& rule);

double diffusion_distance(const DiffusionCoordinates& phi, std::size_t i, std::size_t j);
/// All pairwise squared diffusion distances.
RowMatrix diffusion_distance_matrix(const DiffusionCoordinates& phi);

/// Per-point k x r blocks B_i whose column l is |mu_l|^t v_l[i]; then
/// <V(i), V(j)> = |B_i B_j^T|_F^2, which for r = nk equals
/// |L_s^(2t)(i,j)|_HS^2.
struct VdmCoordinates {
  double t = 1.0;
  std::size_t n = 0;
  std::size_t k = 1;
  std::size_t r = 0;
  std::vector<RowMatrix> blocks;

  double inner(std::size_t i, std::size_t j) const;
  double distance_sq(std::size_t i, std::size_t j) const;
};

/// Throws InvalidTruncation unless 1 <= r <= nk, InvalidArgument for t <= 0.
VdmCoordinates vdm(const SpectralDecomposition& dec, double t, std::size_t r);

/// Per-node phase from the top eigenvector: v(i) = v1(i)/|v1(i)|, or 1 when
/// |v1(i)| <= 1e-14. If the top eigenvalue is repeated, v1 is the projection
/// of the all-ones vector onto its eigenspace, which does not depend on the
/// basis the eigensolver picked.
ComplexVector alignment_vector(const ComplexDecomposition& dec);
/// Same from the real 2x2-block form: node i's pair (x, y) is read as x + iy.
ComplexVector alignment_vector(const SpectralDecomposition& dec);

/// z(i) = arg(conj(u(i)) v(i)) in (-pi, pi].
std::vector<double> alignment_error(const ComplexVector& u, const ComplexVector& v);

inline constexpr double kAlignmentZero = 1e-14;
inline constexpr double kDegenerateEigTol = 1e-9;

/// `index,coord_1..coord_m`
void write_embedding_csv(std::ostream& out, const DiffusionCoordinates& phi);
void write_embedding_csv(const std::string& path, const DiffusionCoordinates& phi);
/// `index,class_id,z_radians`
void write_alignment_csv(std::ostream& out, std::span<const double> z,
                         std::span<const std::size_t> class_id);
void write_alignment_csv(const std::string& path, std::span<const double> z,
                         std::span<const std::size_t> class_id);

}  // namespace cglkit
