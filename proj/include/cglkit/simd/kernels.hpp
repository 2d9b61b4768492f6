#pragma once

// Data-parallel inner loops shared by the numerical modules.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at first use from the CPU
// feature bits; CGLKIT_SIMD=scalar in the environment forces the reference
// path. Within one backend results are bitwise reproducible; across backends
// they agree to rounding (reduction order differs).

#include <cstddef>
#include <span>
#include <string_view>

namespace cglkit::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_supports(Backend backend);
Backend active_backend();
std::string_view backend_name(Backend backend);

/// Overrides the dispatch choice (tests use this to pin a backend). Throws
/// cglkit::Error(InvalidArgument) if the CPU cannot run it.
void set_backend(Backend backend);

const KernelTable& table();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return table().dot(a.data(), b.data(), a.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return table().squared_distance(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  table().axpy(alpha, x.data(), y.data(), x.size());
}
inline void scale(double alpha, std::span<double> x) { table().scale(alpha, x.data(), x.size()); }
inline double sum(std::span<const double> x) { return table().sum(x.data(), x.size()); }

/// sum_j a[j] * b[(j - s) mod p], the inner product of a with b cyclically
/// shifted by s. Split into two contiguous dot products.
double shifted_dot(std::span<const double> a, std::span<const double> b, std::size_t s);

/// sum_j (a[j] - b[(j - s) mod p])^2.
double shifted_squared_distance(std::span<const double> a, std::span<const double> b,
                                std::size_t s);

/// y = A x for a dense row-major rows x cols matrix.
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

/// y = A^T x for a dense row-major rows x cols matrix (y has cols entries).
void matvec_transposed(const double* a, std::size_t rows, std::size_t cols, const double* x,
                       double* y);

}  // namespace cglkit::simd
