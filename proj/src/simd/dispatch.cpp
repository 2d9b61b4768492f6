#include <atomic>
#include <cstdlib>
#include <string>

#include "cglkit/error.hpp"
#include "cglkit/simd/kernels.hpp"

namespace cglkit::simd {
namespace {

Backend detect() {
  if (const char* env = std::getenv("CGLKIT_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Backend::Scalar;
  }
  return cpu_supports(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{detect() == Backend::Avx2 ? avx2_table()
                                                                       : &scalar_table()};
  return ptr;
}

}  // namespace

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table() { return *current().load(std::memory_order_relaxed); }

Backend active_backend() {
  return current().load(std::memory_order_relaxed) == &scalar_table() ? Backend::Scalar
                                                                       : Backend::Avx2;
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

void set_backend(Backend backend) {
  if (!cpu_supports(backend)) {
    throw Error(ErrorCode::InvalidArgument,
                "SIMD backend " + std::string(backend_name(backend)) + " unavailable on this CPU");
  }
  current().store(backend == Backend::Avx2 ? avx2_table() : &scalar_table());
}

double shifted_dot(std::span<const double> a, std::span<const double> b, std::size_t s) {
  const std::size_t p = a.size();
  s %= p;
  // j in [s, p) pairs with b[j - s]; j in [0, s) pairs with b[j + p - s].
  const auto& t = table();
  return t.dot(a.data() + s, b.data(), p - s) + t.dot(a.data(), b.data() + (p - s), s);
}

double shifted_squared_distance(std::span<const double> a, std::span<const double> b,
                                std::size_t s) {
  const std::size_t p = a.size();
  s %= p;
  const auto& t = table();
  return t.squared_distance(a.data() + s, b.data(), p - s) +
         t.squared_distance(a.data(), b.data() + (p - s), s);
}

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  const auto& t = table();
  for (std::size_t i = 0; i < rows; ++i) y[i] = t.dot(a + i * cols, x, cols);
}

void matvec_transposed(const double* a, std::size_t rows, std::size_t cols, const double* x,
                       double* y) {
  const auto& t = table();
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (x[i] != 0.0) t.axpy(x[i], a + i * cols, y, cols);
  }
}

}  // namespace cglkit::simd
