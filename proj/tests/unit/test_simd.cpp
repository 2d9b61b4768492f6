#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "cglkit/error.hpp"
#include "cglkit/simd/kernels.hpp"

using namespace cglkit;

namespace {

std::vector<double> randv(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(acc);
}

// Restores the dispatch choice after a test pins a backend.
struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar kernels match long-double references") {
  std::mt19937_64 rng(11);
  const auto& t = simd::scalar_table();
  for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 17u, 100u, 1001u}) {
    const auto a = randv(n, rng), b = randv(n, rng);
    const double ref = naive_dot(a, b);
    CHECK(t.dot(a.data(), b.data(), n) == doctest::Approx(ref).epsilon(1e-12));
    long double sq = 0, s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sq += static_cast<long double>(a[i] - b[i]) * (a[i] - b[i]);
      s += a[i];
    }
    CHECK(t.squared_distance(a.data(), b.data(), n) == doctest::Approx(static_cast<double>(sq)).epsilon(1e-12));
    CHECK(t.sum(a.data(), n) == doctest::Approx(static_cast<double>(s)).epsilon(1e-12));
  }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const simd::KernelTable* avx = simd::avx2_table();
  if (avx == nullptr || !simd::cpu_supports(simd::Backend::Avx2)) {
    MESSAGE("AVX2 backend unavailable; equivalence not exercised");
    return;
  }
  const auto& ref = simd::scalar_table();
  std::mt19937_64 rng(12);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 31u, 33u, 257u, 4099u}) {
    const auto a = randv(n, rng), b = randv(n, rng);
    double scale = 1e-300;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]) + a[i] * a[i] + b[i] * b[i];
    CHECK(std::abs(avx->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-14 * scale);
    CHECK(std::abs(avx->squared_distance(a.data(), b.data(), n) -
                   ref.squared_distance(a.data(), b.data(), n)) <= 1e-14 * scale);
    CHECK(std::abs(avx->sum(a.data(), n) - ref.sum(a.data(), n)) <= 1e-14 * scale);

    auto y1 = b, y2 = b;
    ref.axpy(0.75, a.data(), y1.data(), n);
    avx->axpy(0.75, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-15));
    auto z1 = a, z2 = a;
    ref.scale(-1.5, z1.data(), n);
    avx->scale(-1.5, z2.data(), n);
    CHECK(z1 == z2);
  }
}

TEST_CASE("AVX2 kernels handle unaligned offsets") {
  const simd::KernelTable* avx = simd::avx2_table();
  if (avx == nullptr || !simd::cpu_supports(simd::Backend::Avx2)) return;
  std::mt19937_64 rng(13);
  const auto a = randv(200, rng), b = randv(200, rng);
  for (std::size_t off = 0; off < 5; ++off) {
    const std::size_t n = 150 + off;
    CHECK(avx->dot(a.data() + off, b.data() + 1, n) ==
          doctest::Approx(simd::scalar_table().dot(a.data() + off, b.data() + 1, n)).epsilon(1e-13));
  }
}

TEST_CASE("shifted kernels equal an explicit rotation") {
  std::mt19937_64 rng(14);
  for (std::size_t p : {2u, 5u, 16u, 37u}) {
    const auto a = randv(p, rng), b = randv(p, rng);
    for (std::size_t s = 0; s < p; ++s) {
      double dot = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double bj = b[(j + p - s) % p];
        dot += a[j] * bj;
        sq += (a[j] - bj) * (a[j] - bj);
      }
      CHECK(simd::shifted_dot(a, b, s) == doctest::Approx(dot).epsilon(1e-13));
      CHECK(simd::shifted_squared_distance(a, b, s) == doctest::Approx(sq).epsilon(1e-13));
    }
  }
}

TEST_CASE("matvec and transposed matvec on both backends") {
  BackendGuard guard;
  std::mt19937_64 rng(15);
  const std::size_t rows = 13, cols = 21;
  const auto m = randv(rows * cols, rng);
  const auto x = randv(cols, rng);
  const auto xt = randv(rows, rng);
  std::vector<simd::Backend> backends{simd::Backend::Scalar};
  if (simd::cpu_supports(simd::Backend::Avx2)) backends.push_back(simd::Backend::Avx2);
  for (auto be : backends) {
    simd::set_backend(be);
    CHECK(simd::active_backend() == be);
    std::vector<double> y(rows), yt(cols);
    simd::matvec(m.data(), rows, cols, x.data(), y.data());
    simd::matvec_transposed(m.data(), rows, cols, xt.data(), yt.data());
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols; ++j) acc += m[i * cols + j] * x[j];
      CHECK(y[i] == doctest::Approx(acc).epsilon(1e-13));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rows; ++i) acc += m[i * cols + j] * xt[i];
      CHECK(yt[j] == doctest::Approx(acc).epsilon(1e-13));
    }
  }
}

TEST_CASE("backend names and forced selection") {
  BackendGuard guard;
  CHECK(simd::backend_name(simd::Backend::Scalar) == "scalar");
  CHECK(simd::backend_name(simd::Backend::Avx2) == "avx2");
  simd::set_backend(simd::Backend::Scalar);
  CHECK(&simd::table() == &simd::scalar_table());
  if (!simd::cpu_supports(simd::Backend::Avx2)) {
    CHECK_THROWS_AS(simd::set_backend(simd::Backend::Avx2), Error);
  }
}
