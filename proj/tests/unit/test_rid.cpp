#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "cglkit/error.hpp"
#include "cglkit/parallel.hpp"
#include "cglkit/rid.hpp"

using namespace cglkit;

namespace {

CircularImage random_image(std::size_t p, std::mt19937_64& rng) {
  return CircularImage(oracle::random_vector(p, rng));
}

std::vector<double> as_vec(const CircularImage& img) {
  return {img.samples().begin(), img.samples().end()};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("image validation") {
  CHECK(code_of([] { CircularImage({1.0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { CircularImage({1.0, NAN}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { CircularImage({1.0, 2.0, 3.0}, 2); }) == ErrorCode::InvalidArgument);
  const CircularImage two_rings({1, 2, 3, 4, 5, 6}, 2);
  CHECK(two_rings.p() == 3);
  CHECK(two_rings.ring(1)[0] == 4.0);
}

TEST_CASE("rotate") {
  std::mt19937_64 rng(1);
  const auto a = random_image(8, rng);
  CHECK(rotate(a, 0) == a);
  for (std::size_t s = 0; s < 8; ++s) {
    CHECK(rotate(rotate(a, s), (8 - s) % 8) == a);
    CHECK(as_vec(rotate(a, s)) == oracle::rotate(as_vec(a), s));
    CHECK(rotate(a, s).squared_norm() == doctest::Approx(a.squared_norm()).epsilon(1e-15));
  }
  std::vector<double> delta(8, 0.0);
  delta[0] = 1.0;
  const auto r = rotate(CircularImage(delta), 3);
  CHECK(r.samples()[3] == 1.0);
  CHECK(r.squared_norm() == 1.0);
  // Rings share the shift.
  const CircularImage rings({1, 2, 3, 4, 5, 6}, 2);
  CHECK(as_vec(rotate(rings, 1)) == std::vector<double>{3, 1, 2, 6, 4, 5});
}

TEST_CASE("rid simple cases") {
  std::mt19937_64 rng(2);
  const auto a = random_image(32, rng);
  const auto self = rid(a, a, true);
  CHECK(self.distance_sq == 0.0);
  CHECK(self.optimal_shift.s == 0);
  REQUIRE(self.profile.has_value());
  CHECK(self.profile->size() == 32);
  const auto b = rotate(a, 5);
  const auto r = rid(a, b);
  CHECK(r.distance_sq == 0.0);
  CHECK(r.optimal_shift.s == 27);
  CHECK(rotate(b, r.optimal_shift.s) == a);
  CHECK(r.optimal_shift.angle() == doctest::Approx(2 * std::numbers::pi * 27 / 32));
  CHECK(code_of([&] { rid(a, random_image(16, rng)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("fast rid equals the exhaustive scan") {
  std::mt19937_64 rng(3);
  for (std::size_t p : {2u, 3u, 16u, 32u, 63u, 64u, 256u, 1000u}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = oracle::random_vector(p, rng);
      const auto b = oracle::random_vector(p, rng);
      const auto [d2, s] = oracle::rid(a, b);
      const auto r = rid(CircularImage(a), CircularImage(b), true);
      CHECK(std::abs(r.distance_sq - d2) <= 1e-9 * std::max(1.0, d2));
      CHECK(r.optimal_shift.s == s);
      CHECK(r.distance_sq == *std::min_element(r.profile->begin(), r.profile->end()));
      const auto direct = rid_direct(CircularImage(a), CircularImage(b));
      CHECK(direct.optimal_shift.s == s);
    }
  }
}

TEST_CASE("ties resolve to the smallest shift") {
  // Period-4 signal on p = 16: four equally good shifts.
  std::vector<double> a(16), b(16);
  for (std::size_t j = 0; j < 16; ++j) {
    a[j] = std::cos(2 * std::numbers::pi * j / 4.0) + 0.3 * std::sin(2 * std::numbers::pi * j / 4.0);
  }
  for (std::size_t j = 0; j < 16; ++j) b[j] = a[(j + 1) % 16];
  const auto r = rid(CircularImage(a), CircularImage(b));
  CHECK(r.optimal_shift.s == oracle::rid(a, b).second);
  CHECK(r.optimal_shift.s == 1);
  CHECK(r.distance_sq <= 1e-24);
  // Constant images: every shift is optimal.
  const auto c = rid(CircularImage(std::vector<double>(10, 2.0)), CircularImage(std::vector<double>(10, 1.0)));
  CHECK(c.optimal_shift.s == 0);
  CHECK(c.distance_sq == doctest::Approx(10.0));
}

TEST_CASE("rid symmetry and rotation invariance") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> shift(0, 127);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = random_image(128, rng);
    const auto b = random_image(128, rng);
    const auto ab = rid(a, b);
    const auto ba = rid(b, a);
    CHECK(ab.distance_sq == ba.distance_sq);
    CHECK(ab.optimal_shift.s == (128 - ba.optimal_shift.s) % 128);
    const std::size_t t = shift(rng);
    const auto rt = rid(rotate(a, t), rotate(b, t));
    CHECK(std::abs(rt.distance_sq - ab.distance_sq) <= 1e-12 * ab.distance_sq);
    CHECK(rt.optimal_shift.s == ab.optimal_shift.s);
  }
}

TEST_CASE("multi-ring rid uses one shared shift") {
  std::mt19937_64 rng(5);
  auto a = oracle::random_vector(48, rng);
  const CircularImage img(a, 3);
  const auto rotated = rotate(img, 7);
  const auto r = rid(img, rotated);
  CHECK(r.distance_sq == 0.0);
  CHECK(r.optimal_shift.s == 9);
  CHECK(r.optimal_shift.p == 16);
  const CircularImage other(oracle::random_vector(48, rng), 3);
  double best = INFINITY;
  std::size_t best_s = 0;
  for (std::size_t s = 0; s < 16; ++s) {
    const auto rs = rotate(other, s);
    double d = 0.0;
    for (std::size_t j = 0; j < 48; ++j) d += (img.samples()[j] - rs.samples()[j]) * (img.samples()[j] - rs.samples()[j]);
    if (d < best) {
      best = d;
      best_s = s;
    }
  }
  const auto ro = rid(img, other);
  CHECK(ro.distance_sq == doctest::Approx(best).epsilon(1e-12));
  CHECK(ro.optimal_shift.s == best_s);
}

TEST_CASE("rotation_permutation forms the cyclic group") {
  const std::size_t p = 16;
  CHECK(rotation_permutation(0, p) == RowMatrix::Identity(p, p));
  std::mt19937_64 rng(6);
  const auto x = oracle::random_vector(p, rng);
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), p);
  for (std::size_t s = 0; s < p; ++s) {
    const RowMatrix m = rotation_permutation(s, p);
    CHECK(m.transpose() * m == RowMatrix::Identity(p, p));
    const Eigen::VectorXd y = m * xv;
    CHECK(std::vector<double>(y.data(), y.data() + p) == oracle::rotate(x, s));
    for (std::size_t t = 0; t < p; ++t) {
      CHECK(m * rotation_permutation(t, p) == rotation_permutation((s + t) % p, p));
    }
  }
  CHECK(code_of([] { rotation_permutation(16, 16); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("build_connection_graph matches a brute-force construction") {
  std::mt19937_64 rng(7);
  const std::size_t n = 10, p = 64;
  std::vector<CircularImage> imgs;
  std::vector<std::vector<double>> raw;
  for (std::size_t i = 0; i < n; ++i) {
    raw.push_back(oracle::random_vector(p, rng));
    imgs.emplace_back(raw.back());
  }
  RowMatrix d2 = RowMatrix::Zero(n, n);
  std::vector<std::size_t> sh(n * n, 0);
  std::vector<double> pos, pos_root;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto [d, s] = oracle::rid(raw[i], raw[j]);
      d2(i, j) = d;
      sh[i * n + j] = s;
      if (i < j) {
        pos.push_back(d);
        pos_root.push_back(std::sqrt(d));
      }
    }
  }
  for (auto stat : {BandwidthStat::SquaredDistance, BandwidthStat::Distance}) {
    const auto g = build_connection_graph(imgs, 0.25, stat);
    const double m = oracle::quantile(stat == BandwidthStat::Distance ? pos_root : pos, 0.25);
    CHECK(g.bandwidth == doctest::Approx(m).epsilon(1e-12));
    CHECK(g.stat == stat);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(g.w.weights()(i, i) == 1.0);
      const auto gi = g.g.block_matrix(i, i);
      CHECK(gi(0, 0) == 1.0);
      CHECK(gi(1, 0) == 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK(g.w.weights()(i, j) == doctest::Approx(std::exp(-d2(i, j) / m)).epsilon(1e-10));
        CHECK(g.shift_at(i, j) == sh[i * n + j]);
        const double th = 2 * std::numbers::pi * sh[i * n + j] / p;
        const auto b = g.g.block_matrix(i, j);
        CHECK(std::abs(b(0, 0) - std::cos(th)) <= 1e-14);
        CHECK(std::abs(b(1, 0) - std::sin(th)) <= 1e-14);
        CHECK(std::abs(b(0, 1) + std::sin(th)) <= 1e-14);
        CHECK(g.g.block_matrix(j, i) == b.transpose());
      }
    }
  }
}

TEST_CASE("rotated pair gets unit affinity and the matching rotation block") {
  std::mt19937_64 rng(8);
  const auto a = random_image(40, rng);
  const std::vector<CircularImage> imgs{a, rotate(a, 6), random_image(40, rng)};
  const auto g = build_connection_graph(imgs, 0.25);
  CHECK(g.w.weights()(0, 1) == 1.0);
  // G(1,0) rotates image 0 onto image 1.
  CHECK(g.shift_at(1, 0) == 6);
  const double th = 2 * std::numbers::pi * 6 / 40;
  CHECK(std::abs(g.g.phase(1, 0) - std::polar(1.0, th)) <= 1e-14);
  CHECK(code_of([&] { build_connection_graph({a, a}, 0.25); }) == ErrorCode::AllDistancesZero);
  CHECK(code_of([&] { build_connection_graph({a, rotate(a, 3)}, 0.25); }) == ErrorCode::AllDistancesZero);
}

TEST_CASE("connections are synchronisable on rotations of one template") {
  std::mt19937_64 rng(9);
  const std::size_t p = 50, n = 12;
  const auto tmpl = random_image(p, rng);
  std::uniform_int_distribution<std::size_t> shift(0, p - 1);
  std::vector<CircularImage> imgs{tmpl};
  for (std::size_t i = 1; i < n; ++i) imgs.push_back(rotate(tmpl, shift(rng)));
  imgs.push_back(random_image(p, rng));   // keeps one positive distance
  const auto g = build_connection_graph(imgs, 0.25);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        CHECK((g.shift_at(i, j) + g.shift_at(j, k)) % p == g.shift_at(i, k));
        const RowMatrix prod = g.g.block_matrix(i, j) * g.g.block_matrix(j, k);
        CHECK((prod - g.g.block_matrix(i, k)).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
}

TEST_CASE("pairwise table is independent of the thread count") {
  std::mt19937_64 rng(10);
  std::vector<CircularImage> imgs;
  for (int i = 0; i < 30; ++i) imgs.push_back(random_image(100, rng));
  const int saved = thread_count();
  set_thread_count(1);
  const auto a = pairwise_rid(imgs);
  set_thread_count(4);
  const auto b = pairwise_rid(imgs);
  set_thread_count(saved);
  CHECK(a.distance_sq == b.distance_sq);
  CHECK(a.shift == b.shift);
  CHECK(a.distance_sq == a.distance_sq.transpose());
}

TEST_CASE("image CSV round trip") {
  std::mt19937_64 rng(11);
  CircularImageSet set;
  for (int i = 0; i < 4; ++i) {
    set.images.push_back(random_image(6, rng));
    set.class_id.push_back(i % 2);
    set.true_shift.push_back(i);
  }
  std::stringstream ss;
  write_images_csv(ss, set);
  const auto back = read_images_csv(ss);
  CHECK(back.images == set.images);
  CHECK(back.class_id == set.class_id);
  CHECK(back.true_shift == set.true_shift);

  CircularImageSet bare;
  bare.images = set.images;
  std::stringstream s2;
  write_images_csv(s2, bare);
  const auto b2 = read_images_csv(s2);
  CHECK(b2.images == bare.images);
  CHECK(b2.class_id.empty());
  CHECK(image_set_from_rows(set.as_matrix(), set).images == set.images);

  std::stringstream bad("# x0,x1\n1,2\n3\n");
  CHECK(code_of([&] { read_images_csv(bad); }) == ErrorCode::Io);
}
