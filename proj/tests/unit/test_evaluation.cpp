#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "cglkit/error.hpp"
#include "cglkit/evaluation.hpp"
#include "cglkit/experiments.hpp"
#include "cglkit/parallel.hpp"

using namespace cglkit;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

RowMatrix random_metric(std::size_t n, std::mt19937_64& rng) {
  RowMatrix pts(n, 3);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = g(rng);
  return pairwise_squared_distances(pts);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CurveConfig small_curve(double c, std::uint64_t seed) {
  CurveConfig cfg;
  cfg.n = 200;
  cfg.p = 200;
  cfg.c = c;
  cfg.knn = 20;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("rank CDF against the sorting oracle") {
  std::mt19937_64 rng(1);
  for (std::size_t n : {5u, 30u, 80u}) {
    const RowMatrix a = random_metric(n, rng);
    const RowMatrix b = random_metric(n, rng);
    for (std::size_t k : {1u, 3u}) {
      const auto cdf = nn_rank_cdf(a, b, k);
      CHECK(cdf.ranks == oracle::nn_ranks(a, b, k));
      CHECK(cdf.max_rank == n - 1);
      CHECK(cdf.cdf(n - 1) == 1.0);
      double prev = 0.0;
      for (const auto& [r, v] : cdf.table()) {
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("rank CDF examples") {
  std::mt19937_64 rng(2);
  const std::size_t n = 40, k = 5;
  const RowMatrix a = random_metric(n, rng);
  const auto same = nn_rank_cdf(a, a, k);
  CHECK(same.cdf(k) == 1.0);
  CHECK(same.ranks.back() <= k);
  const auto rev = nn_rank_cdf(a, (-a).eval(), k);
  CHECK(rev.ranks.front() >= n - 1 - k + 1);
  CHECK(rev.cdf(n - 1 - k) == 0.0);
  // Strictly monotone maps of either metric leave ranks unchanged.
  const RowMatrix b = random_metric(n, rng);
  const auto base = nn_rank_cdf(a, b, k);
  CHECK(nn_rank_cdf(a.array().sqrt().matrix(), b, k).ranks == base.ranks);
  CHECK(nn_rank_cdf(a, (3.0 * b.array().exp() + 1.0).matrix(), k).ranks == base.ranks);
  CHECK(code_of([&] { nn_rank_cdf(a, RowMatrix::Zero(n - 1, n - 1), k); }) == ErrorCode::MetricMismatch);
  CHECK(code_of([&] { nn_rank_cdf(a, b, n); }) == ErrorCode::InvalidK);
  CHECK(code_of([&] { nn_rank_cdf(a, b, 0); }) == ErrorCode::InvalidK);
}

TEST_CASE("rank CDF ties resolve by index") {
  RowMatrix flat = RowMatrix::Ones(4, 4);
  flat.diagonal().setZero();
  const auto cdf = nn_rank_cdf(flat, flat, 1);
  // Nearest of 0 is 1, of 1 is 0, of 2 is 0, of 3 is 0: clean ranks 1, 1, 1, 1.
  CHECK(cdf.ranks == std::vector<std::size_t>{1, 1, 1, 1});
}

TEST_CASE("alignment summary") {
  const std::vector<double> z(10, 0.7);
  const std::vector<std::size_t> cls = {0, 0, 1, 1, 1, 2, 2, 2, 2, 2};
  const auto s = alignment_summary(z, cls);
  CHECK(s.per_class_spread.size() == 3);
  for (double v : s.per_class_spread) CHECK(v == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(s.global_consistency == 1.0);
  // Circular statistics against a direct computation, across the branch cut.
  const std::vector<double> w = {3.0, -3.0, 3.1, -3.1, 0.1, -0.1, 0.5, 0.0};
  const std::vector<std::size_t> c2 = {0, 0, 0, 0, 1, 1, 1, 1};
  const auto t = alignment_summary(w, c2);
  for (std::size_t c = 0; c < 2; ++c) {
    Complex m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) m += std::polar(1.0, w[4 * c + i]) / 4.0;
    CHECK(t.per_class_spread[c] == doctest::Approx(std::sqrt(-2 * std::log(std::abs(m)))));
    CHECK(std::abs(std::remainder(t.per_class_mean[c] - std::arg(m), 2 * std::numbers::pi)) <= 1e-12);
  }
  CHECK(t.per_class_mean[0] == doctest::Approx(std::numbers::pi).epsilon(0.02));
  // Class 0 mean is pi, all within 0.15; class 1 mean ~0.125 leaves -0.1 and 0.5 outside.
  CHECK(t.global_consistency == doctest::Approx(6.0 / 8.0));
  // Global rotation of the angles leaves spreads unchanged.
  std::vector<double> rot = w;
  for (auto& x : rot) x = std::remainder(x + 1.3, 2 * std::numbers::pi);
  const auto r = alignment_summary(rot, c2);
  for (std::size_t c = 0; c < 2; ++c) CHECK(r.per_class_spread[c] == doctest::Approx(t.per_class_spread[c]).epsilon(1e-12));
  CHECK(r.global_consistency == t.global_consistency);
  const std::vector<std::size_t> gap = {0, 0, 2};
  CHECK(code_of([&] { alignment_summary(std::vector<double>(3, 0.0), gap); }) == ErrorCode::EmptyClass);
}

TEST_CASE("eigen decay fits") {
  const std::vector<double> flat(30, 0.5);
  const auto f = eigen_decay_report(flat, 1.0);
  CHECK(f.slope == doctest::Approx(0.0));
  CHECK(f.r_squared == 1.0);
  std::vector<double> model;
  for (int l = 1; l <= 30; ++l) model.push_back(std::exp(-0.3 * l * l) * (l % 2 ? 1 : -1));
  const auto m = eigen_decay_report(model, 1.0);
  CHECK(m.slope == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(m.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.count == 19);
  std::vector<double> d2;
  for (int l = 1; l <= 30; ++l) d2.push_back(std::exp(-0.5 * l));
  CHECK(eigen_decay_report(d2, 2.0).slope == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("clean curve run: methods agree") {
  const auto res = run_curve_experiment(small_curve(1e-9, 3));
  REQUIRE(res.methods.size() == 4);
  double lo = 1.0, hi = 0.0;
  for (const auto& m : res.methods) {
    const double v = m.cdf.cdf(2 * res.config.nn);
    CHECK(v >= 0.98);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (m.method != "euclidean") {
      REQUIRE(m.embedding.has_value());
      CHECK(m.embedding->n() == 200);
    }
  }
  CHECK(hi - lo <= 0.02);
  CHECK(res.method("zerodiag_cgl").method == "zerodiag_cgl");
  CHECK_THROWS(res.method("nope"));
}

TEST_CASE("curve bundles are byte-for-byte reproducible") {
  const auto dir_a = fs::temp_directory_path() / "cglkit_eval_a";
  const auto dir_b = fs::temp_directory_path() / "cglkit_eval_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  const auto cfg = small_curve(0.4, 4);
  const int saved = thread_count();
  set_thread_count(1);
  write_curve_bundle(dir_a.string(), run_curve_experiment(cfg));
  set_thread_count(4);
  write_curve_bundle(dir_b.string(), run_curve_experiment(cfg));
  set_thread_count(saved);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_a)) {
    ++files;
    CHECK(slurp(e.path()) == slurp(dir_b / e.path().filename()));
  }
  CHECK(files == 1 + 4 + 3);
  CHECK(fs::exists(dir_a / "rankcdf_euclidean.csv"));
  CHECK(fs::exists(dir_a / "embedding_zerodiag_cgl.csv"));
  std::ifstream cdf(dir_a / "rankcdf_knn_cgl.csv");
  std::string header;
  std::getline(cdf, header);
  CHECK(header == "rank,cdf");
  const auto summary = nlohmann::json::parse(slurp(dir_a / "summary.json"));
  CHECK(summary.contains("snrdb"));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("clean image run aligns every class exactly") {
  ImageConfig cfg;
  cfg.nk = 3;
  cfg.nr = 30;
  cfg.p = 128;
  cfg.knn = 20;
  cfg.c_sigma_mult = 0.0;
  cfg.seed = 5;
  const auto res = run_image_experiment(cfg);
  CHECK_FALSE(res.snrdb.has_value());
  CHECK(res.shift_recovery == 1.0);
  for (const auto& m : res.methods) {
    CHECK(m.z.size() == 90);
    for (double s : m.summary.per_class_spread) CHECK(s < 1e-6);
    CHECK(m.summary.global_consistency == 1.0);
  }
}

TEST_CASE("single-class image run") {
  ImageConfig cfg;
  cfg.nk = 1;
  cfg.nr = 40;
  cfg.p = 64;
  cfg.knn = 10;
  cfg.c_sigma_mult = 2.0;
  cfg.seed = 6;
  const auto res = run_image_experiment(cfg);
  REQUIRE(res.snrdb.has_value());
  for (const auto& m : res.methods) {
    REQUIRE(m.summary.per_class_spread.size() == 1);
    Complex mean = 0.0;
    for (double z : m.z) mean += std::polar(1.0, z) / static_cast<double>(m.z.size());
    CHECK(m.summary.per_class_spread[0] == doctest::Approx(std::sqrt(-2 * std::log(std::abs(mean)))));
  }
  const auto again = run_image_experiment(cfg);
  for (std::size_t i = 0; i < res.methods.size(); ++i) CHECK(again.methods[i].z == res.methods[i].z);
}

TEST_CASE("image bundle layout") {
  ImageConfig cfg;
  cfg.nk = 2;
  cfg.nr = 10;
  cfg.p = 64;
  cfg.knn = 5;
  cfg.seed = 7;
  const auto dir = fs::temp_directory_path() / "cglkit_eval_img";
  fs::remove_all(dir);
  write_image_bundle(dir.string(), run_image_experiment(cfg));
  for (const auto& m : kImageMethods) {
    std::ifstream f(dir / ("alignment_" + m + ".csv"));
    std::string header;
    std::getline(f, header);
    CHECK(header == "index,class_id,z_radians");
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.contains("methods"));
  fs::remove_all(dir);
}

TEST_CASE("config JSON round trips") {
  CurveConfig c = small_curve(0.3, 77);
  c.bandwidth_stat = BandwidthStat::Distance;
  const nlohmann::json j = c;
  const auto back = j.get<CurveConfig>();
  CHECK(back.n == c.n);
  CHECK(back.c == c.c);
  CHECK(back.seed == 77);
  CHECK(back.bandwidth_stat == BandwidthStat::Distance);
  ImageConfig ic;
  ic.c_sigma_mult = 3.5;
  ic.seed = 9;
  const auto ib = nlohmann::json(ic).get<ImageConfig>();
  CHECK(ib.c_sigma_mult == 3.5);
  CHECK(ib.seed == 9);
}

TEST_CASE("spectral robustness on a small instance") {
  RobustnessConfig cfg;
  cfg.n = 120;
  cfg.p = 120;
  cfg.seed = 3;
  const auto r = spectral_robustness(cfg);
  CHECK(r.dist_zero.value > 0.0);
  CHECK(r.eig_clean.size() == cfg.top);
  CHECK(r.eig_diff_zero >= 0.0);
  const nlohmann::json j = r;
  CHECK(j.contains("dist_zero"));
}
