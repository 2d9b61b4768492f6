#include "cglkit/datasets.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "cglkit/error.hpp"
#include "cglkit/matrix_io.hpp"
#include "cglkit/rng.hpp"

namespace cglkit {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform_angle(std::mt19937_64& rng) {
  double t = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
  return t >= kTwoPi ? 0.0 : t;
}

template <typename F>
EmbeddedPointCloud sample_curve(std::size_t n, std::size_t p, std::uint64_t seed, F point) {
  EmbeddedPointCloud cloud;
  cloud.points = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  cloud.params.resize(n);
  auto rng = substream(seed, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = uniform_angle(rng);
    cloud.params[i] = t;
    const auto x = point(t);
    for (std::size_t d = 0; d < x.size(); ++d) {
      cloud.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = x[d];
    }
  }
  return cloud;
}

}  // namespace

std::vector<double> bell_curve_point(double t, std::size_t p) {
  if (p < 3) throw Error(ErrorCode::InvalidDims, "bell curve needs p >= 3");
  std::vector<double> x(p, 0.0);
  const double c = std::cos(t);
  const double a = 1.0 - 0.8 * std::exp(-8.0 * c * c);
  const double phase = std::numbers::pi * (c + 1.0) / 4.0;
  x[0] = c;
  x[1] = a * std::cos(phase);
  x[2] = a * std::sin(phase);
  return x;
}

EmbeddedPointCloud bell_curve(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (p < 3) throw Error(ErrorCode::InvalidDims, "bell curve needs p >= 3");
  return sample_curve(n, p, seed, [p](double t) { return bell_curve_point(t, p); });
}

std::vector<double> trefoil_point(double t) {
  return {std::sin(t) + 2.0 * std::sin(2.0 * t), std::cos(t) - 2.0 * std::cos(2.0 * t),
          -std::sin(3.0 * t)};
}

EmbeddedPointCloud trefoil(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw Error(ErrorCode::InvalidDims, "trefoil needs n >= 3");
  return sample_curve(n, 3, seed, trefoil_point);
}

EmbeddedPointCloud circle(std::size_t n, std::uint64_t seed) {
  return sample_curve(n, 2, seed, [](double t) { return std::vector<double>{std::cos(t), std::sin(t)}; });
}

SurrogateImageSet surrogate_images(std::size_t n_k, std::size_t n_r, std::size_t p,
                                   std::uint64_t seed) {
  if (n_k < 1 || n_r < 1) throw Error(ErrorCode::InvalidDims, "need n_K >= 1 and n_R >= 1");
  if (p < 8) throw Error(ErrorCode::InvalidDims, "surrogate images need p >= 8");

  SurrogateImageSet set;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt == kMaxTemplateRetries) {
      throw Error(ErrorCode::SeparationFailure,
                  "templates not separated after " + std::to_string(kMaxTemplateRetries) + " draws");
    }
    auto rng = substream(derive_seed(seed, 1), attempt);
    std::normal_distribution<double> normal(0.0, 1.0);
    set.templates.clear();
    for (std::size_t c = 0; c < n_k; ++c) {
      std::vector<double> a(kTemplateBand), b(kTemplateBand);
      for (std::size_t q = 0; q < kTemplateBand; ++q) {
        a[q] = normal(rng);
        b[q] = normal(rng);
      }
      std::vector<double> f(p, 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        const double x = kTwoPi * static_cast<double>(j) / static_cast<double>(p);
        for (std::size_t q = 0; q < kTemplateBand; ++q) {
          const double w = static_cast<double>(q + 1) * x;
          f[j] += a[q] * std::cos(w) + b[q] * std::sin(w);
        }
      }
      double norm = 0.0;
      for (double v : f) norm += v * v;
      norm = std::sqrt(norm);
      for (double& v : f) v /= norm;
      set.templates.emplace_back(std::move(f));
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_k; ++i) {
      for (std::size_t j = i + 1; j < n_k; ++j) {
        min_dist = std::min(min_dist, std::sqrt(rid(set.templates[i], set.templates[j]).distance_sq));
      }
    }
    set.attempts = attempt + 1;
    set.min_template_distance = n_k > 1 ? min_dist : 0.0;
    if (n_k == 1 || min_dist >= kTemplateSeparation) break;
  }

  double sum = 0.0, sum2 = 0.0;
  for (const auto& tpl : set.templates) {
    for (double v : tpl.samples()) {
      sum += v;
      sum2 += v * v;
    }
  }
  const double count = static_cast<double>(n_k * p);
  const double mean = sum / count;
  set.sigma = std::sqrt(std::max(0.0, sum2 / count - mean * mean));

  auto rng = substream(derive_seed(seed, 2), 0);
  std::uniform_int_distribution<std::size_t> shift(0, p - 1);
  for (std::size_t c = 0; c < n_k; ++c) {
    for (std::size_t r = 0; r < n_r; ++r) {
      const std::size_t s = shift(rng);
      set.images.push_back(rotate(set.templates[c], s));
      set.class_id.push_back(c);
      set.true_shift.push_back(s);
    }
  }
  return set;
}

void write_point_cloud_csv(std::ostream& out, const EmbeddedPointCloud& cloud) {
  for (std::size_t d = 0; d < cloud.p(); ++d) out << (d ? "," : "") << 'x' << d;
  out << ",t,norm\n";
  for (std::size_t i = 0; i < cloud.n(); ++i) {
    const auto row = cloud.points.row(static_cast<Eigen::Index>(i));
    for (std::size_t d = 0; d < cloud.p(); ++d) {
      out << (d ? "," : "") << format_double(row(static_cast<Eigen::Index>(d)));
    }
    out << ',' << format_double(cloud.params.empty() ? 0.0 : cloud.params[i]) << ','
        << format_double(row.norm()) << '\n';
  }
}

void write_point_cloud_csv(const std::string& path, const EmbeddedPointCloud& cloud) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_point_cloud_csv(f, cloud);
}

RowMatrix read_point_cloud_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw Error(ErrorCode::Io, "empty point cloud file");
  if (!line.empty() && line[0] == '#') line.erase(0, 1);
  std::size_t coords = 0;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok.erase(0, tok.find_first_not_of(" \t"));
      if (!tok.empty() && tok[0] == 'x') ++coords;
    }
  }
  if (coords == 0) throw Error(ErrorCode::Io, "point cloud header names no x columns");
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> r;
    while (r.size() < coords && std::getline(ss, tok, ',')) {
      try {
        r.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error(ErrorCode::Io, "bad number '" + tok + "'");
      }
    }
    if (r.size() != coords) throw Error(ErrorCode::Io, "short row in point cloud");
    rows.push_back(std::move(r));
  }
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(coords));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < coords; ++d) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    }
  }
  return m;
}

}  // namespace cglkit
