#include "cglkit/noise_models.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cglkit/error.hpp"
#include "cglkit/rid.hpp"
#include "cglkit/rng.hpp"
#include "cglkit/simd/kernels.hpp"

namespace cglkit {

LambdaLaw LambdaLaw::two_point() { return {{0.5, std::sqrt(1.75)}, {0.5, 0.5}}; }

double LambdaLaw::second_moment() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i] * values[i];
  return m;
}

double NoiseSpec::variance(std::size_t p) const {
  return c / std::pow(static_cast<double>(p), alpha);
}

void NoiseSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "alpha must lie in [0,1]");
  }
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidSpec, "c must be positive");
  if (shape == NoiseShape::Elliptical) {
    if (lambda_law.values.empty() || lambda_law.values.size() != lambda_law.probs.size()) {
      throw Error(ErrorCode::InvalidSpec, "lambda law needs matching values and probs");
    }
    double total = 0.0;
    for (double q : lambda_law.probs) {
      if (!(q >= 0.0)) throw Error(ErrorCode::InvalidSpec, "lambda probabilities must be >= 0");
      total += q;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidSpec, "lambda probabilities must sum to 1");
    if (std::abs(lambda_law.second_moment() - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidSpec, "lambda law must have unit second moment");
    }
  }
}

void to_json(nlohmann::json& j, const NoiseSpec& spec) {
  j = nlohmann::json{{"alpha", spec.alpha},
                     {"c", spec.c},
                     {"shape", spec.shape == NoiseShape::Isotropic ? "isotropic" : "elliptical"},
                     {"lambda_law",
                      {{"values", spec.lambda_law.values}, {"probs", spec.lambda_law.probs}}},
                     {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, NoiseSpec& spec) {
  try {
    NoiseSpec s;
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    if (j.contains("c")) s.c = j.at("c").get<double>();
    if (j.contains("shape")) {
      const auto shape = j.at("shape").get<std::string>();
      if (shape == "isotropic") {
        s.shape = NoiseShape::Isotropic;
      } else if (shape == "elliptical") {
        s.shape = NoiseShape::Elliptical;
      } else {
        throw Error(ErrorCode::InvalidSpec, "unknown noise shape '" + shape + "'");
      }
    }
    if (j.contains("lambda_law")) {
      const auto& law = j.at("lambda_law");
      if (law.is_string()) {
        if (law.get<std::string>() != "two_point") {
          throw Error(ErrorCode::InvalidSpec, "unknown lambda law '" + law.get<std::string>() + "'");
        }
        s.lambda_law = LambdaLaw::two_point();
      } else {
        s.lambda_law.values = law.at("values").get<std::vector<double>>();
        s.lambda_law.probs = law.at("probs").get<std::vector<double>>();
      }
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    spec = std::move(s);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("noise spec: ") + e.what());
  }
}

NoiseSample sample_noise(const NoiseSpec& spec, std::size_t p, std::size_t count) {
  spec.validate();
  if (p == 0 || count == 0) throw Error(ErrorCode::InvalidSpec, "p and count must be >= 1");
  const double sd = std::sqrt(spec.variance(p));
  NoiseSample out;
  out.vectors.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(p));
  out.lambda.assign(count, 1.0);

  std::vector<double> cumulative;
  if (spec.shape == NoiseShape::Elliptical) {
    cumulative.resize(spec.lambda_law.probs.size());
    std::partial_sum(spec.lambda_law.probs.begin(), spec.lambda_law.probs.end(), cumulative.begin());
  }

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(count); ++ii) {
    auto rng = substream(spec.seed, static_cast<std::uint64_t>(ii));
    double lam = 1.0;
    if (spec.shape == NoiseShape::Elliptical) {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      std::size_t k = 0;
      while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
      lam = spec.lambda_law.values[k];
    }
    out.lambda[static_cast<std::size_t>(ii)] = lam;
    std::normal_distribution<double> normal(0.0, sd);
    double* row = out.vectors.data() + ii * out.vectors.cols();
    for (std::size_t j = 0; j < p; ++j) row[j] = lam * normal(rng);
  }
  return out;
}

double snrdb(const RowMatrix& clean, const RowMatrix& noisy) {
  if (clean.rows() != noisy.rows() || clean.cols() != noisy.cols() || clean.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "clean and noisy sets differ in shape");
  }
  const double x2 = noisy.squaredNorm() / static_cast<double>(noisy.rows());
  const double z2 = (noisy - clean).squaredNorm() / static_cast<double>(noisy.rows());
  if (!(z2 > 0.0)) throw Error(ErrorCode::ZeroNoise, "noisy data equals clean data");
  return 20.0 * std::log10(std::sqrt(x2) / std::sqrt(z2));
}

double trace_correction(const NoiseSpec& spec, std::size_t p) {
  if (spec.shape != NoiseShape::Isotropic) {
    throw Error(ErrorCode::UnsupportedShape, "trace correction is defined for isotropic noise");
  }
  return 2.0 * spec.c * std::pow(static_cast<double>(p), 1.0 - spec.alpha);
}

std::vector<PairOffset> rid_offsets(const RowMatrix& clean, const RowMatrix& noisy) {
  if (clean.rows() != noisy.rows() || clean.cols() != noisy.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "clean and noisy sets differ in shape");
  }
  const RidTable c = pairwise_rid(image_set_from_rows(clean).images);
  const RidTable x = pairwise_rid(image_set_from_rows(noisy).images);
  const auto n = static_cast<std::size_t>(clean.rows());
  std::vector<PairOffset> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto ei = static_cast<Eigen::Index>(i);
      const auto ej = static_cast<Eigen::Index>(j);
      out.push_back({i, j, x.distance_sq(ei, ej) - c.distance_sq(ei, ej),
                     x.shift[i * n + j] == c.shift[i * n + j]});
    }
  }
  return out;
}

}  // namespace cglkit
