#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cglkit/connection_graph.hpp"
#include "cglkit/evaluation.hpp"
#include "cglkit/spectral_embeddings.hpp"

namespace cglkit {

inline const std::vector<std::string> kCurveMethods = {"euclidean", "knn_cgl", "full_cgl",
                                                       "zerodiag_cgl"};
inline const std::vector<std::string> kImageMethods = {"knn_cgl", "full_cgl", "zerodiag_cgl"};

struct CurveConfig {
  std::size_t n = 1000;
  std::size_t p = 1000;
  double alpha = 0.25;
  double c = 0.4;
  std::size_t knn = 100;
  double delta = 0.2;
  double t = 1.0;
  std::size_t min_dim = 3;
  std::size_t nn = 10;
  std::size_t report_rank = 50;
  double quantile = 0.25;
  BandwidthStat bandwidth_stat = BandwidthStat::SquaredDistance;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const CurveConfig& c);
void from_json(const nlohmann::json& j, CurveConfig& c);

struct CurveMethodResult {
  std::string method;
  RankCdf cdf;
  std::optional<DiffusionCoordinates> embedding;   // noisy data, CGL methods only
  std::size_t m_noisy = 0;
  std::size_t m_clean = 0;
};

struct CurveResult {
  CurveConfig config;
  std::vector<CurveMethodResult> methods;   // in kCurveMethods order
  double snrdb = 0.0;
  double bandwidth_noisy = 0.0;
  double bandwidth_clean = 0.0;

  const CurveMethodResult& method(const std::string& name) const;
};

/// Bell curve, isotropic noise, Gaussian kernel with a quantile bandwidth and
/// trivial connection, then kNN / full / zero-diagonal operators embedded by
/// truncated diffusion maps. Every method's neighbours are ranked against the
/// same construction applied to the clean points (Euclidean against clean
/// Euclidean distances).
CurveResult run_curve_experiment(const CurveConfig& config);

struct ImageConfig {
  std::size_t nk = 5;
  std::size_t nr = 200;
  std::size_t p = 1000;
  double alpha = 0.25;
  double c_sigma_mult = 6.0;   // 0 gives the clean run
  std::size_t knn = 100;
  double quantile = 0.25;
  BandwidthStat bandwidth_stat = BandwidthStat::Distance;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const ImageConfig& c);
void from_json(const nlohmann::json& j, ImageConfig& c);

struct ImageMethodResult {
  std::string method;
  std::vector<double> z;
  AlignmentSummary summary;
  std::vector<double> top_eigenvalues;
  std::size_t top_multiplicity = 1;
};

struct ImageResult {
  ImageConfig config;
  std::vector<std::size_t> class_id;
  std::vector<ImageMethodResult> methods;   // in kImageMethods order
  double sigma = 0.0;
  double c = 0.0;
  std::optional<double> snrdb;
  double bandwidth = 0.0;
  /// Fraction of same-class pairs whose estimated relative shift is exact.
  double shift_recovery = 0.0;

  const ImageMethodResult& method(const std::string& name) const;
};

/// Surrogate images, optional noise c = c_sigma_mult * sigma, RID connection
/// graph, complex CGL (kNN, full, zero-diagonal), alignment against the true
/// rotations.
ImageResult run_image_experiment(const ImageConfig& config);

struct RobustnessConfig {
  std::size_t n = 500;
  std::size_t p = 500;
  double alpha = 0.25;
  double c = 0.4;
  double quantile = 0.25;
  BandwidthStat bandwidth_stat = BandwidthStat::Distance;
  std::size_t top = 5;
  std::uint64_t seed = 0;
};

struct RobustnessResult {
  double bandwidth = 0.0;
  OperatorNorm dist_zero;   // |L0(noisy) - L(clean)|
  OperatorNorm dist_full;   // |L(noisy) - L(clean)|
  std::vector<double> eig_clean;   // top nontrivial eigenvalues
  std::vector<double> eig_zero;
  std::vector<double> eig_full;
  double eig_diff_zero = 0.0;   // max abs difference to eig_clean
  double eig_diff_full = 0.0;
};

/// Bell-curve comparison of L0 and L built on noisy points against L on the
/// clean points, both kernels using the bandwidth measured on the noisy data.
RobustnessResult spectral_robustness(const RobustnessConfig& config);

void to_json(nlohmann::json& j, const RobustnessResult& r);

/// Writes embedding_/rankcdf_ CSVs and summary.json under `dir`.
void write_curve_bundle(const std::string& dir, const CurveResult& result);
/// Writes alignment_ CSVs and summary.json under `dir`.
void write_image_bundle(const std::string& dir, const ImageResult& result);
nlohmann::json curve_summary(const CurveResult& result);
nlohmann::json image_summary(const ImageResult& result);

}  // namespace cglkit
