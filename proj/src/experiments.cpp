#include "cglkit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cglkit/datasets.hpp"
#include "cglkit/error.hpp"
#include "cglkit/noise_models.hpp"
#include "cglkit/rid.hpp"
#include "cglkit/rng.hpp"

namespace cglkit {
namespace {

constexpr std::uint64_t kDataStream = 10;
constexpr std::uint64_t kNoiseStream = 11;

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void read_stat(const nlohmann::json& j, BandwidthStat& dst) {
  if (j.contains("bandwidth_stat")) dst = bandwidth_stat_from_string(j.at("bandwidth_stat").get<std::string>());
}

// Diffusion embedding of one operator variant built from W.
DiffusionCoordinates embed(const AffinityMatrix& w, bool zero_diag, const CurveConfig& cfg) {
  const auto g = ConnectionBlocks::trivial(w.n(), 1);
  const SpectralDecomposition dec = eig_sym(assemble_symmetric(w, g, zero_diag));
  return diffusion_map(dec, cfg.t, DimensionRule::threshold(cfg.delta, cfg.min_dim));
}

}  // namespace

void to_json(nlohmann::json& j, const CurveConfig& c) {
  j = nlohmann::json{{"n", c.n},
                     {"p", c.p},
                     {"alpha", c.alpha},
                     {"c", c.c},
                     {"knn", c.knn},
                     {"delta", c.delta},
                     {"t", c.t},
                     {"min_dim", c.min_dim},
                     {"nn", c.nn},
                     {"report_rank", c.report_rank},
                     {"quantile", c.quantile},
                     {"bandwidth_stat", to_string(c.bandwidth_stat)},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, CurveConfig& c) {
  read_key(j, "n", c.n);
  read_key(j, "p", c.p);
  read_key(j, "alpha", c.alpha);
  read_key(j, "c", c.c);
  read_key(j, "knn", c.knn);
  read_key(j, "delta", c.delta);
  read_key(j, "t", c.t);
  read_key(j, "min_dim", c.min_dim);
  read_key(j, "nn", c.nn);
  read_key(j, "report_rank", c.report_rank);
  read_key(j, "quantile", c.quantile);
  read_stat(j, c.bandwidth_stat);
  read_key(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const ImageConfig& c) {
  j = nlohmann::json{{"nk", c.nk},
                     {"nr", c.nr},
                     {"p", c.p},
                     {"alpha", c.alpha},
                     {"c_sigma_mult", c.c_sigma_mult},
                     {"knn", c.knn},
                     {"quantile", c.quantile},
                     {"bandwidth_stat", to_string(c.bandwidth_stat)},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ImageConfig& c) {
  read_key(j, "nk", c.nk);
  read_key(j, "nr", c.nr);
  read_key(j, "p", c.p);
  read_key(j, "alpha", c.alpha);
  read_key(j, "c_sigma_mult", c.c_sigma_mult);
  read_key(j, "knn", c.knn);
  read_key(j, "quantile", c.quantile);
  read_stat(j, c.bandwidth_stat);
  read_key(j, "seed", c.seed);
}

const CurveMethodResult& CurveResult::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "no method '" + name + "'");
}

const ImageMethodResult& ImageResult::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "no method '" + name + "'");
}

CurveResult run_curve_experiment(const CurveConfig& cfg) {
  if (cfg.n < 3) throw Error(ErrorCode::InvalidArgument, "curve experiment needs n >= 3");
  if (cfg.knn < 1 || cfg.knn >= cfg.n) throw Error(ErrorCode::InvalidK, "knn must satisfy 1 <= knn < n");
  if (cfg.nn < 1 || cfg.nn >= cfg.n) throw Error(ErrorCode::InvalidK, "nn must satisfy 1 <= nn < n");

  const EmbeddedPointCloud cloud = bell_curve(cfg.n, cfg.p, derive_seed(cfg.seed, kDataStream));
  NoiseSpec spec;
  spec.alpha = cfg.alpha;
  spec.c = cfg.c;
  spec.seed = derive_seed(cfg.seed, kNoiseStream);
  const RowMatrix x = cloud.points + sample_noise(spec, cfg.p, cfg.n).vectors;

  CurveResult res;
  res.config = cfg;
  res.snrdb = snrdb(cloud.points, x);

  const RowMatrix dx = pairwise_squared_distances(x);
  const RowMatrix dy = pairwise_squared_distances(cloud.points);
  res.bandwidth_noisy = kernel_bandwidth(dx, cfg.quantile, cfg.bandwidth_stat, false);
  res.bandwidth_clean = kernel_bandwidth(dy, cfg.quantile, cfg.bandwidth_stat, false);
  const AffinityMatrix wx = gaussian_affinity(dx, res.bandwidth_noisy);
  const AffinityMatrix wy = gaussian_affinity(dy, res.bandwidth_clean);

  res.methods.push_back({"euclidean", nn_rank_cdf(dx, dy, cfg.nn), std::nullopt, 0, 0});

  struct Variant {
    const char* name;
    bool knn;
    bool zero;
  };
  for (const Variant v : {Variant{"knn_cgl", true, false}, Variant{"full_cgl", false, false},
                          Variant{"zerodiag_cgl", false, true}}) {
    const AffinityMatrix ax = v.knn ? knn_mask(wx, cfg.knn) : wx;
    const AffinityMatrix ay = v.knn ? knn_mask(wy, cfg.knn) : wy;
    DiffusionCoordinates ex = embed(ax, v.zero, cfg);
    const DiffusionCoordinates ey = embed(ay, v.zero, cfg);
    CurveMethodResult m;
    m.method = v.name;
    m.cdf = nn_rank_cdf(diffusion_distance_matrix(ex), diffusion_distance_matrix(ey), cfg.nn);
    m.m_noisy = ex.m;
    m.m_clean = ey.m;
    m.embedding = std::move(ex);
    res.methods.push_back(std::move(m));
  }
  return res;
}

ImageResult run_image_experiment(const ImageConfig& cfg) {
  if (!(cfg.c_sigma_mult >= 0.0)) throw Error(ErrorCode::InvalidSpec, "c_sigma_mult must be >= 0");
  const SurrogateImageSet data =
      surrogate_images(cfg.nk, cfg.nr, cfg.p, derive_seed(cfg.seed, kDataStream));
  const std::size_t n = data.n();
  if (cfg.knn < 1 || cfg.knn >= n) throw Error(ErrorCode::InvalidK, "knn must satisfy 1 <= knn < n");

  ImageResult res;
  res.config = cfg;
  res.class_id = data.class_id;
  res.sigma = data.sigma;
  res.c = cfg.c_sigma_mult * data.sigma;

  std::vector<CircularImage> images = data.images;
  if (res.c > 0.0) {
    NoiseSpec spec;
    spec.alpha = cfg.alpha;
    spec.c = res.c;
    spec.seed = derive_seed(cfg.seed, kNoiseStream);
    const RowMatrix clean = data.as_matrix();
    const RowMatrix noisy = clean + sample_noise(spec, cfg.p, n).vectors;
    res.snrdb = snrdb(clean, noisy);
    images = image_set_from_rows(noisy).images;
  }

  const RidGraph graph = build_connection_graph(images, cfg.quantile, cfg.bandwidth_stat);
  res.bandwidth = graph.bandwidth;

  std::size_t same = 0, exact = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || data.class_id[i] != data.class_id[j]) continue;
      ++same;
      const std::size_t truth = (data.true_shift[i] + cfg.p - data.true_shift[j]) % cfg.p;
      if (graph.shift_at(i, j) == truth) ++exact;
    }
  }
  res.shift_recovery = same ? static_cast<double>(exact) / static_cast<double>(same) : 1.0;

  ComplexVector u(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    u(static_cast<Eigen::Index>(i)) =
        std::polar(1.0, RotationIndex{data.true_shift[i], cfg.p}.angle());
  }

  const AffinityMatrix wk = knn_mask(graph.w, cfg.knn);
  struct Variant {
    const char* name;
    const AffinityMatrix* w;
    bool zero;
  };
  for (const Variant v : {Variant{"knn_cgl", &wk, false}, Variant{"full_cgl", &graph.w, false},
                          Variant{"zerodiag_cgl", &graph.w, true}}) {
    const ComplexDecomposition dec = eig_hermitian(assemble_complex(*v.w, graph.g, v.zero));
    ImageMethodResult m;
    m.method = v.name;
    m.z = alignment_error(u, alignment_vector(dec));
    m.summary = alignment_summary(m.z, data.class_id);
    for (Eigen::Index l = 0; l < std::min<Eigen::Index>(6, dec.eigenvalues.size()); ++l) {
      m.top_eigenvalues.push_back(dec.eigenvalues(l));
    }
    const double top = dec.eigenvalues(0);
    const double tol = kDegenerateEigTol * std::max(1.0, std::abs(top));
    m.top_multiplicity = 0;
    for (Eigen::Index l = 0; l < dec.eigenvalues.size() && dec.eigenvalues(l) > top - tol; ++l) {
      ++m.top_multiplicity;
    }
    res.methods.push_back(std::move(m));
  }
  return res;
}

RobustnessResult spectral_robustness(const RobustnessConfig& cfg) {
  const EmbeddedPointCloud cloud = bell_curve(cfg.n, cfg.p, derive_seed(cfg.seed, kDataStream));
  NoiseSpec spec;
  spec.alpha = cfg.alpha;
  spec.c = cfg.c;
  spec.seed = derive_seed(cfg.seed, kNoiseStream);
  const RowMatrix x = cloud.points + sample_noise(spec, cfg.p, cfg.n).vectors;
  const RowMatrix dx = pairwise_squared_distances(x);
  const RowMatrix dy = pairwise_squared_distances(cloud.points);

  RobustnessResult r;
  r.bandwidth = kernel_bandwidth(dx, cfg.quantile, cfg.bandwidth_stat, false);
  const AffinityMatrix wx = gaussian_affinity(dx, r.bandwidth);
  const AffinityMatrix wy = gaussian_affinity(dy, r.bandwidth);
  const auto g = ConnectionBlocks::trivial(cfg.n, 1);

  r.dist_zero = operator_distance(assemble_cgl(wx, g, true), assemble_cgl(wy, g, false));
  r.dist_full = operator_distance(assemble_cgl(wx, g, false), assemble_cgl(wy, g, false));

  auto top = [&](const AffinityMatrix& w, bool zero) {
    const SpectralDecomposition dec = eig_sym(assemble_symmetric(w, g, zero));
    std::vector<double> out;
    for (std::size_t l = 1; l <= cfg.top && l < dec.size(); ++l) {
      out.push_back(dec.eigenvalues(static_cast<Eigen::Index>(l)));
    }
    return out;
  };
  r.eig_clean = top(wy, false);
  r.eig_zero = top(wx, true);
  r.eig_full = top(wx, false);
  for (std::size_t l = 0; l < r.eig_clean.size(); ++l) {
    r.eig_diff_zero = std::max(r.eig_diff_zero, std::abs(r.eig_zero[l] - r.eig_clean[l]));
    r.eig_diff_full = std::max(r.eig_diff_full, std::abs(r.eig_full[l] - r.eig_clean[l]));
  }
  return r;
}

void to_json(nlohmann::json& j, const RobustnessResult& r) {
  j = nlohmann::json{{"bandwidth", r.bandwidth},
                     {"dist_zero", r.dist_zero.value},
                     {"dist_full", r.dist_full.value},
                     {"eig_clean", r.eig_clean},
                     {"eig_zero", r.eig_zero},
                     {"eig_full", r.eig_full},
                     {"eig_diff_zero", r.eig_diff_zero},
                     {"eig_diff_full", r.eig_diff_full}};
}

}  // namespace cglkit
