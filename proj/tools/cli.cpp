#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "cglkit/datasets.hpp"
#include "cglkit/error.hpp"
#include "cglkit/experiments.hpp"
#include "cglkit/matrix_io.hpp"
#include "cglkit/noise_models.hpp"
#include "cglkit/parallel.hpp"
#include "cglkit/perturbation_bounds.hpp"
#include "cglkit/rid.hpp"
#include "cglkit/rng.hpp"
#include "cglkit/spectral_embeddings.hpp"

namespace cglkit::cli {
namespace {

using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options of one subcommand, with JSON config overlay: a config value is used
// only when the flag itself was not given.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON file with the same keys as the flags");
  }

  template <typename T>
  CLI::Option* add(const std::string& name, T& var, const std::string& desc) {
    auto* opt = app_->add_option("--" + name, var, desc)->capture_default_str();
    entries_[name] = {opt, [&var](const json& v) { var = v.get<T>(); }};
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
    auto* opt = app_->add_flag("--" + name, var, desc);
    entries_[name] = {opt, [&var](const json& v) { var = v.get<bool>(); }};
    return opt;
  }

  void load_config() {
    if (config_path_.empty()) return;
    std::ifstream f(config_path_);
    if (!f) throw UsageError("--config: cannot open '" + config_path_ + "'");
    json cfg;
    try {
      f >> cfg;
    } catch (const json::exception& e) {
      throw UsageError("--config: invalid JSON (" + std::string(e.what()) + ")");
    }
    if (!cfg.is_object()) throw UsageError("--config: top level must be an object");
    for (const auto& [key, value] : cfg.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      if (name == "subcommand" || name == "threads") continue;
      const auto it = entries_.find(name);
      if (it == entries_.end()) throw UsageError("--config: unknown key '" + key + "'");
      from_config_.insert(name);
      if (it->second.opt->count() > 0) continue;
      try {
        it->second.set(value);
      } catch (const json::exception&) {
        throw UsageError("--config: bad value for '" + key + "'");
      }
    }
  }

  bool provided(const std::string& name) const {
    const auto it = entries_.find(name);
    return (it != entries_.end() && it->second.opt->count() > 0) || from_config_.count(name) > 0;
  }

 private:
  struct Entry {
    CLI::Option* opt = nullptr;
    std::function<void(const json&)> set;
  };
  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> from_config_;
};

std::uint64_t resolve_seed(const Options& o, std::uint64_t seed) {
  if (o.provided("seed")) return seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

BandwidthStat parse_stat(const std::string& s) {
  try {
    return bandwidth_stat_from_string(s);
  } catch (const Error&) {
    throw UsageError("--bandwidth-stat: expected 'distance' or 'squared_distance', got '" + s + "'");
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  f << j.dump(2) << '\n';
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
}

struct Context {
  std::ostream& out;
  int threads = 0;
};

// ---- curve -----------------------------------------------------------------

struct CurveCmd {
  CurveConfig cfg;
  std::string stat = "squared_distance";
  std::string out_dir;
  std::unique_ptr<Options> opts;

  void setup(CLI::App* app) {
    opts = std::make_unique<Options>(app);
    opts->add("n", cfg.n, "number of points");
    opts->add("p", cfg.p, "ambient dimension");
    opts->add("alpha", cfg.alpha, "noise exponent");
    opts->add("c", cfg.c, "noise scale");
    opts->add("knn", cfg.knn, "neighbours kept by the kNN operator");
    opts->add("delta", cfg.delta, "tDM eigenvalue threshold");
    opts->add("t", cfg.t, "diffusion time");
    opts->add("min-dim", cfg.min_dim, "lower bound on the tDM dimension");
    opts->add("nn", cfg.nn, "estimated neighbours per point");
    opts->add("report-rank", cfg.report_rank, "rank at which the CDF is summarised");
    opts->add("quantile", cfg.quantile, "bandwidth quantile");
    opts->add("bandwidth-stat", stat, "distance | squared_distance");
    opts->add("seed", cfg.seed, "random seed (drawn and recorded when omitted)");
    opts->add("out", out_dir, "output directory");
  }

  int run(Context& ctx) {
    opts->load_config();
    if (out_dir.empty()) throw UsageError("--out: required");
    cfg.bandwidth_stat = parse_stat(stat);
    cfg.seed = resolve_seed(*opts, cfg.seed);
    ensure_dir(out_dir);
    json c = cfg;
    c["subcommand"] = "curve";
    c["out"] = out_dir;
    c["threads"] = ctx.threads;
    write_json(std::filesystem::path(out_dir) / "config.json", c);
    const CurveResult r = run_curve_experiment(cfg);
    write_curve_bundle(out_dir, r);
    ctx.out << curve_summary(r).dump(2) << '\n';
    return 0;
  }
};

// ---- images ----------------------------------------------------------------

struct ImagesCmd {
  ImageConfig cfg;
  std::string stat = "distance";
  std::string out_dir;
  std::unique_ptr<Options> opts;

  void setup(CLI::App* app) {
    opts = std::make_unique<Options>(app);
    opts->add("nk", cfg.nk, "number of templates");
    opts->add("nr", cfg.nr, "rotations per template");
    opts->add("p", cfg.p, "samples on the circle");
    opts->add("alpha", cfg.alpha, "noise exponent");
    opts->add("c-sigma-mult", cfg.c_sigma_mult, "noise scale as a multiple of sigma (0 = clean)");
    opts->add("knn", cfg.knn, "neighbours kept by the kNN operator");
    opts->add("quantile", cfg.quantile, "bandwidth quantile");
    opts->add("bandwidth-stat", stat, "distance | squared_distance");
    opts->add("seed", cfg.seed, "random seed (drawn and recorded when omitted)");
    opts->add("out", out_dir, "output directory");
  }

  int run(Context& ctx) {
    opts->load_config();
    if (out_dir.empty()) throw UsageError("--out: required");
    cfg.bandwidth_stat = parse_stat(stat);
    cfg.seed = resolve_seed(*opts, cfg.seed);
    ensure_dir(out_dir);
    json c = cfg;
    c["subcommand"] = "images";
    c["out"] = out_dir;
    c["threads"] = ctx.threads;
    write_json(std::filesystem::path(out_dir) / "config.json", c);
    const ImageResult r = run_image_experiment(cfg);
    write_image_bundle(out_dir, r);
    ctx.out << image_summary(r).dump(2) << '\n';
    return 0;
  }
};

// ---- bounds ----------------------------------------------------------------

struct BoundsCmd {
  std::string variant = "zerodiag";
  std::size_t n = 50;
  std::size_t k = 2;
  std::size_t trials = 100;
  double eps = 0.05;
  double eta = 0.05;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::unique_ptr<Options> opts;

  void setup(CLI::App* app) {
    opts = std::make_unique<Options>(app);
    opts->add("variant", variant, "additive | multiplicative | zerodiag | all");
    opts->add("n", n, "graph size");
    opts->add("k", k, "connection block size (1 or 2)");
    opts->add("trials", trials, "random instances per variant");
    opts->add("eps", eps, "weight perturbation magnitude");
    opts->add("eta", eta, "connection perturbation magnitude (Frobenius)");
    opts->add("seed", seed, "random seed (drawn and recorded when omitted)");
    opts->add("out", out_dir, "optional output directory");
  }

  int run(Context& ctx) {
    opts->load_config();
    std::vector<BoundVariant> variants;
    if (variant == "all") {
      variants = {BoundVariant::Additive, BoundVariant::Multiplicative, BoundVariant::ZeroDiag};
    } else {
      try {
        variants = {bound_variant_from_string(variant)};
      } catch (const Error&) {
        throw UsageError("--variant: unknown value '" + variant + "'");
      }
    }
    if (k != 1 && k != 2) throw UsageError("--k: must be 1 or 2");
    if (n < 2) throw UsageError("--n: must be at least 2");
    seed = resolve_seed(*opts, seed);

    json report{{"variant", variant}, {"n", n},       {"k", k},
                {"trials", trials},   {"eps", eps},   {"eta", eta},
                {"seed", seed}};
    std::size_t holds = 0, total = 0;
    double worst = 0.0;
    json runs = json::array();
    for (const BoundVariant v : variants) {
      for (std::size_t t = 0; t < trials; ++t) {
        const auto inst = random_lemma_instance(n, k, eps, eta, v,
                                                derive_seed(seed, t * 3 + static_cast<std::size_t>(v)));
        const LemmaReport r = verify_lemma(inst.w, inst.w_tilde, inst.g, inst.g_tilde, inst.f, v);
        holds += r.holds;
        ++total;
        worst = std::max(worst, r.measured_gap / r.bound);
        runs.push_back(r);
      }
    }
    report["holds_count"] = holds;
    report["instances"] = total;
    report["max_gap_over_bound"] = worst;
    if (!out_dir.empty()) {
      ensure_dir(out_dir);
      json c{{"subcommand", "bounds"}, {"variant", variant}, {"n", n},     {"k", k},
             {"trials", trials},       {"eps", eps},         {"eta", eta}, {"seed", seed},
             {"out", out_dir},         {"threads", ctx.threads}};
      write_json(std::filesystem::path(out_dir) / "config.json", c);
      json full = report;
      full["reports"] = runs;
      write_json(std::filesystem::path(out_dir) / "report.json", full);
      ctx.out << report.dump(2) << '\n';
    } else {
      report["reports"] = runs;
      ctx.out << report.dump(2) << '\n';
    }
    return 0;
  }
};

// ---- concentration ---------------------------------------------------------

struct ConcentrationCmd {
  double alpha = 1.0;
  double c = 1.0;
  std::size_t p = 500;
  std::size_t n = 20;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::unique_ptr<Options> opts;

  void setup(CLI::App* app) {
    opts = std::make_unique<Options>(app);
    opts->add("alpha", alpha, "noise exponent");
    opts->add("c", c, "noise scale");
    opts->add("p", p, "vector length");
    opts->add("n", n, "vectors per trial");
    opts->add("trials", trials, "independent trials");
    opts->add("seed", seed, "random seed (drawn and recorded when omitted)");
    opts->add("out", out_dir, "optional output directory");
  }

  int run(Context& ctx) {
    opts->load_config();
    NoiseSpec spec;
    spec.alpha = alpha;
    spec.c = c;
    spec.seed = resolve_seed(*opts, seed);
    const ConcentrationReport r = concentration_diagnostic(spec, p, n, trials);
    json j = r;
    j["seed"] = spec.seed;
    if (!out_dir.empty()) {
      ensure_dir(out_dir);
      json cfg{{"subcommand", "concentration"}, {"alpha", alpha}, {"c", c}, {"p", p}, {"n", n},
               {"trials", trials}, {"seed", spec.seed}, {"out", out_dir}, {"threads", ctx.threads}};
      write_json(std::filesystem::path(out_dir) / "config.json", cfg);
      write_json(std::filesystem::path(out_dir) / "report.json", j);
    }
    ctx.out << j.dump(2) << '\n';
    return 0;
  }
};

// ---- embed -----------------------------------------------------------------

struct EmbedCmd {
  std::string points;
  std::string images;
  double quantile = 0.25;
  std::string stat = "squared_distance";
  std::size_t knn = 0;
  bool zero_diag = false;
  double t = 1.0;
  double delta = 0.2;
  std::size_t m = 0;
  std::size_t min_dim = 0;
  std::size_t vdm_r = 0;
  std::string out_dir;
  std::unique_ptr<Options> opts;

  void setup(CLI::App* app) {
    opts = std::make_unique<Options>(app);
    opts->add("points", points, "point-cloud CSV (x0.. columns)");
    opts->add("images", images, "image CSV");
    opts->add("quantile", quantile, "bandwidth quantile");
    opts->add("bandwidth-stat", stat, "distance | squared_distance");
    opts->add("knn", knn, "keep this many neighbours per row (0 = complete graph)");
    opts->flag("zero-diag", zero_diag, "drop the diagonal (L0)");
    opts->add("t", t, "diffusion time");
    opts->add("delta", delta, "tDM eigenvalue threshold (used when --m is 0)");
    opts->add("m", m, "fixed embedding dimension");
    opts->add("min-dim", min_dim, "lower bound on the tDM dimension");
    opts->add("vdm-r", vdm_r, "retained eigenvectors for VDM distances (0 = skip; images only)");
    opts->add("out", out_dir, "output directory");
  }

  int run(Context& ctx) {
    opts->load_config();
    if (out_dir.empty()) throw UsageError("--out: required");
    if (points.empty() == images.empty()) throw UsageError("--points/--images: give exactly one");
    const BandwidthStat bstat = parse_stat(stat);
    ensure_dir(out_dir);
    const std::filesystem::path base(out_dir);
    json cfg{{"subcommand", "embed"}, {"points", points},     {"images", images},
             {"quantile", quantile},  {"bandwidth_stat", stat}, {"knn", knn},
             {"zero_diag", zero_diag}, {"t", t},               {"delta", delta},
             {"m", m},                {"min_dim", min_dim},    {"vdm_r", vdm_r},
             {"out", out_dir},        {"threads", ctx.threads}};
    write_json(base / "config.json", cfg);

    AffinityMatrix w;
    std::optional<RidGraph> graph;
    CircularImageSet set;
    if (!points.empty()) {
      const RowMatrix x = read_point_cloud_csv(points);
      const RowMatrix d2 = pairwise_squared_distances(x);
      w = gaussian_affinity(d2, kernel_bandwidth(d2, quantile, bstat, false));
    } else {
      set = read_images_csv(images);
      graph = build_connection_graph(set.images, quantile, bstat);
      w = graph->w;
    }
    if (knn > 0) w = knn_mask(w, knn);
    const std::size_t n = w.n();

    const SpectralDecomposition dec =
        eig_sym(assemble_symmetric(w, ConnectionBlocks::trivial(n, 1), zero_diag));
    const DimensionRule rule = m > 0 ? DimensionRule::fixed(m) : DimensionRule::threshold(delta, min_dim);
    const DiffusionCoordinates phi = diffusion_map(dec, t, rule);
    write_embedding_csv((base / "embedding.csv").string(), phi);
    {
      std::ofstream f(base / "eigenvalues.csv");
      f << "index,eigenvalue\n";
      for (Eigen::Index l = 0; l < dec.eigenvalues.size(); ++l) {
        f << l + 1 << ',' << format_double(dec.eigenvalues(l)) << '\n';
      }
    }
    json summary{{"n", n}, {"m", phi.m}, {"embedding_eigenvalues", phi.eigenvalues}};

    if (graph) {
      const ComplexDecomposition cdec = eig_hermitian(assemble_complex(w, graph->g, zero_diag));
      const ComplexVector v = alignment_vector(cdec);
      ComplexVector u = ComplexVector::Ones(static_cast<Eigen::Index>(n));
      if (set.true_shift.size() == n) {
        for (std::size_t i = 0; i < n; ++i) {
          u(static_cast<Eigen::Index>(i)) = std::polar(1.0, RotationIndex{set.true_shift[i], graph->p}.angle());
        }
      }
      write_alignment_csv((base / "alignment.csv").string(), alignment_error(u, v), set.class_id);
      summary["top_connection_eigenvalue"] = cdec.eigenvalues(0);
      if (vdm_r > 0) {
        const SpectralDecomposition vdec = eig_sym(assemble_symmetric(w, graph->g, zero_diag));
        const VdmCoordinates coords = vdm(vdec, t, vdm_r);
        RowMatrix d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = coords.distance_sq(i, j);
          }
        }
        write_matrix_csv((base / "vdm_distance_sq.csv").string(), d, "vdm_distance_sq");
      }
    }
    write_json(base / "summary.json", summary);
    ctx.out << summary.dump(2) << '\n';
    return 0;
  }
};

// ---- rid -------------------------------------------------------------------

struct RidCmd {
  std::string images;
  std::string out;
  std::unique_ptr<Options> opts;

  void setup(CLI::App* app) {
    opts = std::make_unique<Options>(app);
    opts->add("images", images, "image CSV");
    opts->add("out", out, "output CSV (i,j,distance_sq,optimal_shift)");
  }

  int run(Context& ctx) {
    opts->load_config();
    if (images.empty()) throw UsageError("--images: required");
    if (out.empty()) throw UsageError("--out: required");
    const CircularImageSet set = read_images_csv(images);
    const RidTable table = pairwise_rid(set.images);
    std::ofstream f(out);
    if (!f) throw Error(ErrorCode::Io, "cannot open '" + out + "' for writing");
    f << "i,j,distance_sq,optimal_shift\n";
    const std::size_t n = set.n();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        f << i << ',' << j << ','
          << format_double(table.distance_sq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
          << ',' << table.shift[i * n + j] << '\n';
      }
    }
    ctx.out << json{{"images", n}, {"p", table.p}, {"pairs", n * (n - 1) / 2}}.dump() << '\n';
    return 0;
  }
};

// ---- generate --------------------------------------------------------------

struct GenerateCmd {
  std::string dataset = "bell";
  std::size_t n = 1000;
  std::size_t p = 1000;
  std::size_t nk = 5;
  std::size_t nr = 200;
  double alpha = 0.25;
  double c = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
  std::unique_ptr<Options> opts;

  void setup(CLI::App* app) {
    opts = std::make_unique<Options>(app);
    opts->add("dataset", dataset, "bell | trefoil | circle | images");
    opts->add("n", n, "number of points (curves)");
    opts->add("p", p, "dimension / samples on the circle");
    opts->add("nk", nk, "templates (images)");
    opts->add("nr", nr, "rotations per template (images)");
    opts->add("alpha", alpha, "noise exponent");
    opts->add("c", c, "noise scale (0 = clean; for images a multiple of sigma)");
    opts->add("seed", seed, "random seed (drawn and recorded when omitted)");
    opts->add("out", out, "output CSV");
    opts->add("manifest", manifest, "optional JSON manifest path");
  }

  int run(Context& ctx) {
    opts->load_config();
    if (out.empty()) throw UsageError("--out: required");
    seed = resolve_seed(*opts, seed);
    json man{{"dataset", dataset}, {"seed", seed}, {"alpha", alpha}, {"c", c}};
    NoiseSpec spec;
    spec.alpha = alpha;
    spec.seed = derive_seed(seed, 11);

    if (dataset == "images") {
      SurrogateImageSet set = surrogate_images(nk, nr, p, derive_seed(seed, 10));
      man.update({{"nk", nk}, {"nr", nr}, {"p", p}, {"sigma", set.sigma},
                  {"template_attempts", set.attempts},
                  {"min_template_distance", set.min_template_distance}});
      if (c > 0.0) {
        spec.c = c * set.sigma;
        const RowMatrix clean = set.as_matrix();
        const RowMatrix noisy = clean + sample_noise(spec, p, set.n()).vectors;
        man["noise_c"] = spec.c;
        man["snrdb"] = snrdb(clean, noisy);
        CircularImageSet noisy_set = image_set_from_rows(noisy, set);
        write_images_csv(out, noisy_set);
      } else {
        write_images_csv(out, set);
      }
    } else {
      EmbeddedPointCloud cloud;
      if (dataset == "bell") {
        cloud = bell_curve(n, p, derive_seed(seed, 10));
      } else if (dataset == "trefoil") {
        cloud = trefoil(n, derive_seed(seed, 10));
      } else if (dataset == "circle") {
        cloud = circle(n, derive_seed(seed, 10));
      } else {
        throw UsageError("--dataset: unknown value '" + dataset + "'");
      }
      man.update({{"n", n}, {"p", cloud.p()}});
      if (c > 0.0) {
        spec.c = c;
        const RowMatrix clean = cloud.points;
        cloud.points += sample_noise(spec, cloud.p(), n).vectors;
        man["snrdb"] = snrdb(clean, cloud.points);
      }
      write_point_cloud_csv(out, cloud);
    }
    if (!manifest.empty()) write_json(manifest, man);
    ctx.out << man.dump(2) << '\n';
    return 0;
  }
};

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Connection graph Laplacian toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: CGLKIT_THREADS or all cores)");

  CurveCmd curve;
  ImagesCmd images;
  BoundsCmd bounds;
  ConcentrationCmd conc;
  EmbedCmd embed;
  RidCmd rid_cmd;
  GenerateCmd gen;
  auto* s_curve = app.add_subcommand("curve", "bell-curve robustness experiment");
  auto* s_images = app.add_subcommand("images", "surrogate-image alignment experiment");
  auto* s_bounds = app.add_subcommand("bounds", "randomised perturbation-bound verification");
  auto* s_conc = app.add_subcommand("concentration", "noise concentration diagnostic");
  auto* s_embed = app.add_subcommand("embed", "graph, eigendecomposition, DM/VDM export");
  auto* s_rid = app.add_subcommand("rid", "pairwise rotationally invariant distances");
  auto* s_gen = app.add_subcommand("generate", "write a synthetic dataset");
  curve.setup(s_curve);
  images.setup(s_images);
  bounds.setup(s_bounds);
  conc.setup(s_conc);
  embed.setup(s_embed);
  rid_cmd.setup(s_rid);
  gen.setup(s_gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  if (threads_opt->count() == 0) {
    if (const char* env = std::getenv("CGLKIT_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        err << "error: CGLKIT_THREADS: not an integer ('" << env << "')\n";
        return 2;
      }
    }
  }
  if (threads < 0) {
    err << "error: --threads: must be >= 0\n";
    return 2;
  }
  set_thread_count(threads);

  Context ctx{out, thread_count()};
  try {
    if (s_curve->parsed()) return curve.run(ctx);
    if (s_images->parsed()) return images.run(ctx);
    if (s_bounds->parsed()) return bounds.run(ctx);
    if (s_conc->parsed()) return conc.run(ctx);
    if (s_embed->parsed()) return embed.run(ctx);
    if (s_rid->parsed()) return rid_cmd.run(ctx);
    if (s_gen->parsed()) return gen.run(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace cglkit::cli
