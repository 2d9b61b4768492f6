#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cglkit/connection_graph.hpp"
#include "cglkit/noise_models.hpp"

namespace cglkit {

enum class BoundVariant { Additive, Multiplicative, ZeroDiag };

std::string_view to_string(BoundVariant v);
BoundVariant bound_variant_from_string(std::string_view s);

struct BoundParams {
  double eps = 0.0;    // sup |w~/f - w|
  double eta = 0.0;    // sup |G~ - G|_F
  double gamma = 0.0;  // min_i sum_{j != i} w(i,j) / n, clean weights
  double C = 0.0;      // bound on |w|, |w~/f| and block Frobenius norms
  std::size_t n = 0;
};

/// C(eta + eps)/gamma + eps C^2 / (gamma (gamma - eps)), plus C^2/(n gamma)
/// for ZeroDiag. Throws GammaNotDominating when gamma <= eps.
double lemma_bound(const BoundParams& params, BoundVariant variant);

/// Empirical parameters of a perturbed pair. `f` (empty = all ones) divides
/// row i of W~. With `off_diag_only`, eps ignores the diagonal.
BoundParams measure_params(const AffinityMatrix& w, const AffinityMatrix& w_tilde,
                           const ConnectionBlocks& g, const ConnectionBlocks& g_tilde,
                           std::span<const double> f, bool off_diag_only);

struct LemmaReport {
  BoundVariant variant = BoundVariant::Additive;
  BoundParams params;
  double bound = 0.0;
  double measured_gap = 0.0;
  bool holds = false;
  OperatorNorm norm;   // convergence record of the measured gap
};

void to_json(nlohmann::json& j, const LemmaReport& r);

/// Additive and Multiplicative compare L(W,G) with L(W~,G~); ZeroDiag
/// compares L(W,G) with L0(W~,G~) and measures eps off the diagonal.
/// holds = measured_gap <= bound + 1e-9.
LemmaReport verify_lemma(const AffinityMatrix& w, const AffinityMatrix& w_tilde,
                         const ConnectionBlocks& g, const ConnectionBlocks& g_tilde,
                         std::span<const double> f, BoundVariant variant);

/// A randomly perturbed pair for bound sweeps.
struct LemmaInstance {
  AffinityMatrix w;
  AffinityMatrix w_tilde;
  ConnectionBlocks g;
  ConnectionBlocks g_tilde;
  std::vector<double> f;
};

/// Clean weights uniform on [0,1] (diagonal included), G random rotations
/// (k = 2) or signs (k = 1). The perturbation moves each weight by at most
/// `eps` and each k = 2 block by at most `eta` in Frobenius norm; the
/// Multiplicative variant also scales W~ by a global factor with per-row f
/// close to it, and ZeroDiag redraws the diagonal of W~ freely.
LemmaInstance random_lemma_instance(std::size_t n, std::size_t k, double eps, double eta,
                                    BoundVariant variant, std::uint64_t seed);

struct ConcentrationReport {
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  double trace_correction = 0.0;
  double scale = 0.0;                 // sqrt(log) sqrt(tr S^2) + |S| log
  std::vector<double> trial_sup;      // sup over pairs and shifts, per trial
  double observed_sup = 0.0;          // max over trials
  double ratio = 0.0;                 // observed_sup / scale
  double mean_deviation = 0.0;        // mean signed deviation over all terms
};

void to_json(nlohmann::json& j, const ConcentrationReport& r);

/// Simulates |N_i - rotate(N_j, s)|^2 - 2 c p^(1-alpha) over all pairs and
/// shifts; S = 2 (c/p^alpha) I and the log factor is log(p n^2). Trial t
/// uses noise seed derive_seed(spec.seed, t).
ConcentrationReport concentration_diagnostic(const NoiseSpec& spec, std::size_t p, std::size_t n,
                                             std::size_t trials);

}  // namespace cglkit
