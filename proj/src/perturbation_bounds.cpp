#include "cglkit/perturbation_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "cglkit/correlation.hpp"
#include "cglkit/error.hpp"
#include "cglkit/rng.hpp"
#include "cglkit/simd/kernels.hpp"

namespace cglkit {

std::string_view to_string(BoundVariant v) {
  switch (v) {
    case BoundVariant::Additive: return "additive";
    case BoundVariant::Multiplicative: return "multiplicative";
    case BoundVariant::ZeroDiag: return "zerodiag";
  }
  return "additive";
}

BoundVariant bound_variant_from_string(std::string_view s) {
  if (s == "additive") return BoundVariant::Additive;
  if (s == "multiplicative") return BoundVariant::Multiplicative;
  if (s == "zerodiag") return BoundVariant::ZeroDiag;
  throw Error(ErrorCode::InvalidArgument, "unknown bound variant '" + std::string(s) + "'");
}

double lemma_bound(const BoundParams& q, BoundVariant variant) {
  if (!(q.gamma > q.eps)) {
    throw Error(ErrorCode::GammaNotDominating, "gamma must exceed eps (gamma=" +
                                                   std::to_string(q.gamma) + ", eps=" +
                                                   std::to_string(q.eps) + ")");
  }
  if (!(q.C > 0.0) || q.eps < 0.0 || q.eta < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "bound parameters need C > 0 and eps, eta >= 0");
  }
  double b = q.C * (q.eta + q.eps) / q.gamma + q.eps * q.C * q.C / (q.gamma * (q.gamma - q.eps));
  if (variant == BoundVariant::ZeroDiag) {
    if (q.n == 0) throw Error(ErrorCode::InvalidArgument, "zero-diagonal bound needs n >= 1");
    b += q.C * q.C / (static_cast<double>(q.n) * q.gamma);
  }
  return b;
}

BoundParams measure_params(const AffinityMatrix& w, const AffinityMatrix& w_tilde,
                           const ConnectionBlocks& g, const ConnectionBlocks& g_tilde,
                           std::span<const double> f, bool off_diag_only) {
  const std::size_t n = w.n();
  if (w_tilde.n() != n || g.n() != n || g_tilde.n() != n || g.k() != g_tilde.k()) {
    throw Error(ErrorCode::DimensionMismatch, "perturbed pair differs in n or k");
  }
  if (!f.empty() && f.size() != n) throw Error(ErrorCode::DimensionMismatch, "f has wrong length");
  for (double v : f) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "f must be strictly positive");
  }
  BoundParams q;
  q.n = n;
  double min_deg = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = f.empty() ? 1.0 : f[i];
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = w(i, j);
      const double b = w_tilde(i, j) / fi;
      if (j != i) deg += a;
      q.C = std::max(q.C, std::abs(a));
      if (!(off_diag_only && i == j)) {
        q.eps = std::max(q.eps, std::abs(b - a));
        q.C = std::max(q.C, std::abs(b));
      }
      const auto ga = g.block_matrix(i, j);
      const auto gb = g_tilde.block_matrix(i, j);
      q.eta = std::max(q.eta, (gb - ga).norm());
      q.C = std::max({q.C, ga.norm(), gb.norm()});
    }
    min_deg = std::min(min_deg, deg);
  }
  q.gamma = n ? min_deg / static_cast<double>(n) : 0.0;
  return q;
}

void to_json(nlohmann::json& j, const LemmaReport& r) {
  j = nlohmann::json{{"variant", to_string(r.variant)},
                     {"eps", r.params.eps},
                     {"eta", r.params.eta},
                     {"gamma", r.params.gamma},
                     {"C", r.params.C},
                     {"n", r.params.n},
                     {"bound", r.bound},
                     {"measured_gap", r.measured_gap},
                     {"holds", r.holds}};
  if (!r.norm.converged) j["converged"] = false;
}

LemmaReport verify_lemma(const AffinityMatrix& w, const AffinityMatrix& w_tilde,
                         const ConnectionBlocks& g, const ConnectionBlocks& g_tilde,
                         std::span<const double> f, BoundVariant variant) {
  LemmaReport r;
  r.variant = variant;
  const bool zero = variant == BoundVariant::ZeroDiag;
  r.params = measure_params(w, w_tilde, g, g_tilde, f, zero);
  r.bound = lemma_bound(r.params, variant);
  const OperatorMatrix l = assemble_cgl(w, g, false);
  const OperatorMatrix lt = assemble_cgl(w_tilde, g_tilde, zero, f);
  r.norm = operator_distance(l, lt);
  r.measured_gap = r.norm.value;
  r.holds = r.measured_gap <= r.bound + 1e-9;
  return r;
}

LemmaInstance random_lemma_instance(std::size_t n, std::size_t k, double eps, double eta,
                                    BoundVariant variant, std::uint64_t seed) {
  if (n < 2 || (k != 1 && k != 2)) throw Error(ErrorCode::InvalidArgument, "need n >= 2, k in {1,2}");
  auto rng = substream(seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const auto N = static_cast<Eigen::Index>(n);

  RowMatrix w(N, N), wt(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i; j < N; ++j) {
      const double a = unit(rng);
      const double b = std::max(0.0, a + eps * sym(rng));
      w(i, j) = w(j, i) = a;
      wt(i, j) = wt(j, i) = b;
    }
  }
  if (variant == BoundVariant::ZeroDiag) {
    for (Eigen::Index i = 0; i < N; ++i) wt(i, i) = 5.0 * unit(rng);
  }

  std::vector<double> f;
  if (variant == BoundVariant::Multiplicative) {
    const double s = 0.5 + 2.5 * unit(rng);
    wt *= s;
    f.resize(n);
    for (double& fi : f) fi = s * (1.0 + 0.25 * eps * sym(rng));
  }

  std::vector<double> gb(n * n * k * k, 0.0), gtb(n * n * k * k, 0.0);
  const double dmax = 2.0 * std::asin(std::min(1.0, eta / (2.0 * std::sqrt(2.0))));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double* a = gb.data() + (i * n + j) * k * k;
      double* at = gb.data() + (j * n + i) * k * k;
      double* b = gtb.data() + (i * n + j) * k * k;
      double* bt = gtb.data() + (j * n + i) * k * k;
      if (k == 1) {
        const double sgn = i == j ? 1.0 : (unit(rng) < 0.5 ? -1.0 : 1.0);
        a[0] = at[0] = b[0] = bt[0] = sgn;
        continue;
      }
      const double th = i == j ? 0.0 : 2.0 * std::numbers::pi * unit(rng);
      const double tt = i == j ? 0.0 : th + dmax * sym(rng);
      auto put = [](double* dst, double* dst_t, double angle) {
        const double c = std::cos(angle), s = std::sin(angle);
        dst[0] = c; dst[1] = -s; dst[2] = s; dst[3] = c;
        dst_t[0] = c; dst_t[1] = s; dst_t[2] = -s; dst_t[3] = c;
      };
      put(a, at, th);
      put(b, bt, tt);
    }
  }
  return {AffinityMatrix(std::move(w), 0.0), AffinityMatrix(std::move(wt), 0.0),
          ConnectionBlocks(n, k, std::move(gb)), ConnectionBlocks(n, k, std::move(gtb)),
          std::move(f)};
}

void to_json(nlohmann::json& j, const ConcentrationReport& r) {
  j = nlohmann::json{{"p", r.p},
                     {"n", r.n},
                     {"trials", r.trials},
                     {"trace_correction", r.trace_correction},
                     {"scale", r.scale},
                     {"trial_sup", r.trial_sup},
                     {"observed_sup", r.observed_sup},
                     {"ratio", r.ratio},
                     {"mean_deviation", r.mean_deviation}};
}

ConcentrationReport concentration_diagnostic(const NoiseSpec& spec, std::size_t p, std::size_t n,
                                             std::size_t trials) {
  spec.validate();
  if (spec.shape != NoiseShape::Isotropic) {
    throw Error(ErrorCode::InvalidSpec, "concentration diagnostic needs isotropic noise");
  }
  if (p < 2 || n < 2 || trials < 1) throw Error(ErrorCode::InvalidSpec, "need p >= 2, n >= 2, trials >= 1");

  ConcentrationReport rep;
  rep.p = p;
  rep.n = n;
  rep.trials = trials;
  rep.trace_correction = trace_correction(spec, p);
  const double var2 = 2.0 * spec.variance(p);   // S = 2 (c/p^alpha) I
  const double log_factor = std::log(static_cast<double>(p) * static_cast<double>(n * n));
  const double tr_s2 = static_cast<double>(p) * var2 * var2;
  rep.scale = std::sqrt(log_factor) * std::sqrt(tr_s2) + var2 * log_factor;

  const CircularCorrelator correlator(p);
  double total = 0.0;
  double count = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    NoiseSpec s = spec;
    s.seed = derive_seed(spec.seed, t);
    const NoiseSample noise = sample_noise(s, p, n);
    std::vector<std::complex<double>> spectra(n * correlator.spectrum_size());
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = noise.vectors.data() + i * p;
      correlator.forward(row, spectra.data() + i * correlator.spectrum_size());
      norms[i] = simd::dot({row, p}, {row, p});
    }
    double sup = 0.0;
    double sum = 0.0;
#pragma omp parallel reduction(max : sup) reduction(+ : sum)
    {
      std::vector<double> corr(p);
      std::vector<std::complex<double>> scratch(correlator.spectrum_size());
#pragma omp for schedule(dynamic, 2)
      for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i + 1; j < n; ++j) {
          correlator.correlate(spectra.data() + i * correlator.spectrum_size(),
                               spectra.data() + j * correlator.spectrum_size(), corr.data(),
                               scratch.data());
          for (std::size_t sh = 0; sh < p; ++sh) {
            const double dev = norms[i] + norms[j] - 2.0 * corr[sh] - rep.trace_correction;
            sup = std::max(sup, std::abs(dev));
            sum += dev;
          }
        }
      }
    }
    rep.trial_sup.push_back(sup);
    rep.observed_sup = std::max(rep.observed_sup, sup);
    total += sum;
    count += static_cast<double>(n * (n - 1) / 2 * p);
  }
  rep.ratio = rep.observed_sup / rep.scale;
  rep.mean_deviation = total / count;
  return rep;
}

}  // namespace cglkit
