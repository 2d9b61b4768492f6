#include "cglkit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "cglkit/error.hpp"

namespace cglkit {

double RankCdf::cdf(std::size_t r) const {
  if (ranks.empty()) return 0.0;
  const auto it = std::upper_bound(ranks.begin(), ranks.end(), r);
  return static_cast<double>(it - ranks.begin()) / static_cast<double>(ranks.size());
}

std::vector<std::pair<std::size_t, double>> RankCdf::table() const {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(max_rank);
  for (std::size_t r = 1; r <= max_rank; ++r) out.emplace_back(r, cdf(r));
  return out;
}

RankCdf nn_rank_cdf(const RowMatrix& noisy, const RowMatrix& clean, std::size_t k_nn) {
  if (noisy.rows() != noisy.cols() || clean.rows() != clean.cols() || noisy.rows() != clean.rows()) {
    throw Error(ErrorCode::MetricMismatch, "metrics must be square and share the index set");
  }
  const auto n = static_cast<std::size_t>(noisy.rows());
  if (k_nn < 1 || k_nn >= n) {
    throw Error(ErrorCode::InvalidK, "k_nn must satisfy 1 <= k_nn < n");
  }
  RankCdf out;
  out.max_rank = n - 1;
  out.ranks.resize(n * k_nn);
#pragma omp parallel
  {
    std::vector<std::size_t> idx(n - 1);
    std::vector<std::size_t> rank_of(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      auto fill = [&] {
        std::size_t t = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) idx[t++] = j;
        }
      };
      fill();
      const auto nrow = noisy.row(ii);
      std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_nn), idx.end(),
                        [&](std::size_t a, std::size_t b) {
                          return nrow(static_cast<Eigen::Index>(a)) < nrow(static_cast<Eigen::Index>(b)) ||
                                 (nrow(static_cast<Eigen::Index>(a)) == nrow(static_cast<Eigen::Index>(b)) && a < b);
                        });
      const std::vector<std::size_t> nb(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_nn));
      fill();
      const auto crow = clean.row(ii);
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return crow(static_cast<Eigen::Index>(a)) < crow(static_cast<Eigen::Index>(b)) ||
               (crow(static_cast<Eigen::Index>(a)) == crow(static_cast<Eigen::Index>(b)) && a < b);
      });
      for (std::size_t t = 0; t < idx.size(); ++t) rank_of[idx[t]] = t + 1;
      for (std::size_t t = 0; t < k_nn; ++t) out.ranks[i * k_nn + t] = rank_of[nb[t]];
    }
  }
  std::sort(out.ranks.begin(), out.ranks.end());
  return out;
}

AlignmentSummary alignment_summary(std::span<const double> z, std::span<const std::size_t> class_id) {
  if (z.size() != class_id.size()) {
    throw Error(ErrorCode::DimensionMismatch, "angles and class labels differ in length");
  }
  if (z.empty()) throw Error(ErrorCode::EmptyClass, "no entries to summarise");
  const std::size_t nk = *std::max_element(class_id.begin(), class_id.end()) + 1;
  std::vector<double> cs(nk, 0.0), sn(nk, 0.0);
  std::vector<std::size_t> count(nk, 0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    cs[class_id[i]] += std::cos(z[i]);
    sn[class_id[i]] += std::sin(z[i]);
    ++count[class_id[i]];
  }
  AlignmentSummary s;
  for (std::size_t c = 0; c < nk; ++c) {
    if (count[c] == 0) throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c) + " is empty", c);
    const double mc = cs[c] / static_cast<double>(count[c]);
    const double ms = sn[c] / static_cast<double>(count[c]);
    const double r = std::min(1.0, std::hypot(mc, ms));
    s.per_class_mean.push_back(std::atan2(ms, mc));
    s.per_class_spread.push_back(r > 0.0 ? std::sqrt(-2.0 * std::log(r))
                                         : std::numeric_limits<double>::infinity());
  }
  std::size_t close = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = std::remainder(z[i] - s.per_class_mean[class_id[i]], 2.0 * std::numbers::pi);
    if (std::abs(d) < kConsistencyRadius) ++close;
  }
  s.global_consistency = static_cast<double>(close) / static_cast<double>(z.size());
  return s;
}

EigenDecayReport eigen_decay_report(std::span<const double> eigenvalues, double d) {
  if (eigenvalues.empty()) throw Error(ErrorCode::InvalidArgument, "no eigenvalues");
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "intrinsic dimension must be positive");
  std::vector<double> mags(eigenvalues.size());
  std::transform(eigenvalues.begin(), eigenvalues.end(), mags.begin(), [](double v) { return std::abs(v); });
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const std::size_t last = std::min<std::size_t>(20, mags.size());
  std::vector<double> xs, ys;
  for (std::size_t l = 2; l <= last; ++l) {
    const double v = mags[l - 1];
    if (!(v > 0.0)) continue;
    xs.push_back(std::pow(static_cast<double>(l), 2.0 / d));
    ys.push_back(std::log(v));
  }
  EigenDecayReport rep;
  rep.count = xs.size();
  if (xs.size() < 2) return rep;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (rep.intercept + rep.slope * xs[i]);
    sse += e * e;
  }
  rep.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return rep;
}

EigenDecayReport eigen_decay_report(const SpectralDecomposition& dec, double d) {
  return eigen_decay_report(std::span<const double>(dec.eigenvalues.data(), dec.size()), d);
}

}  // namespace cglkit
