#include "cglkit/rid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "cglkit/correlation.hpp"
#include "cglkit/error.hpp"
#include "cglkit/matrix_io.hpp"
#include "cglkit/simd/kernels.hpp"

namespace cglkit {

CircularImage::CircularImage(std::vector<double> samples, std::size_t rings)
    : samples_(std::move(samples)), rings_(rings) {
  if (rings_ == 0 || samples_.size() % rings_ != 0 || samples_.size() / rings_ < 2) {
    throw Error(ErrorCode::InvalidArgument, "circular image needs p >= 2 samples per ring");
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "image samples must be finite");
  }
}

double CircularImage::squared_norm() const { return simd::dot(samples_, samples_); }

double RotationIndex::angle() const {
  return 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(p);
}

CircularImage rotate(const CircularImage& img, std::size_t s) {
  const std::size_t p = img.p();
  s %= p;
  std::vector<double> out(img.samples().size());
  for (std::size_t r = 0; r < img.rings(); ++r) {
    const auto in = img.ring(r);
    double* dst = out.data() + r * p;
    for (std::size_t j = 0; j < p; ++j) dst[j] = in[(j + p - s) % p];
  }
  return CircularImage(std::move(out), img.rings());
}

RowMatrix rotation_permutation(std::size_t s, std::size_t p) {
  if (p == 0 || s >= p) {
    throw Error(ErrorCode::IndexOutOfRange, "rotation index must satisfy 0 <= s < p");
  }
  RowMatrix m = RowMatrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>((j + p - s) % p)) = 1.0;
  }
  return m;
}

namespace {

void check_pair(const CircularImage& a, const CircularImage& b) {
  if (a.p() != b.p() || a.rings() != b.rings()) {
    throw Error(ErrorCode::DimensionMismatch, "images differ in p or ring count");
  }
  if (a.p() == 0) throw Error(ErrorCode::InvalidArgument, "empty image");
}

double exact_distance(const CircularImage& x, const CircularImage& y, std::size_t s) {
  double acc = 0.0;
  for (std::size_t r = 0; r < x.rings(); ++r) {
    acc += simd::shifted_squared_distance(x.ring(r), y.ring(r), s);
  }
  return acc;
}

// Precomputed half spectra of every ring of every image.
class SpectrumCache {
 public:
  SpectrumCache(const CircularCorrelator& corr, const std::vector<const CircularImage*>& imgs)
      : m_(corr.spectrum_size()), rings_(imgs.empty() ? 0 : imgs.front()->rings()) {
    data_.resize(imgs.size() * rings_ * m_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(imgs.size()); ++i) {
      for (std::size_t r = 0; r < rings_; ++r) {
        corr.forward(imgs[static_cast<std::size_t>(i)]->ring(r).data(),
                     at(static_cast<std::size_t>(i), r));
      }
    }
  }
  const std::complex<double>* at(std::size_t i, std::size_t r) const {
    return data_.data() + (i * rings_ + r) * m_;
  }

 private:
  std::complex<double>* at(std::size_t i, std::size_t r) {
    return data_.data() + (i * rings_ + r) * m_;
  }
  std::size_t m_;
  std::size_t rings_;
  std::vector<std::complex<double>> data_;
};

struct Workspace {
  std::vector<double> corr;
  std::vector<std::complex<double>> scratch;
  explicit Workspace(const CircularCorrelator& c) : corr(c.p()), scratch(c.spectrum_size()) {}
};

// Shared core of rid(): a and b with their spectra (index into `cache`).
// Computes in a canonical orientation (lexicographically smaller image
// first) so that swapping the arguments reproduces the same sums.
RidResult rid_core(const CircularImage& a, std::size_t ia, const CircularImage& b, std::size_t ib,
                   const CircularCorrelator& correlator, const SpectrumCache& cache, Workspace& ws,
                   bool with_profile) {
  const std::size_t p = a.p();
  const bool swap = std::lexicographical_compare(b.samples().begin(), b.samples().end(),
                                                 a.samples().begin(), a.samples().end());
  const CircularImage& x = swap ? b : a;
  const CircularImage& y = swap ? a : b;
  const std::size_t ix = swap ? ib : ia;
  const std::size_t iy = swap ? ia : ib;

  std::fill(ws.scratch.begin(), ws.scratch.end(), std::complex<double>(0.0, 0.0));
  for (std::size_t r = 0; r < x.rings(); ++r) {
    correlator.accumulate(cache.at(ix, r), cache.at(iy, r), ws.scratch.data());
  }
  correlator.finish(ws.scratch.data(), ws.corr.data());

  const double cmax = *std::max_element(ws.corr.begin(), ws.corr.end());
  const double tol = 1e-9 * (x.squared_norm() + y.squared_norm()) + 1e-300;

  // Exact evaluation over the near-maximal correlations, in canonical shifts.
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ties;
  for (std::size_t t = 0; t < p; ++t) {
    if (ws.corr[t] < cmax - tol) continue;
    const double e = exact_distance(x, y, t);
    if (e < best) {
      best = e;
      ties.assign(1, t);
    } else if (e == best) {
      ties.push_back(t);
    }
  }
  // |b - rot(a,t)| = |a - rot(b, p - t)|.
  auto to_original = [&](std::size_t t) { return swap ? (p - t) % p : t; };
  std::size_t s_best = p;
  for (std::size_t t : ties) s_best = std::min(s_best, to_original(t));

  RidResult res;
  res.distance_sq = best;
  res.optimal_shift = {s_best, p};
  if (with_profile) {
    std::vector<double> prof(p);
    for (std::size_t t = 0; t < p; ++t) prof[to_original(t)] = exact_distance(x, y, t);
    res.profile = std::move(prof);
  }
  return res;
}

}  // namespace

RidResult rid(const CircularImage& a, const CircularImage& b, bool with_profile) {
  check_pair(a, b);
  const CircularCorrelator correlator(a.p());
  const SpectrumCache cache(correlator, {&a, &b});
  Workspace ws(correlator);
  return rid_core(a, 0, b, 1, correlator, cache, ws, with_profile);
}

RidResult rid_direct(const CircularImage& a, const CircularImage& b, bool with_profile) {
  check_pair(a, b);
  const std::size_t p = a.p();
  std::vector<double> prof(p);
  for (std::size_t s = 0; s < p; ++s) {
    double acc = 0.0;
    for (std::size_t r = 0; r < a.rings(); ++r) {
      const auto ar = a.ring(r);
      const auto br = b.ring(r);
      for (std::size_t j = 0; j < p; ++j) {
        const double d = ar[j] - br[(j + p - s) % p];
        acc += d * d;
      }
    }
    prof[s] = acc;
  }
  const auto it = std::min_element(prof.begin(), prof.end());
  RidResult res;
  res.distance_sq = *it;
  res.optimal_shift = {static_cast<std::size_t>(it - prof.begin()), p};
  if (with_profile) res.profile = std::move(prof);
  return res;
}

RidTable pairwise_rid(const std::vector<CircularImage>& images) {
  const std::size_t n = images.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty image set");
  for (const auto& img : images) check_pair(images.front(), img);
  const std::size_t p = images.front().p();

  const CircularCorrelator correlator(p);
  std::vector<const CircularImage*> ptrs;
  ptrs.reserve(n);
  for (const auto& img : images) ptrs.push_back(&img);
  const SpectrumCache cache(correlator, ptrs);

  RidTable out;
  out.p = p;
  out.distance_sq = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.shift.assign(n * n, 0);
#pragma omp parallel
  {
    Workspace ws(correlator);
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      for (std::size_t j = i + 1; j < n; ++j) {
        const RidResult r = rid_core(images[i], i, images[j], j, correlator, cache, ws, false);
        out.distance_sq(ii, static_cast<Eigen::Index>(j)) = r.distance_sq;
        out.distance_sq(static_cast<Eigen::Index>(j), ii) = r.distance_sq;
        out.shift[i * n + j] = r.optimal_shift.s;
        out.shift[j * n + i] = (p - r.optimal_shift.s) % p;
      }
    }
  }
  return out;
}

RidGraph build_connection_graph(const std::vector<CircularImage>& images, double bandwidth_quantile,
                                BandwidthStat stat) {
  if (images.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two images");
  RidTable table = pairwise_rid(images);
  const std::size_t n = images.size();
  const double m = kernel_bandwidth(table.distance_sq, bandwidth_quantile, stat, true);

  RowMatrix angles = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double th = RotationIndex{table.shift[i * n + j], table.p}.angle();
      angles(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = th;
      angles(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = -th;
    }
  }
  RidGraph g{gaussian_affinity(table.distance_sq, m), ConnectionBlocks::from_angles(angles), m,
             stat, std::move(table.distance_sq), std::move(table.shift), table.p};
  return g;
}

RowMatrix CircularImageSet::as_matrix() const {
  if (images.empty()) return {};
  const auto cols = static_cast<Eigen::Index>(images.front().samples().size());
  RowMatrix m(static_cast<Eigen::Index>(images.size()), cols);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto s = images[i].samples();
    if (static_cast<Eigen::Index>(s.size()) != cols) {
      throw Error(ErrorCode::DimensionMismatch, "images differ in size");
    }
    std::copy(s.begin(), s.end(), m.row(static_cast<Eigen::Index>(i)).begin());
  }
  return m;
}

CircularImageSet image_set_from_rows(const RowMatrix& rows, const CircularImageSet& like) {
  CircularImageSet out;
  out.images.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out.images.emplace_back(std::vector<double>(rows.row(i).begin(), rows.row(i).end()));
  }
  out.class_id = like.class_id;
  out.true_shift = like.true_shift;
  out.templates = like.templates;
  return out;
}

void write_images_csv(std::ostream& out, const CircularImageSet& set) {
  const std::size_t p = set.p();
  const bool cls = !set.class_id.empty();
  const bool sh = !set.true_shift.empty();
  out << "# ";
  for (std::size_t j = 0; j < p; ++j) out << (j ? "," : "") << 'x' << j;
  if (cls) out << ",class_id";
  if (sh) out << ",true_shift";
  out << '\n';
  for (std::size_t i = 0; i < set.n(); ++i) {
    if (set.images[i].rings() != 1) {
      throw Error(ErrorCode::InvalidArgument, "multi-ring images cannot be written to CSV");
    }
    const auto s = set.images[i].samples();
    for (std::size_t j = 0; j < s.size(); ++j) out << (j ? "," : "") << format_double(s[j]);
    if (cls) out << ',' << set.class_id[i];
    if (sh) out << ',' << set.true_shift[i];
    out << '\n';
  }
}

void write_images_csv(const std::string& path, const CircularImageSet& set) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_images_csv(f, set);
}

CircularImageSet read_images_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw Error(ErrorCode::Io, "image CSV must start with a '#' header line");
  }
  std::vector<std::string> names;
  {
    std::stringstream ss(line.substr(1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok.erase(0, tok.find_first_not_of(" \t"));
      tok.erase(tok.find_last_not_of(" \t\r") + 1);
      names.push_back(tok);
    }
  }
  std::ptrdiff_t cls_col = -1;
  std::ptrdiff_t shift_col = -1;
  std::size_t p = 0;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c] == "class_id") {
      cls_col = static_cast<std::ptrdiff_t>(c);
    } else if (names[c] == "true_shift") {
      shift_col = static_cast<std::ptrdiff_t>(c);
    } else {
      if (cls_col >= 0 || shift_col >= 0) {
        throw Error(ErrorCode::Io, "sample columns must precede class_id/true_shift");
      }
      ++p;
    }
  }
  CircularImageSet set;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
      } catch (const std::exception&) {
        throw Error(ErrorCode::Io, "bad number '" + tok + "' on data row " + std::to_string(row));
      }
    }
    if (vals.size() != names.size()) {
      throw Error(ErrorCode::Io, "data row " + std::to_string(row) + " has " +
                                     std::to_string(vals.size()) + " fields, expected " +
                                     std::to_string(names.size()));
    }
    set.images.emplace_back(std::vector<double>(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(p)));
    if (cls_col >= 0) set.class_id.push_back(static_cast<std::size_t>(vals[static_cast<std::size_t>(cls_col)]));
    if (shift_col >= 0) set.true_shift.push_back(static_cast<std::size_t>(vals[static_cast<std::size_t>(shift_col)]));
    ++row;
  }
  return set;
}

CircularImageSet read_images_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_images_csv(f);
}

}  // namespace cglkit
