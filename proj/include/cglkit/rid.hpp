#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cglkit/connection_graph.hpp"
#include "cglkit/types.hpp"

namespace cglkit {

/// Samples of a function on the circle at angles 2*pi*j/p. Polar images with
/// several radii store `rings` consecutive blocks of p samples; every ring is
/// rotated by the same shift.
class CircularImage {
 public:
  CircularImage() = default;
  /// Throws InvalidArgument unless p >= 2, samples are finite and the sample
  /// count is a multiple of `rings`.
  explicit CircularImage(std::vector<double> samples, std::size_t rings = 1);

  std::size_t p() const { return rings_ ? samples_.size() / rings_ : 0; }
  std::size_t rings() const { return rings_; }
  std::span<const double> samples() const { return samples_; }
  std::span<const double> ring(std::size_t r) const { return {samples_.data() + r * p(), p()}; }
  double squared_norm() const;

  bool operator==(const CircularImage& other) const = default;

 private:
  std::vector<double> samples_;
  std::size_t rings_ = 0;
};

struct RotationIndex {
  std::size_t s = 0;
  std::size_t p = 1;
  double angle() const;
};

struct RidResult {
  double distance_sq = 0.0;
  RotationIndex optimal_shift;
  /// d^2(s) for every shift, when requested.
  std::optional<std::vector<double>> profile;
};

/// out[j] = img[(j - s) mod p], ring by ring.
CircularImage rotate(const CircularImage& img, std::size_t s);

/// min over s of |a - rotate(b, s)|^2, smallest minimising shift. The
/// search runs on an FFT correlation; near-maximal shifts are then
/// re-evaluated directly so the returned distance is the exact sum at the
/// chosen shift. Symmetric: rid(a,b) and rid(b,a) give identical distances.
RidResult rid(const CircularImage& a, const CircularImage& b, bool with_profile = false);

/// O(p^2) reference: evaluates every shift directly.
RidResult rid_direct(const CircularImage& a, const CircularImage& b, bool with_profile = false);

/// p x p permutation matrix P with (P x)[j] = x[(j - s) mod p].
RowMatrix rotation_permutation(std::size_t s, std::size_t p);

struct CircularImageSet {
  std::vector<CircularImage> images;
  /// Optional ground truth (empty when unknown).
  std::vector<std::size_t> class_id;
  std::vector<std::size_t> true_shift;
  std::vector<CircularImage> templates;

  std::size_t n() const { return images.size(); }
  std::size_t p() const { return images.empty() ? 0 : images.front().p(); }
  /// Images as rows of an n x (rings*p) matrix.
  RowMatrix as_matrix() const;
};

/// Builds a set from matrix rows (rings = 1), keeping ground truth from `like`.
CircularImageSet image_set_from_rows(const RowMatrix& rows, const CircularImageSet& like = {});

struct RidGraph {
  AffinityMatrix w;
  ConnectionBlocks g;
  double bandwidth = 0.0;
  BandwidthStat stat = BandwidthStat::SquaredDistance;
  /// Squared RID for every pair (zero diagonal).
  RowMatrix distance_sq;
  /// shift(i,j) = optimal shift aligning image j to image i; p = period.
  std::vector<std::size_t> shift;
  std::size_t p = 0;

  std::size_t shift_at(std::size_t i, std::size_t j) const { return shift[i * w.n() + j]; }
};

/// Pairwise RID table only (distance_sq, shift); no kernel.
struct RidTable {
  RowMatrix distance_sq;
  std::vector<std::size_t> shift;
  std::size_t p = 0;
};
RidTable pairwise_rid(const std::vector<CircularImage>& images);

/// Gaussian kernel on squared RID with the bandwidth taken as the given
/// quantile of the strictly positive pairwise values (of d or d^2 depending
/// on `stat`); connections are the 2x2 rotations of the optimal shifts.
RidGraph build_connection_graph(const std::vector<CircularImage>& images, double bandwidth_quantile,
                                BandwidthStat stat = BandwidthStat::SquaredDistance);

/// CSV with one image per row: p sample columns (`x0..`), then optional
/// `class_id` and `true_shift` columns; first line is a `#` header naming
/// the columns. Multi-ring images are not serialised.
void write_images_csv(std::ostream& out, const CircularImageSet& set);
void write_images_csv(const std::string& path, const CircularImageSet& set);
CircularImageSet read_images_csv(std::istream& in);
CircularImageSet read_images_csv(const std::string& path);

}  // namespace cglkit
