#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cglkit/rid.hpp"
#include "cglkit/types.hpp"

namespace cglkit {

struct EmbeddedPointCloud {
  RowMatrix points;            // n x p
  std::vector<double> params;  // curve parameter t_i
  std::size_t n() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(points.cols()); }
};

/// Twisted bell-shaped closed curve in the first three of p coordinates.
std::vector<double> bell_curve_point(double t, std::size_t p);
/// t_i uniform on [0, 2pi). Throws InvalidDims if p < 3.
EmbeddedPointCloud bell_curve(std::size_t n, std::size_t p, std::uint64_t seed);

std::vector<double> trefoil_point(double t);
/// p = 3. Throws InvalidDims if n < 3.
EmbeddedPointCloud trefoil(std::size_t n, std::uint64_t seed);

/// Unit circle in R^2 with uniform angles.
EmbeddedPointCloud circle(std::size_t n, std::uint64_t seed);

struct SurrogateImageSet : CircularImageSet {
  double sigma = 0.0;             // population std of all template pixels
  double min_template_distance = 0.0;   // smallest cross-template RID distance
  std::size_t attempts = 1;
};

inline constexpr std::size_t kTemplateBand = 8;
inline constexpr double kTemplateSeparation = 0.05;
inline constexpr std::size_t kMaxTemplateRetries = 100;

/// n_K unit-norm band-limited templates, each rotated n_R times by uniform
/// shifts; images are grouped by class (image i has class i / n_R). Templates
/// are redrawn until every cross-template RID distance is at least 0.05.
SurrogateImageSet surrogate_images(std::size_t n_k, std::size_t n_r, std::size_t p,
                                   std::uint64_t seed);

/// Columns x0..x(p-1), t, norm.
void write_point_cloud_csv(std::ostream& out, const EmbeddedPointCloud& cloud);
void write_point_cloud_csv(const std::string& path, const EmbeddedPointCloud& cloud);
RowMatrix read_point_cloud_csv(const std::string& path);

}  // namespace cglkit
