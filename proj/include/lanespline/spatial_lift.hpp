#pragma once

// Image-to-BEV lifting on planar surface hypotheses.
//
// Every feature-map cell casts a ray from the camera. The ray meets each
// hypothesis plane z = y * tan(pitch) at most once; the resulting frustum
// points carry the cell feature, their height and the cell's depth
// probability for that plane. Points are then averaged per BEV cell.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lanespline/errors.hpp"
#include "lanespline/lane_model.hpp"
#include "lanespline/math.hpp"

namespace lanespline {

struct CameraModel {
  double fx = 400.0;
  double fy = 400.0;
  double cx = 240.0;
  double cy = 180.0;
  double height = 1.5;  // m above the ego origin
  double pitch = 0.0;   // rad, positive looks down
  int image_width = 480;
  int image_height = 360;

  Point3 center() const { return {0.0, 0.0, height}; }
  // Unit ray direction through pixel (u, v) in the ego frame.
  Point3 ray_direction(double u, double v) const;
  void validate() const;
};

struct SurfaceHypothesisSet {
  std::vector<double> pitch_deg;  // sorted, contains 0
};

// Plane sets for 1, 3, 5, 15 or 27 hypotheses.
SurfaceHypothesisSet hypothesis_planes(int n);

inline constexpr double kMaxRayDepth = 200.0;

std::optional<Point3> ray_plane_intersect(const Point3& origin, const Point3& direction,
                                          double plane_deg);
std::optional<Point3> ray_plane_intersect(const CameraModel& cam, double u, double v,
                                          double plane_deg);

// Dense row-major H x W x C array.
struct Tensor3 {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int r, int c, int ch, double fill = 0.0)
      : rows(r), cols(c), channels(ch), data(static_cast<std::size_t>(r) * c * ch, fill) {}

  double& at(int r, int c, int k) { return data[(static_cast<std::size_t>(r) * cols + c) * channels + k]; }
  double at(int r, int c, int k) const {
    return data[(static_cast<std::size_t>(r) * cols + c) * channels + k];
  }
  void check_shape() const;
};

// Image pixel at the center of feature cell (row, col).
std::pair<double, double> cell_pixel(const CameraModel& cam, int rows, int cols, int row, int col);

struct FrustumPoint {
  Point3 pos;
  double weight = 0.0;
  int row = 0;
  int col = 0;
  int hypothesis = 0;
};

struct FrustumCloud {
  int channels = 0;
  std::vector<FrustumPoint> points;
  std::vector<double> features;  // points.size() x channels

  std::span<const double> feature(std::size_t i) const {
    return {features.data() + i * channels, static_cast<std::size_t>(channels)};
  }
};

// depth_dist must sum to 1 over its channel axis (tolerance 1e-6). Planes a
// ray misses are dropped and that ray's remaining weights renormalized.
FrustumCloud lift_features(const Tensor3& featmap, const Tensor3& depth_dist,
                           const CameraModel& cam, const SurfaceHypothesisSet& planes);

struct BevGridConfig {
  BevRange range;
  int cells_x = 16;  // lateral
  int cells_y = 26;  // longitudinal

  int size() const { return cells_x * cells_y; }
  // Flat index of the cell containing (x, y) or -1 outside the range.
  int cell_of(double x, double y) const;
  Point3 cell_center(int u, int v) const;
  double cell_width() const { return (range.x_max - range.x_min) / cells_x; }
  double cell_depth() const { return (range.y_max - range.y_min) / cells_y; }
};

struct BevGrid {
  BevGridConfig config;
  int channels = 0;
  std::vector<double> features;  // cells x channels, weighted mean
  std::vector<double> z;         // weighted mean height
  std::vector<double> weight;    // accumulated weight
  std::vector<std::uint8_t> valid;
};

// Running weighted sums; splatting is add() followed by finalize().
class BevAccumulator {
 public:
  BevAccumulator(const BevGridConfig& cfg, int channels);
  void add(const FrustumCloud& cloud);
  void add_point(const Point3& pos, double weight, std::span<const double> feature);
  void merge(const BevAccumulator& other);
  BevGrid finalize() const;

 private:
  BevGridConfig cfg_;
  int channels_;
  std::vector<double> wf_, wz_, w_;
};

BevGrid splat_to_bev(const FrustumCloud& cloud, const BevGridConfig& cfg);

struct SurfaceTruth {
  std::vector<double> z;
  std::vector<std::uint8_t> mask;
};

inline constexpr double kDegenerateBand = 0.5;  // m

// Heights interpolated linearly over a Delaunay triangulation of all lane
// points; cells outside the x-y convex hull are masked out. Collinear input
// falls back to a band of kDegenerateBand around the lane polylines.
SurfaceTruth surface_gt_from_lanes(const std::vector<std::vector<Point3>>& lanes,
                                   const BevGridConfig& cfg);

double surface_loss(const BevGrid& bev, const SurfaceTruth& truth);

// Geometry of a lift that does not depend on the depth distribution; used to
// differentiate the surface loss with respect to depth logits.
struct LiftGeometry {
  int rays = 0;
  int hypotheses = 0;
  std::vector<std::uint8_t> hit;  // rays x hypotheses
  std::vector<int> cell;          // BEV cell or -1
  std::vector<double> z;
  BevGridConfig grid;
};

LiftGeometry lift_geometry(int rows, int cols, const CameraModel& cam,
                           const SurfaceHypothesisSet& planes, const BevGridConfig& grid);

// Surface loss of the BEV heights obtained from per-ray softmax(depth logits).
template <class T>
T surface_loss_from_logits(const LiftGeometry& g, std::span<const T> logits,
                           const SurfaceTruth& truth) {
  using std::exp;
  const int s = g.hypotheses;
  if (logits.size() != static_cast<std::size_t>(g.rays) * s)
    throw InvalidInput("depth logit count does not match lift geometry");
  std::vector<T> wz(g.grid.size(), T(0.0)), w(g.grid.size(), T(0.0));
  std::vector<T> prob(s);
  for (int r = 0; r < g.rays; ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * s;
    double mx = value_of(logits[base]);
    for (int k = 1; k < s; ++k) mx = std::max(mx, value_of(logits[base + k]));
    T total(0.0);
    for (int k = 0; k < s; ++k) {
      prob[k] = exp(logits[base + k] - mx);
      total += prob[k];
    }
    T hit_total(0.0);
    for (int k = 0; k < s; ++k)
      if (g.hit[base + k]) hit_total += prob[k] / total;
    if (!(value_of(hit_total) > 0.0)) continue;
    for (int k = 0; k < s; ++k) {
      const int c = g.cell[base + k];
      if (!g.hit[base + k] || c < 0) continue;
      const T wk = prob[k] / total / hit_total;
      w[c] += wk;
      wz[c] += wk * g.z[base + k];
    }
  }
  if (truth.z.size() != static_cast<std::size_t>(g.grid.size()))
    throw InvalidInput("surface truth shape does not match grid");
  T sum(0.0);
  for (int c = 0; c < g.grid.size(); ++c) {
    if (!truth.mask[c] || !(value_of(w[c]) > 0.0)) continue;
    using std::abs;
    sum += abs(wz[c] / w[c] - truth.z[c]);
  }
  return sum / static_cast<double>(g.grid.size());
}

}  // namespace lanespline
