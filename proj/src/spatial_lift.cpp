#include "lanespline/spatial_lift.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace lanespline {

Point3 CameraModel::ray_direction(double u, double v) const {
  const double a = (u - cx) / fx;
  const double b = (v - cy) / fy;
  const double c = std::cos(pitch), s = std::sin(pitch);
  // right = (1,0,0), image-down = (0,-s,-c), forward = (0,c,-s)
  const Point3 d{a, c - b * s, -s - b * c};
  return d / norm(d);
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidConfiguration("focal lengths must be positive");
  if (image_width <= 0 || image_height <= 0) throw InvalidConfiguration("image size must be positive");
}

SurfaceHypothesisSet hypothesis_planes(int n) {
  switch (n) {
    case 1:
      return {{0.0}};
    case 3:
      return {{-2.0, 0.0, 2.0}};
    case 5:
      return {{-2.0, -1.0, 0.0, 1.0, 2.0}};
    case 15:
      return {{-5.0, -2.0, -1.7, -1.3, -1.0, -0.7, -0.3, 0.0, 0.3, 0.7, 1.0, 1.3, 1.7, 2.0, 5.0}};
    case 27:
      return {{-10.0, -8.5, -7.0, -5.8, -4.5, -3.3, -2.0, -1.7, -1.4, -1.0, -0.8, -0.6, -0.3, 0.0,
               0.3, 0.6, 0.8, 1.0, 1.4, 1.7, 2.0, 3.3, 4.5, 5.8, 7.0, 8.5, 10.0}};
    default:
      throw InvalidConfiguration("unsupported surface hypothesis count " + std::to_string(n));
  }
}

std::optional<Point3> ray_plane_intersect(const Point3& origin, const Point3& direction,
                                          double plane_deg) {
  // origin + s*d on z = y*tan(a):  (o_z + s d_z) = (o_y + s d_y) tan(a)
  const double ta = std::tan(deg2rad(plane_deg));
  const double denom = direction.y * ta - direction.z;
  const double num = origin.z - origin.y * ta;
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double s = num / denom;
  if (!(s > 0.0)) return std::nullopt;
  const Point3 p = origin + direction * s;
  if (!(p.y > 0.0) || p.y > kMaxRayDepth) return std::nullopt;
  return p;
}

std::optional<Point3> ray_plane_intersect(const CameraModel& cam, double u, double v,
                                          double plane_deg) {
  return ray_plane_intersect(cam.center(), cam.ray_direction(u, v), plane_deg);
}

void Tensor3::check_shape() const {
  if (rows <= 0 || cols <= 0 || channels <= 0)
    throw InvalidInput("tensor dimensions must be positive");
  if (data.size() != static_cast<std::size_t>(rows) * cols * channels)
    throw InvalidInput("tensor data does not match its shape");
}

std::pair<double, double> cell_pixel(const CameraModel& cam, int rows, int cols, int row, int col) {
  return {(col + 0.5) * cam.image_width / cols, (row + 0.5) * cam.image_height / rows};
}

FrustumCloud lift_features(const Tensor3& featmap, const Tensor3& depth_dist,
                           const CameraModel& cam, const SurfaceHypothesisSet& planes) {
  featmap.check_shape();
  depth_dist.check_shape();
  cam.validate();
  if (featmap.rows != depth_dist.rows || featmap.cols != depth_dist.cols)
    throw InvalidInput("feature map and depth distribution differ in H x W");
  const int s = static_cast<int>(planes.pitch_deg.size());
  if (depth_dist.channels != s)
    throw InvalidInput("depth distribution channels must equal the hypothesis count");

  FrustumCloud cloud;
  cloud.channels = featmap.channels;
  std::vector<std::optional<Point3>> hits(s);
  for (int r = 0; r < featmap.rows; ++r) {
    for (int c = 0; c < featmap.cols; ++c) {
      double total = 0.0;
      for (int k = 0; k < s; ++k) total += depth_dist.at(r, c, k);
      if (std::abs(total - 1.0) > 1e-6)
        throw InvalidInput("depth distribution is not normalized at cell (" + std::to_string(r) +
                           ", " + std::to_string(c) + ")");
      const auto [u, v] = cell_pixel(cam, featmap.rows, featmap.cols, r, c);
      double kept = 0.0;
      for (int k = 0; k < s; ++k) {
        hits[k] = ray_plane_intersect(cam, u, v, planes.pitch_deg[k]);
        if (hits[k]) kept += depth_dist.at(r, c, k);
      }
      if (!(kept > 0.0)) continue;
      for (int k = 0; k < s; ++k) {
        if (!hits[k]) continue;
        cloud.points.push_back({*hits[k], depth_dist.at(r, c, k) / kept, r, c, k});
        for (int ch = 0; ch < featmap.channels; ++ch) cloud.features.push_back(featmap.at(r, c, ch));
      }
    }
  }
  return cloud;
}

int BevGridConfig::cell_of(double x, double y) const {
  if (!(x >= range.x_min && x <= range.x_max && y >= range.y_min && y <= range.y_max)) return -1;
  const int u = std::min(cells_x - 1, static_cast<int>((x - range.x_min) / cell_width()));
  const int v = std::min(cells_y - 1, static_cast<int>((y - range.y_min) / cell_depth()));
  return v * cells_x + u;
}

Point3 BevGridConfig::cell_center(int u, int v) const {
  return {range.x_min + (u + 0.5) * cell_width(), range.y_min + (v + 0.5) * cell_depth(), 0.0};
}

BevAccumulator::BevAccumulator(const BevGridConfig& cfg, int channels)
    : cfg_(cfg),
      channels_(channels),
      wf_(static_cast<std::size_t>(cfg.size()) * channels, 0.0),
      wz_(cfg.size(), 0.0),
      w_(cfg.size(), 0.0) {}

void BevAccumulator::add_point(const Point3& pos, double weight, std::span<const double> feature) {
  const int c = cfg_.cell_of(pos.x, pos.y);
  if (c < 0) return;
  w_[c] += weight;
  wz_[c] += weight * pos.z;
  for (int k = 0; k < channels_; ++k) wf_[static_cast<std::size_t>(c) * channels_ + k] += weight * feature[k];
}

void BevAccumulator::add(const FrustumCloud& cloud) {
  if (cloud.channels != channels_) throw InvalidInput("cloud channel count mismatch");
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    add_point(cloud.points[i].pos, cloud.points[i].weight, cloud.feature(i));
}

void BevAccumulator::merge(const BevAccumulator& other) {
  if (other.channels_ != channels_ || other.w_.size() != w_.size())
    throw InvalidInput("cannot merge accumulators of different shape");
  for (std::size_t i = 0; i < w_.size(); ++i) {
    w_[i] += other.w_[i];
    wz_[i] += other.wz_[i];
  }
  for (std::size_t i = 0; i < wf_.size(); ++i) wf_[i] += other.wf_[i];
}

BevGrid BevAccumulator::finalize() const {
  BevGrid g;
  g.config = cfg_;
  g.channels = channels_;
  g.features.assign(wf_.size(), 0.0);
  g.z.assign(w_.size(), 0.0);
  g.weight = w_;
  g.valid.assign(w_.size(), 0);
  for (std::size_t c = 0; c < w_.size(); ++c) {
    if (!(w_[c] > 0.0)) continue;
    g.valid[c] = 1;
    g.z[c] = wz_[c] / w_[c];
    for (int k = 0; k < channels_; ++k) g.features[c * channels_ + k] = wf_[c * channels_ + k] / w_[c];
  }
  return g;
}

BevGrid splat_to_bev(const FrustumCloud& cloud, const BevGridConfig& cfg) {
  BevAccumulator acc(cfg, cloud.channels);
  acc.add(cloud);
  return acc.finalize();
}

namespace {

struct Tri {
  std::array<int, 3> v;
  double cx, cy, r2;  // circumcircle
};

bool circumcircle(const std::vector<Point3>& p, Tri& t) {
  const Point3 &a = p[t.v[0]], &b = p[t.v[1]], &c = p[t.v[2]];
  const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
  if (std::abs(d) < 1e-14) return false;
  const double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
  t.cx = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
  t.cy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
  t.r2 = (a.x - t.cx) * (a.x - t.cx) + (a.y - t.cy) * (a.y - t.cy);
  return true;
}

// Bowyer-Watson triangulation of the x-y coordinates of pts.
std::vector<std::array<int, 3>> delaunay(std::vector<Point3> pts) {
  const int n = static_cast<int>(pts.size());
  double xmin = pts[0].x, xmax = xmin, ymin = pts[0].y, ymax = ymin;
  for (const auto& q : pts) {
    xmin = std::min(xmin, q.x);
    xmax = std::max(xmax, q.x);
    ymin = std::min(ymin, q.y);
    ymax = std::max(ymax, q.y);
  }
  const double span = std::max(xmax - xmin, ymax - ymin) + 1.0;
  const double mx = 0.5 * (xmin + xmax), my = 0.5 * (ymin + ymax);
  pts.push_back({mx - 40 * span, my - 30 * span, 0});
  pts.push_back({mx + 40 * span, my - 30 * span, 0});
  pts.push_back({mx, my + 40 * span, 0});

  std::vector<Tri> tris;
  Tri super{{n, n + 1, n + 2}, 0, 0, 0};
  circumcircle(pts, super);
  tris.push_back(super);

  for (int i = 0; i < n; ++i) {
    const Point3& p = pts[i];
    std::vector<std::array<int, 2>> edges;
    std::vector<Tri> keep;
    keep.reserve(tris.size());
    for (const Tri& t : tris) {
      const double dx = p.x - t.cx, dy = p.y - t.cy;
      if (dx * dx + dy * dy <= t.r2 * (1.0 + 1e-12)) {
        edges.push_back({t.v[0], t.v[1]});
        edges.push_back({t.v[1], t.v[2]});
        edges.push_back({t.v[2], t.v[0]});
      } else {
        keep.push_back(t);
      }
    }
    // Boundary of the cavity: edges that appear exactly once.
    for (std::size_t a = 0; a < edges.size(); ++a) {
      bool shared = false;
      for (std::size_t b = 0; b < edges.size(); ++b) {
        if (a == b) continue;
        if ((edges[a][0] == edges[b][0] && edges[a][1] == edges[b][1]) ||
            (edges[a][0] == edges[b][1] && edges[a][1] == edges[b][0])) {
          shared = true;
          break;
        }
      }
      if (shared) continue;
      Tri t{{edges[a][0], edges[a][1], i}, 0, 0, 0};
      if (circumcircle(pts, t)) keep.push_back(t);
    }
    tris = std::move(keep);
  }
  std::vector<std::array<int, 3>> out;
  for (const Tri& t : tris)
    if (t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back(t.v);
  return out;
}

bool collinear(const std::vector<Point3>& pts) {
  if (pts.size() < 3) return true;
  std::size_t far = 0;
  double best = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = std::hypot(pts[i].x - pts[0].x, pts[i].y - pts[0].y);
    if (d > best) {
      best = d;
      far = i;
    }
  }
  if (best < 1e-9) return true;
  const double ux = (pts[far].x - pts[0].x) / best, uy = (pts[far].y - pts[0].y) / best;
  for (const auto& q : pts) {
    const double off = (q.x - pts[0].x) * uy - (q.y - pts[0].y) * ux;
    if (std::abs(off) > 1e-6) return false;
  }
  return true;
}

}  // namespace

SurfaceTruth surface_gt_from_lanes(const std::vector<std::vector<Point3>>& lanes,
                                   const BevGridConfig& cfg) {
  std::vector<Point3> pts;
  bool any = false;
  for (const auto& lane : lanes) {
    if (lane.size() >= 2) any = true;
    for (const auto& p : lane) {
      const bool dup = std::any_of(pts.begin(), pts.end(), [&](const Point3& q) {
        return std::abs(q.x - p.x) < 1e-9 && std::abs(q.y - p.y) < 1e-9;
      });
      if (!dup) pts.push_back(p);
    }
  }
  if (!any) throw InvalidInput("surface ground truth needs a lane with at least two points");

  SurfaceTruth out;
  out.z.assign(cfg.size(), 0.0);
  out.mask.assign(cfg.size(), 0);

  if (collinear(pts)) {
    for (int v = 0; v < cfg.cells_y; ++v) {
      for (int u = 0; u < cfg.cells_x; ++u) {
        const Point3 c = cfg.cell_center(u, v);
        double best = std::numeric_limits<double>::infinity(), zbest = 0.0;
        for (const auto& lane : lanes) {
          for (std::size_t i = 1; i < lane.size(); ++i) {
            const Point3 &a = lane[i - 1], &b = lane[i];
            const double ex = b.x - a.x, ey = b.y - a.y;
            const double len2 = ex * ex + ey * ey;
            const double s = len2 > 0 ? std::clamp(((c.x - a.x) * ex + (c.y - a.y) * ey) / len2, 0.0, 1.0) : 0.0;
            const double d = std::hypot(a.x + s * ex - c.x, a.y + s * ey - c.y);
            if (d < best) {
              best = d;
              zbest = a.z + s * (b.z - a.z);
            }
          }
        }
        if (best <= kDegenerateBand) {
          out.mask[v * cfg.cells_x + u] = 1;
          out.z[v * cfg.cells_x + u] = zbest;
        }
      }
    }
    return out;
  }

  const auto tris = delaunay(pts);
  for (int v = 0; v < cfg.cells_y; ++v) {
    for (int u = 0; u < cfg.cells_x; ++u) {
      const Point3 c = cfg.cell_center(u, v);
      for (const auto& t : tris) {
        const Point3 &a = pts[t[0]], &b = pts[t[1]], &d = pts[t[2]];
        const double det = (b.y - d.y) * (a.x - d.x) + (d.x - b.x) * (a.y - d.y);
        if (std::abs(det) < 1e-14) continue;
        const double l1 = ((b.y - d.y) * (c.x - d.x) + (d.x - b.x) * (c.y - d.y)) / det;
        const double l2 = ((d.y - a.y) * (c.x - d.x) + (a.x - d.x) * (c.y - d.y)) / det;
        const double l3 = 1.0 - l1 - l2;
        constexpr double tol = -1e-9;
        if (l1 < tol || l2 < tol || l3 < tol) continue;
        out.mask[v * cfg.cells_x + u] = 1;
        out.z[v * cfg.cells_x + u] = l1 * a.z + l2 * b.z + l3 * d.z;
        break;
      }
    }
  }
  return out;
}

double surface_loss(const BevGrid& bev, const SurfaceTruth& truth) {
  const std::size_t n = static_cast<std::size_t>(bev.config.size());
  if (bev.z.size() != n || truth.z.size() != n || truth.mask.size() != n)
    throw InvalidInput("surface loss inputs differ in shape");
  double sum = 0.0;
  for (std::size_t c = 0; c < n; ++c)
    if (truth.mask[c] && bev.valid[c]) sum += std::abs(bev.z[c] - truth.z[c]);
  return sum / static_cast<double>(n);
}

LiftGeometry lift_geometry(int rows, int cols, const CameraModel& cam,
                           const SurfaceHypothesisSet& planes, const BevGridConfig& grid) {
  cam.validate();
  LiftGeometry g;
  g.rays = rows * cols;
  g.hypotheses = static_cast<int>(planes.pitch_deg.size());
  g.grid = grid;
  const std::size_t n = static_cast<std::size_t>(g.rays) * g.hypotheses;
  g.hit.assign(n, 0);
  g.cell.assign(n, -1);
  g.z.assign(n, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto [u, v] = cell_pixel(cam, rows, cols, r, c);
      for (int k = 0; k < g.hypotheses; ++k) {
        const auto hit = ray_plane_intersect(cam, u, v, planes.pitch_deg[k]);
        if (!hit) continue;
        const std::size_t i = (static_cast<std::size_t>(r) * cols + c) * g.hypotheses + k;
        g.hit[i] = 1;
        g.cell[i] = grid.cell_of(hit->x, hit->y);
        g.z[i] = hit->z;
      }
    }
  }
  return g;
}

}  // namespace lanespline
