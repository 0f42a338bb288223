#include "lanespline/priors.hpp"

#include <algorithm>
#include <numeric>

namespace lanespline {

namespace {

double x_at_y(const std::vector<Point3>& pts, double y) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Point3& a = pts[i - 1];
    const Point3& b = pts[i];
    const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
    if (y < lo || y > hi) continue;
    if (hi - lo < 1e-12) return 0.5 * (a.x + b.x);
    const double s = (y - a.y) / (b.y - a.y);
    return a.x + s * (b.x - a.x);
  }
  // Not reached: fall back to the point closest in y.
  auto it = std::min_element(pts.begin(), pts.end(), [y](const Point3& a, const Point3& b) {
    return std::abs(a.y - y) < std::abs(b.y - y);
  });
  return it->x;
}

}  // namespace

std::vector<int> order_left_to_right(const std::vector<std::vector<Point3>>& lanes) {
  std::vector<int> idx(lanes.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (lanes.empty()) return idx;
  double shared = -std::numeric_limits<double>::infinity();
  for (const auto& l : lanes) {
    if (l.empty()) throw InvalidInput("empty lane in neighbor ordering");
    double lo = l.front().y;
    for (const auto& p : l) lo = std::min(lo, p.y);
    shared = std::max(shared, lo);
  }
  std::vector<double> xs(lanes.size());
  for (std::size_t i = 0; i < lanes.size(); ++i) xs[i] = x_at_y(lanes[i], shared);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return xs[a] < xs[b]; });
  return idx;
}

std::vector<int> neighbor_order(const std::vector<PriorLane<double>>& lanes, int samples) {
  std::vector<std::vector<Point3>> polys;
  polys.reserve(lanes.size());
  for (const auto& l : lanes) {
    std::vector<Point3> pts;
    const double lo = l.visible.lo <= l.visible.hi ? l.visible.lo : 0.0;
    const double hi = l.visible.lo <= l.visible.hi ? l.visible.hi : 1.0;
    for (int i = 0; i < samples; ++i) {
      const double t = lo + (hi - lo) * i / (samples - 1);
      pts.push_back(l.curve.eval(std::clamp(t, 0.0, 1.0)));
    }
    polys.push_back(std::move(pts));
  }
  return order_left_to_right(polys);
}

}  // namespace lanespline
