#include "lanespline/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace lanespline {

namespace {

double segment_distance_xy(const Point3& a, const Point3& b, const Point3& q) {
  const double ex = b.x - a.x, ey = b.y - a.y;
  const double len2 = ex * ex + ey * ey;
  double s = len2 > 0.0 ? ((q.x - a.x) * ex + (q.y - a.y) * ey) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(a.x + s * ex - q.x, a.y + s * ey - q.y);
}

}  // namespace

double ucd(const LaneProposal& p, std::span<const Point3> gt, const MatchConfig& cfg) {
  if (gt.empty()) throw InvalidInput("chamfer distance needs ground-truth points");
  double sum = 0.0;
  for (const auto& q : gt) sum += segment_distance_xy(p.start(), p.end(), q);
  return std::min(sum / gt.size() / cfg.d_max, 1.0);
}

double cosd(const LaneProposal& p, std::span<const Point3> gt) {
  if (gt.size() < 2) throw InvalidInput("orientation cost needs at least two points");
  const double cx = gt.back().x - gt.front().x, cy = gt.back().y - gt.front().y;
  const double len = std::hypot(cx, cy);
  if (len < 1e-9) throw InvalidInput("degenerate ground-truth chord");
  const Point3 d = p.direction();
  const double dlen = std::hypot(d.x, d.y);
  const double cosv = std::clamp((d.x * cx + d.y * cy) / (len * dlen), -1.0, 1.0);
  return 0.5 * (1.0 - cosv);
}

double match_cost(const LaneProposal& p, std::span<const Point3> gt, const MatchConfig& cfg) {
  return cfg.lambda_ucd * ucd(p, gt, cfg) + cfg.lambda_cosd * cosd(p, gt);
}

std::vector<Assignment> assign(const std::vector<LaneProposal>& proposals,
                               const std::vector<std::vector<Point3>>& gts,
                               const MatchConfig& cfg) {
  std::vector<Assignment> out;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    int best = -1;
    double best_cost = 0.0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double c = match_cost(proposals[i], gts[j], cfg);
      if (best < 0 || c < best_cost) {
        best = static_cast<int>(j);
        best_cost = c;
      }
    }
    if (best >= 0 && best_cost < cfg.l_thr)
      out.push_back({static_cast<int>(i), best, best_cost});
  }
  return out;
}

}  // namespace lanespline
