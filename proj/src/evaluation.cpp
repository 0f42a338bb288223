#include "lanespline/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

namespace lanespline {

void EvalConfig::validate() const {
  if (!(y_step > 0.0) || !(y_max > y_min)) throw InvalidConfiguration("invalid evaluation y grid");
  if (!(match_distance > 0.0) || !(match_fraction > 0.0) || match_fraction > 1.0)
    throw InvalidConfiguration("match thresholds must be positive");
}

std::vector<double> EvalConfig::y_grid() const {
  validate();
  std::vector<double> g;
  const int n = static_cast<int>(std::floor((y_max - y_min) / y_step + 1e-9));
  for (int i = 0; i <= n; ++i) g.push_back(y_min + i * y_step);
  return g;
}

LaneSamples sample_at_y(std::span<const Point3> points, std::span<const double> y_grid) {
  if (points.size() < 2) throw InvalidInput("lane needs at least two points to sample");
  std::vector<Point3> p(points.begin(), points.end());
  std::stable_sort(p.begin(), p.end(), [](const Point3& a, const Point3& b) { return a.y < b.y; });
  LaneSamples s;
  s.x.assign(y_grid.size(), 0.0);
  s.z.assign(y_grid.size(), 0.0);
  s.covered.assign(y_grid.size(), 0);
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    const double y = y_grid[i];
    if (y < p.front().y || y > p.back().y) continue;
    auto it = std::lower_bound(p.begin(), p.end(), y,
                               [](const Point3& a, double v) { return a.y < v; });
    std::size_t j = static_cast<std::size_t>(it - p.begin());
    if (j == 0) j = 1;
    const Point3& a = p[j - 1];
    const Point3& b = p[j];
    const double dy = b.y - a.y;
    const double u = dy > 0.0 ? (y - a.y) / dy : 0.0;
    s.x[i] = a.x + u * (b.x - a.x);
    s.z[i] = a.z + u * (b.z - a.z);
    s.covered[i] = 1;
  }
  return s;
}

LaneSamples sample_at_y(const GtLane& lane, std::span<const double> y_grid) {
  const std::vector<Point3> vis = lane.visible_points();
  if (vis.size() < 2) {
    if (lane.points.size() < 2) throw InvalidInput("lane needs at least two points to sample");
    LaneSamples s;
    s.x.assign(y_grid.size(), 0.0);
    s.z.assign(y_grid.size(), 0.0);
    s.covered.assign(y_grid.size(), 0);
    return s;
  }
  return sample_at_y(std::span<const Point3>(vis), y_grid);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_distance(const LaneSamples& a, const LaneSamples& b) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    if (!a.covered[i] || !b.covered[i]) continue;
    sum += std::hypot(a.x[i] - b.x[i], a.z[i] - b.z[i]);
    ++n;
  }
  return n ? sum / n : kInf;
}

struct Best {
  int pairs = -1;
  double cost = kInf;
  std::vector<std::pair<int, int>> match;
};

void search(const PairCost& c, std::size_t g, std::vector<std::uint8_t>& used,
            std::vector<std::pair<int, int>>& cur, double cost, Best& best) {
  if (g == c.cost.size()) {
    const int n = static_cast<int>(cur.size());
    if (n > best.pairs || (n == best.pairs && cost < best.cost)) {
      best.pairs = n;
      best.cost = cost;
      best.match = cur;
    }
    return;
  }
  search(c, g + 1, used, cur, cost, best);
  for (std::size_t p = 0; p < c.cost[g].size(); ++p) {
    if (used[p] || !std::isfinite(c.cost[g][p])) continue;
    used[p] = 1;
    cur.emplace_back(static_cast<int>(g), static_cast<int>(p));
    search(c, g + 1, used, cur, cost + c.cost[g][p], best);
    cur.pop_back();
    used[p] = 0;
  }
}

}  // namespace

PairCost pair_costs(const std::vector<LaneSamples>& gt, const std::vector<LaneSamples>& pred) {
  PairCost c;
  c.cost.assign(gt.size(), std::vector<double>(pred.size(), kInf));
  for (std::size_t g = 0; g < gt.size(); ++g)
    for (std::size_t p = 0; p < pred.size(); ++p) c.cost[g][p] = mean_distance(gt[g], pred[p]);
  return c;
}

std::vector<std::pair<int, int>> greedy_pairing(const PairCost& c) {
  std::vector<std::tuple<double, int, int>> entries;
  for (std::size_t g = 0; g < c.cost.size(); ++g)
    for (std::size_t p = 0; p < c.cost[g].size(); ++p)
      if (std::isfinite(c.cost[g][p]))
        entries.emplace_back(c.cost[g][p], static_cast<int>(g), static_cast<int>(p));
  std::sort(entries.begin(), entries.end());
  std::vector<std::uint8_t> gu(c.cost.size(), 0);
  std::vector<std::uint8_t> pu(c.cost.empty() ? 0 : c.cost[0].size(), 0);
  std::vector<std::pair<int, int>> out;
  for (const auto& [cost, g, p] : entries) {
    if (gu[g] || pu[p]) continue;
    gu[g] = pu[p] = 1;
    out.emplace_back(g, p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, int>> optimal_pairing(const PairCost& c) {
  Best best;
  std::vector<std::uint8_t> used(c.cost.empty() ? 0 : c.cost[0].size(), 0);
  std::vector<std::pair<int, int>> cur;
  search(c, 0, used, cur, 0.0, best);
  return best.match;
}

EvalResult evaluate(const std::vector<GtLane>& pred, const std::vector<GtLane>& gt,
                    const EvalConfig& cfg) {
  const std::vector<double> ys = cfg.y_grid();
  EvalResult r;
  r.n_pred = static_cast<int>(pred.size());
  r.n_gt = static_cast<int>(gt.size());
  if (pred.empty() && gt.empty()) {
    r.f1 = r.precision = r.recall = r.category_accuracy = 100.0;
    return r;
  }
  std::vector<LaneSamples> gs, ps;
  for (const auto& l : gt) gs.push_back(sample_at_y(l, ys));
  for (const auto& l : pred) ps.push_back(sample_at_y(l, ys));
  const PairCost c = pair_costs(gs, ps);
  const bool exact = static_cast<int>(std::max(gs.size(), ps.size())) <= cfg.exhaustive_limit;
  const auto pairs = exact ? optimal_pairing(c) : greedy_pairing(c);

  double ex[2] = {0, 0}, ez[2] = {0, 0};
  int en[2] = {0, 0};
  int cat_ok = 0;
  for (const auto& [g, p] : pairs) {
    int joint = 0, close = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (!gs[g].covered[i] || !ps[p].covered[i]) continue;
      ++joint;
      if (std::hypot(gs[g].x[i] - ps[p].x[i], gs[g].z[i] - ps[p].z[i]) < cfg.match_distance) ++close;
    }
    if (joint == 0 || close < cfg.match_fraction * joint) continue;
    ++r.tp;
    if (gt[g].category == pred[p].category) ++cat_ok;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (!gs[g].covered[i] || !ps[p].covered[i]) continue;
      const int b = ys[i] < cfg.near_far_split ? 0 : 1;
      ex[b] += std::abs(gs[g].x[i] - ps[p].x[i]);
      ez[b] += std::abs(gs[g].z[i] - ps[p].z[i]);
      ++en[b];
    }
  }
  r.precision = pred.empty() ? 0.0 : 100.0 * r.tp / static_cast<double>(pred.size());
  r.recall = gt.empty() ? 0.0 : 100.0 * r.tp / static_cast<double>(gt.size());
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.category_accuracy = r.tp ? 100.0 * cat_ok / r.tp : 0.0;
  r.x_near = en[0] ? ex[0] / en[0] : 0.0;
  r.x_far = en[1] ? ex[1] / en[1] : 0.0;
  r.z_near = en[0] ? ez[0] / en[0] : 0.0;
  r.z_far = en[1] ? ez[1] / en[1] : 0.0;
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string row(const std::string& scene, const std::string& scenario, const EvalResult& r) {
  std::string s = scene + "," + scenario;
  for (double v : {r.f1, r.precision, r.recall, r.category_accuracy, r.x_near, r.x_far, r.z_near, r.z_far})
    s += "," + fmt(v);
  return s + "\n";
}

EvalResult mean_of(const std::vector<const EvalResult*>& rs) {
  EvalResult m;
  for (const auto* r : rs) {
    m.f1 += r->f1;
    m.precision += r->precision;
    m.recall += r->recall;
    m.category_accuracy += r->category_accuracy;
    m.x_near += r->x_near;
    m.x_far += r->x_far;
    m.z_near += r->z_near;
    m.z_far += r->z_far;
  }
  const double n = rs.empty() ? 1.0 : static_cast<double>(rs.size());
  for (double* v : {&m.f1, &m.precision, &m.recall, &m.category_accuracy, &m.x_near, &m.x_far, &m.z_near, &m.z_far})
    *v /= n;
  return m;
}

}  // namespace

std::string eval_csv(const std::vector<SceneRow>& rows) {
  std::string out = "scene,scenario,F1,Precision,Recall,CategoryAcc,Xnear,Xfar,Znear,Zfar\n";
  std::map<std::string, std::vector<const EvalResult*>> by_tag;
  std::vector<const EvalResult*> all;
  for (const auto& r : rows) {
    out += row(r.scene, r.scenario, r.result);
    by_tag[r.scenario].push_back(&r.result);
    all.push_back(&r.result);
  }
  if (by_tag.size() > 1)
    for (const auto& [tag, rs] : by_tag) out += row("mean", tag, mean_of(rs));
  out += row("mean", "all", mean_of(all));
  return out;
}

}  // namespace lanespline
