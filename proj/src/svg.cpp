#include "lanespline/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace lanespline {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Panel {
  double left, top, width, height;
  double u0, u1, v0, v1;  // data ranges: u horizontal, v vertical (up)

  double px(double u) const { return left + (u - u0) / (u1 - u0) * width; }
  double py(double v) const { return top + height - (v - v0) / (v1 - v0) * height; }
};

void frame(std::string& s, const Panel& p, const std::string& label) {
  s += "<rect x=\"" + num(p.left) + "\" y=\"" + num(p.top) + "\" width=\"" + num(p.width) +
       "\" height=\"" + num(p.height) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  s += "<text x=\"" + num(p.left) + "\" y=\"" + num(p.top - 6) + "\" font-size=\"12\">" +
       escape(label) + "</text>\n";
}

// One polyline per run of points with equal visibility.
void polyline(std::string& s, const Panel& p, const GtLane& l, bool side, const char* color) {
  std::size_t i = 0;
  while (i + 1 < l.points.size()) {
    std::size_t j = i;
    const bool vis = l.visibility[i] != 0;
    std::string pts;
    while (j < l.points.size() && (l.visibility[j] != 0) == vis) {
      const Point3& q = l.points[j];
      pts += num(p.px(side ? q.y : q.x)) + "," + num(p.py(side ? q.z : q.y)) + " ";
      ++j;
    }
    if (j < l.points.size()) {
      const Point3& q = l.points[j];
      pts += num(p.px(side ? q.y : q.x)) + "," + num(p.py(side ? q.z : q.y));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"" +
         (vis ? "" : " stroke-dasharray=\"4 3\"") + " points=\"" + pts + "\"/>\n";
    i = j;
  }
}

}  // namespace

std::string lanes_svg(const std::vector<GtLane>& gt, const std::vector<GtLane>& fitted,
                      const std::string& title) {
  double xmin = -10, xmax = 10, ymin = 0, ymax = 105, zmin = -1, zmax = 1;
  for (const auto* set : {&gt, &fitted})
    for (const auto& l : *set)
      for (const auto& q : l.points) {
        xmin = std::min(xmin, q.x);
        xmax = std::max(xmax, q.x);
        ymin = std::min(ymin, q.y);
        ymax = std::max(ymax, q.y);
        zmin = std::min(zmin, q.z);
        zmax = std::max(zmax, q.z);
      }
  const Panel top{40, 40, 260, 520, xmin, xmax, ymin, ymax};
  const Panel side{360, 40, 520, 260, ymin, ymax, zmin, zmax};
  std::string s =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"920\" height=\"600\" "
      "viewBox=\"0 0 920 600\">\n<rect width=\"920\" height=\"600\" fill=\"white\"/>\n";
  s += "<text x=\"40\" y=\"18\" font-size=\"14\">" + escape(title) + "</text>\n";
  frame(s, top, "top view: x [" + num(xmin) + ", " + num(xmax) + "] m over y");
  frame(s, side, "side view: z [" + num(zmin) + ", " + num(zmax) + "] m over y");
  for (const auto& l : gt) {
    polyline(s, top, l, false, "#1f5fbf");
    polyline(s, side, l, true, "#1f5fbf");
  }
  for (const auto& l : fitted) {
    polyline(s, top, l, false, "#c8322a");
    polyline(s, side, l, true, "#c8322a");
  }
  s += "<text x=\"360\" y=\"340\" font-size=\"12\" fill=\"#1f5fbf\">ground truth</text>\n";
  s += "<text x=\"360\" y=\"356\" font-size=\"12\" fill=\"#c8322a\">fitted</text>\n";
  s += "</svg>\n";
  return s;
}

std::string grid_svg(const BevGrid& g, const std::string& title) {
  const int nx = g.config.cells_x, ny = g.config.cells_y;
  const double cw = 20.0, ch = 20.0;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (int c = 0; c < g.config.size(); ++c) {
    if (!g.valid[c]) continue;
    lo = any ? std::min(lo, g.z[c]) : g.z[c];
    hi = any ? std::max(hi, g.z[c]) : g.z[c];
    any = true;
  }
  const double span = hi - lo > 1e-9 ? hi - lo : 1.0;
  const double w = 40 + nx * cw + 40, h = 60 + ny * ch + 20;
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
                  "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"40\" y=\"18\" font-size=\"14\">" + escape(title) + "</text>\n";
  s += "<text x=\"40\" y=\"36\" font-size=\"12\">z range [" + num(lo) + ", " + num(hi) + "] m</text>\n";
  for (int v = 0; v < ny; ++v) {
    for (int u = 0; u < nx; ++u) {
      const int c = v * nx + u;
      std::string fill = "#cccccc";
      if (g.valid[c]) {
        const double a = (g.z[c] - lo) / span;
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 * a), 64,
                      static_cast<int>(255 * (1 - a)));
        fill = buf;
      }
      // Far rows at the top.
      s += "<rect x=\"" + num(40 + u * cw) + "\" y=\"" + num(50 + (ny - 1 - v) * ch) +
           "\" width=\"" + num(cw) + "\" height=\"" + num(ch) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace lanespline
