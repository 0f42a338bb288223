#pragma once

// Curve builders shared by the unit and acceptance tests.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "lanespline/spline.hpp"

namespace lanespline::testing {

inline BSplineCurve<double> straight_curve(const Point3& a, const Point3& b, int k = 10) {
  std::vector<Point3> cps;
  for (int i = 0; i < k; ++i) cps.push_back(a + (b - a) * (static_cast<double>(i) / (k - 1)));
  return BSplineCurve<double>(make_clamped_knots(k, 3), cps);
}

// Least-squares control points for points at the given curve parameters.
inline BSplineCurve<double> fit_curve(const std::vector<Point3>& pts, const std::vector<double>& ts,
                                      int k = 10) {
  const KnotVector kv = make_clamped_knots(k, 3);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pts.size()), k);
  Eigen::MatrixXd rhs(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const BasisRow row = basis_row(kv, ts[i], 0);
    for (int j = 0; j <= row.degree; ++j) a(i, row.first + j) = row.ders[0][j];
    rhs.row(i) << pts[i].x, pts[i].y, pts[i].z;
  }
  const Eigen::MatrixXd c = a.colPivHouseholderQr().solve(rhs);
  std::vector<Point3> cps(k);
  for (int j = 0; j < k; ++j) cps[j] = {c(j, 0), c(j, 1), c(j, 2)};
  return BSplineCurve<double>(kv, cps);
}

// Chord-length parametrization.
inline BSplineCurve<double> fit_curve(const std::vector<Point3>& pts, int k = 10) {
  std::vector<double> ts(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) ts[i] = ts[i - 1] + norm(pts[i] - pts[i - 1]);
  for (auto& t : ts) t /= ts.back();
  return fit_curve(pts, ts, k);
}

// Planar arc of radius r starting at the origin heading +y, bending right,
// sampled uniformly in angle.
inline std::vector<Point3> arc_points(double r, double length, int n = 400) {
  std::vector<Point3> out;
  for (int i = 0; i < n; ++i) {
    const double phi = length / r * i / (n - 1);
    out.push_back({r - r * std::cos(phi), r * std::sin(phi), 0.0});
  }
  return out;
}

}  // namespace lanespline::testing
