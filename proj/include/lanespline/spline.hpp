#pragma once

// Clamped uniform B-splines over t in [0, 1].

#include <array>
#include <span>
#include <vector>

#include "lanespline/errors.hpp"
#include "lanespline/math.hpp"

namespace lanespline {

inline constexpr int kMaxDegree = 7;
inline constexpr double kTangentEps = 1e-9;

struct KnotVector {
  int degree = 0;
  int count = 0;  // number of control points K
  std::vector<double> values;  // K + degree + 1 entries
};

// First degree+1 knots are 0, last degree+1 are 1, interior knots uniform.
KnotVector make_clamped_knots(int count, int degree);

// Cox-de Boor recursion for basis function k (0-based) of the given degree.
// This is the reference path; hot loops use basis_row().
double basis_eval(const KnotVector& knots, int k, int degree, double t);

// The degree+1 basis functions that are nonzero at t, with their first
// `derivatives` derivatives. Entry ders[n][j] belongs to basis index first+j.
struct BasisRow {
  int first = 0;
  int degree = 0;
  std::array<std::array<double, kMaxDegree + 1>, 3> ders{};
};

BasisRow basis_row(const KnotVector& knots, double t, int derivatives = 0);

void check_parameter(double t);

template <class T>
class BSplineCurve {
 public:
  BSplineCurve(KnotVector knots, std::vector<Vec3<T>> control_points)
      : knots_(std::move(knots)), cps_(std::move(control_points)) {
    if (static_cast<int>(cps_.size()) != knots_.count)
      throw InvalidConfiguration("control point count does not match knot vector");
  }

  int degree() const { return knots_.degree; }
  const KnotVector& knots() const { return knots_; }
  const std::vector<Vec3<T>>& control_points() const { return cps_; }

  Vec3<T> eval(double t) const { return combine(basis_row(knots_, t, 0), 0); }

  // Analytic derivative d^order f / dt^order, order in {0, 1, 2} and <= degree.
  Vec3<T> derivative(double t, int order) const {
    if (order < 0 || order > 2 || order > degree())
      throw InvalidConfiguration("derivative order exceeds spline degree");
    return combine(basis_row(knots_, t, order), order);
  }

  Vec3<T> unit_tangent(double t, double eps = kTangentEps) const {
    const Vec3<T> d = derivative(t, 1);
    const T n = norm(d);
    if (!(value_of(n) > eps)) throw DegenerateTangent("tangent norm below threshold");
    return d / n;
  }

  Vec3<T> combine(const BasisRow& row, int order) const {
    Vec3<T> out{};
    for (int j = 0; j <= row.degree; ++j) {
      const double b = row.ders[order][j];
      const Vec3<T>& c = cps_[row.first + j];
      out.x += c.x * b;
      out.y += c.y * b;
      out.z += c.z * b;
    }
    return out;
  }

 private:
  KnotVector knots_;
  std::vector<Vec3<T>> cps_;
};

// One-dimensional spline sharing the geometry spline's knot configuration.
template <class T>
class ScalarSpline {
 public:
  ScalarSpline(KnotVector knots, std::vector<T> coefficients)
      : knots_(std::move(knots)), coef_(std::move(coefficients)) {
    if (static_cast<int>(coef_.size()) != knots_.count)
      throw InvalidConfiguration("coefficient count does not match knot vector");
  }

  T eval(double t) const {
    const BasisRow row = basis_row(knots_, t, 0);
    T out{};
    for (int j = 0; j <= row.degree; ++j) out += coef_[row.first + j] * row.ders[0][j];
    return out;
  }

  const std::vector<T>& coefficients() const { return coef_; }
  const KnotVector& knots() const { return knots_; }

 private:
  KnotVector knots_;
  std::vector<T> coef_;
};

// Uniform samples i/(n-1), i = 0..n-1.
std::vector<double> uniform_parameters(int n);

}  // namespace lanespline
