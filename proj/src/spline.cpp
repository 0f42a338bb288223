#include "lanespline/spline.hpp"

#include <algorithm>
#include <cmath>

namespace lanespline {

KnotVector make_clamped_knots(int count, int degree) {
  if (degree < 0 || degree > kMaxDegree)
    throw InvalidConfiguration("unsupported spline degree " + std::to_string(degree));
  if (count < degree + 1)
    throw InvalidConfiguration("need at least degree+1 control points");
  KnotVector kv;
  kv.degree = degree;
  kv.count = count;
  kv.values.reserve(count + degree + 1);
  for (int i = 0; i <= degree; ++i) kv.values.push_back(0.0);
  const int segments = count - degree;
  for (int i = 1; i < segments; ++i) kv.values.push_back(static_cast<double>(i) / segments);
  for (int i = 0; i <= degree; ++i) kv.values.push_back(1.0);
  return kv;
}

void check_parameter(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("curve parameter outside [0, 1]");
}

namespace {

// Span index s with knots[s] <= t < knots[s+1]; t == 1 maps to the last
// nonempty span so the basis stays a partition of unity at the end point.
int find_span(const KnotVector& kv, double t) {
  const int n = kv.count - 1;
  const auto& u = kv.values;
  if (t >= u[n + 1]) return n;
  if (t <= u[kv.degree]) return kv.degree;
  auto it = std::upper_bound(u.begin() + kv.degree, u.begin() + n + 1, t);
  return static_cast<int>(it - u.begin()) - 1;
}

double degree_zero(const KnotVector& kv, int k, double t) {
  const auto& u = kv.values;
  if (t >= 1.0) return k == find_span(kv, t) ? 1.0 : 0.0;
  return (u[k] <= t && t < u[k + 1]) ? 1.0 : 0.0;
}

double cox_de_boor(const KnotVector& kv, int k, int d, double t) {
  if (d == 0) return degree_zero(kv, k, t);
  const auto& u = kv.values;
  double out = 0.0;
  const double left = u[k + d] - u[k];
  if (left > 0.0) out += (t - u[k]) / left * cox_de_boor(kv, k, d - 1, t);
  const double right = u[k + d + 1] - u[k + 1];
  if (right > 0.0) out += (u[k + d + 1] - t) / right * cox_de_boor(kv, k + 1, d - 1, t);
  return out;
}

}  // namespace

double basis_eval(const KnotVector& knots, int k, int degree, double t) {
  check_parameter(t);
  if (degree != knots.degree && (degree < 0 || degree > knots.degree))
    throw InvalidConfiguration("basis degree exceeds knot configuration");
  // Lower-degree bases on the same knot vector index into the full vector.
  const int last = static_cast<int>(knots.values.size()) - degree - 2;
  if (k < 0 || k > last) throw InvalidConfiguration("basis index out of range");
  return cox_de_boor(knots, k, degree, t);
}

// Basis functions and derivatives in the style of the classic
// triangular-table algorithm (ndu holds basis values and knot differences).
BasisRow basis_row(const KnotVector& kv, double t, int derivatives) {
  check_parameter(t);
  const int p = kv.degree;
  const int span = find_span(kv, t);
  const auto& u = kv.values;
  BasisRow row;
  row.first = span - p;
  row.degree = p;

  double ndu[kMaxDegree + 1][kMaxDegree + 1];
  double left[kMaxDegree + 1];
  double right[kMaxDegree + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - u[span + 1 - j];
    right[j] = u[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double tmp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) row.ders[0][j] = ndu[j][p];

  const int nd = std::min(derivatives, p);
  if (nd <= 0) return row;
  double a[2][kMaxDegree + 1];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      row.ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) row.ders[k][j] *= factor;
    factor *= (p - k);
  }
  return row;
}

std::vector<double> uniform_parameters(int n) {
  std::vector<double> ts(n);
  if (n == 1) {
    ts[0] = 0.0;
    return ts;
  }
  for (int i = 0; i < n; ++i) ts[i] = static_cast<double>(i) / (n - 1);
  ts.back() = 1.0;
  return ts;
}

}  // namespace lanespline
