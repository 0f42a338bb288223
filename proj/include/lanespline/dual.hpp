#pragma once

// Forward-mode dual numbers carrying a fixed-width gradient chunk.
//
// A Dual<N> holds a value and the partial derivatives with respect to N seeded
// inputs. Gradients of functions with more than N inputs are assembled chunk
// by chunk (see gradient.hpp).

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>

namespace lanespline {

template <std::size_t N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: constants convert implicitly

  static constexpr std::size_t width = N;

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator*=(double s) {
    v *= s;
    for (auto& x : d) x *= s;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    const double q = v * inv;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
  Dual& operator+=(double s) {
    v += s;
    return *this;
  }
  Dual& operator-=(double s) {
    v -= s;
    return *this;
  }
};

template <class T>
struct is_dual : std::false_type {};
template <std::size_t N>
struct is_dual<Dual<N>> : std::true_type {};

inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Dual<N>& x) {
  return x.v;
}

// Applies the chain rule for a unary function with value fx and derivative dfx.
template <std::size_t N>
Dual<N> chain(const Dual<N>& x, double fx, double dfx) {
  Dual<N> r(fx);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = dfx * x.d[i];
  return r;
}

template <std::size_t N>
Dual<N> operator-(const Dual<N>& a) {
  return chain(a, -a.v, -1.0);
}

template <std::size_t N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) {
  return a += b;
}
template <std::size_t N>
Dual<N> operator+(Dual<N> a, double b) {
  return a += b;
}
template <std::size_t N>
Dual<N> operator+(double a, Dual<N> b) {
  return b += a;
}

template <std::size_t N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) {
  return a -= b;
}
template <std::size_t N>
Dual<N> operator-(Dual<N> a, double b) {
  return a -= b;
}
template <std::size_t N>
Dual<N> operator-(double a, const Dual<N>& b) {
  return chain(b, a - b.v, -1.0);
}

template <std::size_t N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) {
  return a *= b;
}
template <std::size_t N>
Dual<N> operator*(Dual<N> a, double b) {
  return a *= b;
}
template <std::size_t N>
Dual<N> operator*(double a, Dual<N> b) {
  return b *= a;
}

template <std::size_t N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) {
  return a /= b;
}
template <std::size_t N>
Dual<N> operator/(Dual<N> a, double b) {
  return a *= (1.0 / b);
}
template <std::size_t N>
Dual<N> operator/(double a, const Dual<N>& b) {
  const double q = a / b.v;
  return chain(b, q, -q / b.v);
}

// Comparisons look at the value only; branches taken on them are treated as
// locally constant, which is exact away from the switching point.
template <std::size_t N>
bool operator<(const Dual<N>& a, const Dual<N>& b) {
  return a.v < b.v;
}
template <std::size_t N>
bool operator<(const Dual<N>& a, double b) {
  return a.v < b;
}
template <std::size_t N>
bool operator<(double a, const Dual<N>& b) {
  return a < b.v;
}
template <std::size_t N>
bool operator>(const Dual<N>& a, const Dual<N>& b) {
  return a.v > b.v;
}
template <std::size_t N>
bool operator>(const Dual<N>& a, double b) {
  return a.v > b;
}
template <std::size_t N>
bool operator>(double a, const Dual<N>& b) {
  return a > b.v;
}

template <std::size_t N>
Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.v);
  return chain(x, s, 0.5 / s);
}
template <std::size_t N>
Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.v);
  return chain(x, e, e);
}
template <std::size_t N>
Dual<N> log(const Dual<N>& x) {
  return chain(x, std::log(x.v), 1.0 / x.v);
}
template <std::size_t N>
Dual<N> pow(const Dual<N>& x, double p) {
  const double xp = std::pow(x.v, p);
  return chain(x, xp, p == 0.0 ? 0.0 : p * std::pow(x.v, p - 1.0));
}
// d|x|/dx at 0 is taken as 0 (subgradient).
template <std::size_t N>
Dual<N> abs(const Dual<N>& x) {
  return chain(x, std::abs(x.v), x.v > 0.0 ? 1.0 : (x.v < 0.0 ? -1.0 : 0.0));
}
template <std::size_t N>
bool isfinite(const Dual<N>& x) {
  if (!std::isfinite(x.v)) return false;
  for (double g : x.d)
    if (!std::isfinite(g)) return false;
  return true;
}

template <std::size_t N>
std::ostream& operator<<(std::ostream& os, const Dual<N>& x) {
  os << x.v << " [";
  for (std::size_t i = 0; i < N; ++i) os << (i ? ", " : "") << x.d[i];
  return os << "]";
}

// Gradient chunk width used by the loss machinery.
inline constexpr std::size_t kChunk = 8;
using Grad = Dual<kChunk>;

}  // namespace lanespline
