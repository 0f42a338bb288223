#pragma once

#include <cmath>

#include "lanespline/dual.hpp"

namespace lanespline {

// Small 3-vector over double or Dual. Coordinates are the ego frame:
// x lateral (right), y longitudinal (forward), z up, all in meters.
template <class T>
struct Vec3 {
  T x{}, y{}, z{};

  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
};

using Point3 = Vec3<double>;

template <class T>
Vec3<T> operator+(Vec3<T> a, const Vec3<T>& b) {
  return a += b;
}
template <class T>
Vec3<T> operator-(Vec3<T> a, const Vec3<T>& b) {
  return a -= b;
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a) {
  return {-a.x, -a.y, -a.z};
}
template <class T, class S>
Vec3<T> operator*(const Vec3<T>& a, const S& s) {
  return {a.x * s, a.y * s, a.z * s};
}
template <class T, class S>
Vec3<T> operator*(const S& s, const Vec3<T>& a) {
  return {a.x * s, a.y * s, a.z * s};
}
template <class T, class S>
Vec3<T> operator/(const Vec3<T>& a, const S& s) {
  return {a.x / s, a.y / s, a.z / s};
}

template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <class T>
T norm(const Vec3<T>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <class T>
Vec3<double> value_of(const Vec3<T>& a) {
  return {value_of(a.x), value_of(a.y), value_of(a.z)};
}

// Promotes a double vector into the scalar type T (as a constant).
template <class T>
Vec3<T> lift(const Vec3<double>& a) {
  return {T(a.x), T(a.y), T(a.z)};
}

template <class T>
T sigmoid(const T& x) {
  using std::exp;
  if (value_of(x) >= 0.0) return 1.0 / (1.0 + exp(-x));
  const T e = exp(x);
  return e / (1.0 + e);
}

// Clamp with zero derivative outside [lo, hi].
template <class T>
T clamp_value(const T& x, double lo, double hi) {
  if (value_of(x) < lo) return T(lo);
  if (value_of(x) > hi) return T(hi);
  return x;
}

// max(x, floor) where the floor branch is a constant.
template <class T>
T max_with(const T& x, double floor) {
  return value_of(x) > floor ? x : T(floor);
}

inline constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double deg) { return deg * kPi / 180.0; }

}  // namespace lanespline
