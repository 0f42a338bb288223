#pragma once

// Chunked forward-mode gradients. The callable is invoked with a span of
// Grad values, kChunk directions seeded at a time.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lanespline/dual.hpp"
#include "lanespline/errors.hpp"

namespace lanespline {

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

template <class F>
ValueAndGradient value_and_gradient(F&& f, std::span<const double> params,
                                    const std::string& term = "loss") {
  ValueAndGradient out;
  out.gradient.assign(params.size(), 0.0);
  std::vector<Grad> x(params.begin(), params.end());
  bool evaluated = false;
  for (std::size_t start = 0; start < params.size() || !evaluated; start += kChunk) {
    const std::size_t stop = std::min(params.size(), start + kChunk);
    for (std::size_t i = start; i < stop; ++i) x[i].d[i - start] = 1.0;
    const Grad y = f(std::span<const Grad>(x));
    if (!std::isfinite(y.v)) throw NumericalError(term, "non-finite value");
    for (std::size_t i = start; i < stop; ++i) {
      if (!std::isfinite(y.d[i - start])) throw NumericalError(term, "non-finite derivative");
      out.gradient[i] = y.d[i - start];
      x[i].d[i - start] = 0.0;
    }
    out.value = y.v;
    evaluated = true;
  }
  return out;
}

template <class F>
std::vector<double> gradient(F&& f, std::span<const double> params,
                             const std::string& term = "loss") {
  return value_and_gradient(std::forward<F>(f), params, term).gradient;
}

// Central finite differences; the oracle for gradient checks.
template <class F>
std::vector<double> finite_difference_gradient(F&& f, std::span<const double> params,
                                               double h = 1e-6) {
  std::vector<double> x(params.begin(), params.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(std::span<const double>(x));
    x[i] = keep - h;
    const double down = f(std::span<const double>(x));
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace lanespline
