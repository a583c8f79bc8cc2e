#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "gamow/core.hpp"

namespace gamow::quad {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Full symmetric Gauss-Legendre rule on [-1, 1].  Boost stores only the
// nonnegative half of the abscissae.
template <unsigned N>
const Rule& gauss_legendre() {
  static const Rule rule = [] {
    using G = boost::math::quadrature::gauss<double, N>;
    Rule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        r.x.push_back(0.0);
        r.w.push_back(w[i]);
        continue;
      }
      r.x.push_back(-a[i]);
      r.w.push_back(w[i]);
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
    }
    return r;
  }();
  return rule;
}

// Adaptive Gauss-Kronrod for smooth integrands.
template <class F>
double integrate(F f, double a, double b, double rel_tol = 1e-10,
                 const char* what = "integrate", double abs_tol = 0.0) {
  if (a == b) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 18, rel_tol, &err, &l1);
  if (!std::isfinite(v) || err > 10.0 * rel_tol * l1 + abs_tol)
    throw ToleranceNotMet(std::string(what) + ": tolerance not met", v, err);
  return v;
}

// Double-exponential rule; tolerates integrable endpoint singularities.
template <class F>
double integrate_singular(F f, double a, double b, double rel_tol = 1e-10,
                          const char* what = "integrate_singular", double abs_tol = 0.0) {
  if (a == b) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  double err = 0.0;
  double l1 = 0.0;
  // the two-argument form maps [a, b] without the cancellation that the
  // one-argument path suffers next to the endpoints
  const double v = ts.integrate([&](double x, double) { return f(x); }, a, b, rel_tol, &err, &l1);
  if (!std::isfinite(v) || err > 10.0 * rel_tol * l1 + abs_tol)
    throw ToleranceNotMet(std::string(what) + ": tolerance not met", v, err);
  return v;
}

}  // namespace gamow::quad
