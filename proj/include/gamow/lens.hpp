#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gamow/asymmetry.hpp"
#include "gamow/core.hpp"
#include "gamow/parallel.hpp"
#include "gamow/star_shape.hpp"
#include "gamow/svg.hpp"

namespace gamow {

// Circle through P = (cos tb, sin tb), Q = (cos tb, -sin tb) and the apex
// S = (1 + delta, 0), compared with the unit circle arc through P and Q.
struct LensState {
  double theta_bar = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double rho = 1.0;
  double theta = 0.0;
  double tau = 0.0;
  double mu = 0.0;
};

inline void to_json(json& j, const LensState& s) {
  j = json{{"theta_bar", s.theta_bar}, {"delta", s.delta}, {"eta", s.eta}, {"rho", s.rho},
           {"theta", s.theta},         {"tau", s.tau},     {"mu", s.mu}};
}

struct LensDerivatives {
  double rho = 0.0;
  double theta = 0.0;
  double tau = 0.0;
  double mu = 0.0;
};

namespace detail {

inline double x_over_sin(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
  return x / std::sin(x);
}

// x - sin x cos x, the doubled area of a unit circular segment of half-angle x
inline double segment_angle(double x) {
  if (std::abs(x) < 0.05) {
    const double x2 = x * x;
    return x * x2 * (2.0 / 3.0 - x2 * (2.0 / 15.0 - x2 * (4.0 / 315.0 - x2 * (2.0 / 2835.0))));
  }
  return x - std::sin(x) * std::cos(x);
}

// d/dx of segment_angle(x) / sin^2 x
inline double segment_ratio_slope(double x) {
  const double sx = std::sin(x);
  return 2.0 - 2.0 * std::cos(x) * segment_angle(x) / (sx * sx * sx);
}

// (sin x - x cos x) / ((1 - cos x) sin x)
inline double tau_slope_over_sin(double x) {
  if (std::abs(x) < 1e-3) return (4.0 / 3.0) * (1.0 + 0.15 * x * x);
  const double s = std::sin(x);
  const double omc = 2.0 * std::sin(0.5 * x) * std::sin(0.5 * x);
  return 2.0 * (s - x * std::cos(x)) / (omc * s);
}

}  // namespace detail

// Same construction for any 0 < tb < pi and any apex offset.  Past the flat
// chord delta_1 = cos(tb) - 1 the arc bends the other way and rho, theta turn
// negative, which keeps eta + rho = 1 + delta and rho sin(theta) = sin(tb).
inline LensState lens_state_extended(double theta_bar, double delta) {
  if (!(theta_bar > 0.0 && theta_bar < kPi) || !std::isfinite(delta))
    throw DomainError("lens_state_extended: theta_bar must lie in (0, pi)");
  LensState s;
  s.theta_bar = theta_bar;
  s.delta = delta;
  if (delta == 0.0) {
    s.theta = theta_bar;
    s.tau = 2.0 * theta_bar;
    return s;
  }
  const double c = std::sin(theta_bar);
  const double h0 = 1.0 - std::cos(theta_bar);
  const double h = h0 + delta;
  s.theta = 2.0 * std::atan2(h, c);
  const double st = std::sin(s.theta);
  s.rho = st == 0.0 ? HUGE_VAL : c / st;
  s.eta = 1.0 + delta - s.rho;
  s.tau = 2.0 * c * detail::x_over_sin(s.theta);
  // theta - theta_bar without cancellation, from the tangent difference formula
  const double dth = 2.0 * std::atan(delta * c / (c * c + h * h0));
  if (std::abs(dth) < 1e-3) {
    // Simpson on G' keeps the sign of mu exact for tiny delta
    const double m = theta_bar + 0.5 * dth, b = theta_bar + dth;
    const double dG = dth / 6.0 *
                      (detail::segment_ratio_slope(theta_bar) + 4.0 * detail::segment_ratio_slope(m) +
                       detail::segment_ratio_slope(b));
    s.mu = c * c * dG;
  } else {
    const double seg = s.theta == 0.0 ? 0.0 : detail::segment_angle(s.theta) / (st * st);
    s.mu = c * c * seg - detail::segment_angle(theta_bar);
  }
  return s;
}

inline void require_lens_domain(double theta_bar, double delta, const char* what) {
  if (!(theta_bar > 0.0 && theta_bar <= 0.5 * kPi))
    throw DomainError(std::string(what) + ": theta_bar must lie in (0, pi/2]");
  if (delta == 0.0) return;
  if (!(std::abs(delta) < std::cos(theta_bar) / 8.0 - 1e-9))
    throw DomainError(std::string(what) + ": |delta| must be below cos(theta_bar)/8");
}

inline LensState lens_state(double theta_bar, double delta) {
  require_lens_domain(theta_bar, delta, "lens_state");
  return lens_state_extended(theta_bar, delta);
}

inline LensDerivatives lens_derivatives_extended(double theta_bar, double delta) {
  const LensState s = lens_state_extended(theta_bar, delta);
  const double c = std::sin(theta_bar);
  const double th = s.theta;
  const double omc = 2.0 * std::sin(0.5 * th) * std::sin(0.5 * th);
  LensDerivatives d;
  d.rho = omc == 0.0 ? -HUGE_VAL : -std::cos(th) / omc;
  // sin(th) / (rho (1 - cos th)) = (1 + cos th) / sin(tb)
  d.theta = (1.0 + std::cos(th)) / c;
  const double ratio = detail::tau_slope_over_sin(th);
  d.tau = ratio * std::sin(th);
  d.mu = c * ratio;
  return d;
}

// d/d delta of (rho, theta, tau, mu).
inline LensDerivatives lens_derivatives(double theta_bar, double delta) {
  require_lens_domain(theta_bar, delta, "lens_derivatives");
  return lens_derivatives_extended(theta_bar, delta);
}

// tau(delta) - tau(0) - mu (1 + factor cos(tb) delta); nonnegative with
// factor 1/6, and with factor 1/4 when delta > 0.
inline double lens_inequality_check(double theta_bar, double delta, double factor = 1.0 / 6.0) {
  const LensState s = lens_state(theta_bar, delta);
  return s.tau - 2.0 * theta_bar - s.mu * (1.0 + factor * std::cos(theta_bar) * delta);
}

namespace detail {

template <class F>
double bisect_increasing(F f, double lo, double hi, double target, double tol) {
  for (int i = 0; i < 200 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Apex offset of the lens with signed area mu_target.
inline double lens_from_area(double theta_bar, double mu_target) {
  require_lens_domain(theta_bar, 0.0, "lens_from_area");
  if (mu_target == 0.0) return 0.0;
  const double lim = std::cos(theta_bar) / 8.0 - 2e-9;
  if (!(lim > 0.0)) throw RangeError("lens_from_area: only the zero area is attainable at theta_bar = pi/2");
  auto mu = [&](double d) { return lens_state_extended(theta_bar, d).mu; };
  if (!(mu_target > mu(-lim) && mu_target < mu(lim)))
    throw RangeError("lens_from_area: target area outside the attainable range");
  return detail::bisect_increasing(mu, -lim, lim, mu_target, 1e-13);
}

// mu'(delta_1) = (4/3) sin(tb) at the flat chord, cross-checked against a
// one-sided second-order difference of the extended family.
inline double mu_prime_at_flat(double theta_bar) {
  if (!(theta_bar > 0.0 && theta_bar <= 0.5 * kPi))
    throw DomainError("mu_prime_at_flat: theta_bar must lie in (0, pi/2]");
  const double value = 4.0 / 3.0 * std::sin(theta_bar);
  const double d1 = std::cos(theta_bar) - 1.0, h = 1e-5;
  auto mu = [&](double d) { return lens_state_extended(theta_bar, d).mu; };
  const double fd = (-3.0 * mu(d1) + 4.0 * mu(d1 + h) - mu(d1 + 2.0 * h)) / (2.0 * h);
  if (std::abs(fd - value) > 1e-4) throw ToleranceNotMet("mu_prime_at_flat: finite difference disagrees", fd, fd - value);
  return value;
}

// Circular cap over the chord at contact angle tb with signed area against
// the unit circle (positive outside).  depth is |delta|, the largest distance
// of the arc from the unit circle.
struct CapArc {
  double theta_bar = 0.0;
  double delta = 0.0;
  double depth = 0.0;
  double length = 0.0;
  double mu = 0.0;
};

inline CapArc cap_arc(double theta_bar, double signed_area) {
  if (!(theta_bar > 0.0 && theta_bar < kPi)) throw DomainError("cap_arc: theta_bar must lie in (0, pi)");
  auto mu = [&](double d) { return lens_state_extended(theta_bar, d).mu; };
  double lo = 0.0, hi = 0.0;
  if (signed_area > 0.0) {
    hi = 0.25;
    for (int i = 0; mu(hi) < signed_area; ++i) {
      if (i > 60) throw RangeError("cap_arc: area not attainable");
      lo = hi;
      hi *= 2.0;
    }
  } else if (signed_area < 0.0) {
    lo = -0.25;
    for (int i = 0; mu(lo) > signed_area; ++i) {
      if (i > 60) throw RangeError("cap_arc: area not attainable");
      hi = lo;
      lo *= 2.0;
    }
  }
  CapArc a;
  a.theta_bar = theta_bar;
  a.delta = signed_area == 0.0 ? 0.0 : detail::bisect_increasing(mu, lo, hi, signed_area, 1e-14);
  const LensState s = lens_state_extended(theta_bar, a.delta);
  a.depth = std::abs(a.delta);
  a.length = s.tau;
  a.mu = s.mu;
  return a;
}

// ---- grid verification -------------------------------------------------

struct LensGridRow {
  double theta_bar = 0.0;
  double delta = 0.0;
  double slack = 0.0;
  double slack_quarter = 0.0;
  LensDerivatives analytic;
  LensDerivatives finite_difference;
  double fd_error = 0.0;
  bool fd_checked = false;
  bool in_domain = true;
};

struct LensGridCheck {
  std::vector<LensGridRow> rows;
  CheckReport derivatives;
  CheckReport closed_forms;
  CheckReport inequality;
  CheckReport flat_slope;
};

// Central differences of the extended family with one Richardson step.
inline LensDerivatives lens_finite_difference(double theta_bar, double delta, double h) {
  auto at = [&](double d) { return lens_state_extended(theta_bar, d); };
  auto central = [&](double step) {
    const LensState p = at(delta + step), m = at(delta - step);
    return LensDerivatives{(p.rho - m.rho) / (2 * step), (p.theta - m.theta) / (2 * step),
                           (p.tau - m.tau) / (2 * step), (p.mu - m.mu) / (2 * step)};
  };
  const LensDerivatives a = central(h), b = central(0.5 * h);
  auto r = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
  return {r(a.rho, b.rho), r(a.theta, b.theta), r(a.tau, b.tau), r(a.mu, b.mu)};
}

inline double relative_gap(const LensDerivatives& an, const LensDerivatives& fd) {
  auto g = [](double a, double f) { return std::abs(f - a) / std::max(std::abs(a), 1.0); };
  return std::max({g(an.rho, fd.rho), g(an.theta, fd.theta), g(an.tau, fd.tau), g(an.mu, fd.mu)});
}

// Derivatives, closed forms at delta = 0, the area inequality and the flat
// slope on an n_theta x n_delta grid with theta_bar in [0.05, pi/2 - 0.05].
// delta spans delta_scale times the admissible range; rows outside it are
// flagged and left out of every check.
inline LensGridCheck lens_grid_check(std::size_t n_theta = 100, std::size_t n_delta = 101, double fd_tol = 1e-6,
                                     double slack_tol = 1e-12, double delta_scale = 1.0) {
  if (n_theta < 2 || n_delta < 3) throw PreconditionError("lens_grid_check: grid too small");
  if (!(delta_scale > 0.0) || !std::isfinite(delta_scale))
    throw PreconditionError("lens_grid_check: delta_scale must be > 0");
  LensGridCheck out;
  const auto thetas = linspace(0.05, 0.5 * kPi - 0.05, n_theta);
  out.rows.resize(n_theta * n_delta);
  parallel_for(n_theta, [&](std::size_t i) {
    const double tb = thetas[i];
    const double lim = std::cos(tb) / 8.0 - 2e-9;
    const double pole = std::cos(tb) - 1.0;
    for (std::size_t j = 0; j < n_delta; ++j) {
      LensGridRow& row = out.rows[i * n_delta + j];
      const double u = static_cast<double>(j) / static_cast<double>(n_delta - 1);
      row.theta_bar = tb;
      row.delta = delta_scale * (-lim + 2.0 * lim * u);
      if (j == (n_delta - 1) / 2 && n_delta % 2 == 1) row.delta = 0.0;
      if (std::abs(row.delta) > lim) {
        row.in_domain = false;
        row.slack = row.slack_quarter = std::nan("");
        continue;
      }
      row.slack = lens_inequality_check(tb, row.delta);
      row.slack_quarter = lens_inequality_check(tb, row.delta, 0.25);
      row.analytic = lens_derivatives(tb, row.delta);
      const double dist = std::abs(row.delta - pole);
      if (dist >= 1e-3) {
        row.finite_difference = lens_finite_difference(tb, row.delta, std::min(1e-3, 0.02 * dist));
        row.fd_error = relative_gap(row.analytic, row.finite_difference);
        row.fd_checked = true;
      }
    }
  });
  double worst_fd = 0.0, worst_slack = 1e300, worst_quarter = 1e300, worst_closed = 0.0;
  for (const auto& row : out.rows) {
    if (!row.in_domain) continue;
    if (row.fd_checked) {
      ++out.derivatives.samples_used;
      worst_fd = std::max(worst_fd, row.fd_error);
      if (row.fd_error > fd_tol)
        out.derivatives.add_witness(json{{"theta_bar", row.theta_bar}, {"delta", row.delta}, {"error", row.fd_error}});
    }
    ++out.inequality.samples_used;
    worst_slack = std::min(worst_slack, row.slack);
    if (row.slack < -slack_tol)
      out.inequality.add_witness(json{{"theta_bar", row.theta_bar}, {"delta", row.delta}, {"slack", row.slack}});
    if (row.delta > 0.0) {
      worst_quarter = std::min(worst_quarter, row.slack_quarter);
      if (row.slack_quarter < -slack_tol)
        out.inequality.add_witness(
            json{{"theta_bar", row.theta_bar}, {"delta", row.delta}, {"slack_quarter", row.slack_quarter}});
    }
    if (row.delta == 0.0) {
      const double tb = row.theta_bar, c = std::cos(tb), s = std::sin(tb);
      const double m = 2.0 * (s - tb * c) / (1.0 - c);
      const double gaps[4] = {row.analytic.rho + c / (1.0 - c), row.analytic.theta - s / (1.0 - c),
                              row.analytic.tau - m, row.analytic.mu - m};
      ++out.closed_forms.samples_used;
      for (double g : gaps) worst_closed = std::max(worst_closed, std::abs(g));
      if (std::any_of(std::begin(gaps), std::end(gaps), [](double g) { return std::abs(g) > 1e-10; }))
        out.closed_forms.add_witness(json{{"theta_bar", tb}, {"gaps", gaps}});
    }
  }
  out.derivatives.extremal_ratio = worst_fd;
  out.derivatives.values["max_relative_error"] = worst_fd;
  out.closed_forms.extremal_ratio = worst_closed;
  out.inequality.extremal_ratio = worst_slack;
  out.inequality.values["min_slack"] = worst_slack;
  out.inequality.values["min_slack_quarter"] = worst_quarter;
  for (double tb : {kPi / 6.0, kPi / 4.0, kPi / 3.0, 0.5 * kPi}) {
    ++out.flat_slope.samples_used;
    try {
      mu_prime_at_flat(tb);
    } catch (const ToleranceNotMet& e) {
      out.flat_slope.add_witness(json{{"theta_bar", tb}, {"finite_difference", e.estimate}});
    }
  }
  return out;
}

inline std::string to_csv(const std::vector<LensGridRow>& rows) {
  std::ostringstream o;
  o.precision(17);
  o << "theta_bar,delta,slack,slack_quarter,rho_prime,theta_prime,tau_prime,mu_prime,fd_error,in_domain\n";
  for (const auto& r : rows) {
    o << r.theta_bar << ',' << r.delta << ',';
    if (r.in_domain)
      o << r.slack << ',' << r.slack_quarter << ',' << r.analytic.rho << ',' << r.analytic.theta << ','
        << r.analytic.tau << ',' << r.analytic.mu << ',';
    else
      o << ",,,,,,";
    if (r.fd_checked) o << r.fd_error;
    o << ',' << (r.in_domain ? 1 : 0) << '\n';
  }
  return o.str();
}

// ---- minimal curves ----------------------------------------------------

enum class CurveCase { corner_convex, corner_straight, corner_concave, corner, tangent_segment, full_circle };

inline const char* case_name(CurveCase c) {
  switch (c) {
    case CurveCase::corner_convex: return "corner_convex";
    case CurveCase::corner_straight: return "corner_straight";
    case CurveCase::corner_concave: return "corner_concave";
    case CurveCase::corner: return "corner";
    case CurveCase::tangent_segment: return "tangent_segment";
    case CurveCase::full_circle: return "full_circle";
  }
  return "?";
}

// Shortest curve around the unit disk with excess area beta and largest
// distance 1 + t from the origin (outer), or inside it with deficit beta and
// smallest distance 1 - t (inner).  curvature is the signed curvature of the
// free arcs, or of the whole circle in the full_circle case.
struct MinCurveResult {
  bool outer = true;
  double t = 0.0;
  double beta = 0.0;
  double length = 0.0;
  double contact_angle = 0.0;
  double t_eff = 0.0;
  CurveCase case_tag = CurveCase::tangent_segment;
  double curvature = 0.0;
};

inline void to_json(json& j, const MinCurveResult& r) {
  j = json{{"family", r.outer ? "outer" : "inner"},
           {"t", r.t},
           {"beta", r.beta},
           {"length", r.length},
           {"contact_angle", r.contact_angle},
           {"t_eff", r.t_eff},
           {"case", case_name(r.case_tag)},
           {"curvature", r.curvature}};
}

namespace detail {

// Arc leaving the unit circle at P = e(theta), tangent to it, running
// clockwise with signed curvature kappa until it meets the positive axis.
struct ContactArc {
  double psi = 0.0;      // turning angle
  double length = 0.0;
  double xbar = 0.0;     // axis crossing
  double area = 0.0;     // area of O -> xbar -> arc -> P
};

inline ContactArc contact_arc(double theta, double kappa) {
  const double s = std::sin(theta), co = std::cos(theta);
  const double v = std::clamp((1.0 - kappa) * s, -1.0, 1.0);
  const double phi = std::asin(v);
  ContactArc a;
  a.psi = theta - phi;
  if (std::abs(a.psi) > 0.5 || std::abs(kappa) > 1e-3) {
    a.length = a.psi / kappa;
  } else {
    // sin(psi) = kappa g, free of the 0/0 at kappa = 0
    const double g = s * (s * s * (2.0 - kappa) / (std::cos(phi) + co) + co);
    const double z = kappa * g;
    a.length = std::abs(z) < 1e-8 ? g : g * std::asin(z) / z;
  }
  const double p = a.psi;
  const double sinc = std::abs(p) < 1e-8 ? 1.0 : std::sin(p) / p;
  const double cosc = std::abs(p) < 1e-8 ? 0.5 * p : 2.0 * std::sin(0.5 * p) * std::sin(0.5 * p) / p;
  const double S = a.length * sinc, V = a.length * cosc;
  a.xbar = co + s * S - co * V;
  const double hseg = std::abs(p) < 1e-3 ? p / 6.0 - p * p * p / 120.0 : (p - std::sin(p)) / (p * p);
  a.area = 0.5 * a.xbar * s + 0.5 * a.length * a.length * hseg;
  return a;
}

inline Vec2 contact_arc_point(double theta, double kappa, double w) {
  const double s = std::sin(theta), co = std::cos(theta);
  const double p = kappa * w;
  const double S = std::abs(p) < 1e-8 ? w : std::sin(p) / kappa;
  const double V = std::abs(p) < 1e-8 ? 0.5 * kappa * w * w : 2.0 * std::sin(0.5 * p) * std::sin(0.5 * p) / kappa;
  return {co + s * S - co * V, s - co * S - s * V};
}

// circle tangent to the unit circle at e(theta) through (a, 0)
inline double apex_curvature(double theta, double a) {
  const double co = std::cos(theta);
  return 2.0 * (1.0 - a * co) / (a * a - 2.0 * a * co + 1.0);
}

inline MinCurveResult assemble(bool outer, double t, double beta, double theta, double kappa, double t_eff,
                               CurveCase tag) {
  const ContactArc a = contact_arc(theta, kappa);
  MinCurveResult r;
  r.outer = outer;
  r.t = t;
  r.beta = beta;
  r.contact_angle = theta;
  r.t_eff = t_eff;
  r.case_tag = tag;
  r.curvature = kappa;
  r.length = 2.0 * kPi - 2.0 * theta + 2.0 * a.length + 2.0 * (t - t_eff);
  return r;
}

}  // namespace detail

// Excess area of the outer family with apex at 1 + t, contact angle theta.
inline double outer_corner_area(double t, double theta) {
  return 2.0 * detail::contact_arc(theta, detail::apex_curvature(theta, 1.0 + t)).area - theta;
}

inline double outer_tangent_area(double theta) {
  return 2.0 * detail::contact_arc(theta, 1.0 - 1.0 / std::sin(theta)).area - theta;
}

inline double inner_corner_area(double t, double theta) {
  return theta - 2.0 * detail::contact_arc(theta, detail::apex_curvature(theta, 1.0 - t)).area;
}

inline double inner_tangent_area(double theta) {
  return theta - 2.0 * detail::contact_arc(theta, 1.0 + 1.0 / std::sin(theta)).area;
}

inline MinCurveResult min_curve_outer(double t, double beta) {
  if (!std::isfinite(t) || !std::isfinite(beta)) throw PreconditionError("min_curve_outer: non-finite input");
  if (!(t > 0.0) || beta < 0.0) throw FeasibilityError("min_curve_outer: need t > 0 and beta >= 0");
  const double a = 1.0 + t;
  if (beta > (kPi * a * a - kPi) * (1.0 + 1e-12)) throw FeasibilityError("min_curve_outer: beta exceeds pi(1+t)^2 - pi");
  MinCurveResult r;
  r.outer = true;
  r.t = t;
  r.beta = beta;
  if (beta == 0.0) {
    r.length = 2.0 * kPi + 2.0 * t;
    r.case_tag = CurveCase::tangent_segment;
    r.curvature = 1.0;
    return r;
  }
  const double half = 1.0 + 0.5 * t;
  if (beta >= kPi * half * half - kPi) {
    const double R = std::sqrt(1.0 + beta / kPi);
    r.length = 2.0 * kPi * R;
    r.contact_angle = kPi;
    r.t_eff = t;
    r.case_tag = CurveCase::full_circle;
    r.curvature = 1.0 / R;
    return r;
  }
  // the tangent arcs reach the axis at 1 + t exactly at theta_t
  const double theta_t = 2.0 * (std::atan(a) - 0.25 * kPi);
  if (beta <= outer_tangent_area(theta_t)) {
    const double th = detail::bisect_increasing(outer_tangent_area, 0.0, theta_t, beta, 1e-15);
    const double t_ext = std::tan(0.25 * kPi + 0.5 * th) - 1.0;
    return detail::assemble(true, t, beta, th, 1.0 - 1.0 / std::sin(th), t_ext, CurveCase::tangent_segment);
  }
  const double th =
      detail::bisect_increasing([&](double x) { return outer_corner_area(t, x); }, theta_t, kPi, beta, 1e-15);
  const double kappa = detail::apex_curvature(th, a);
  const CurveCase tag = std::abs(kappa) < 1e-12 ? CurveCase::corner_straight
                        : kappa > 0.0          ? CurveCase::corner_convex
                                               : CurveCase::corner_concave;
  return detail::assemble(true, t, beta, th, kappa, t, tag);
}

inline MinCurveResult min_curve_inner(double t, double beta) {
  if (!std::isfinite(t) || !std::isfinite(beta)) throw PreconditionError("min_curve_inner: non-finite input");
  if (!(t > 0.0 && t <= 1.0) || beta < 0.0) throw FeasibilityError("min_curve_inner: need 0 < t <= 1 and beta >= 0");
  const double a = 1.0 - t;
  if (beta > (kPi - kPi * a * a) * (1.0 + 1e-12)) throw FeasibilityError("min_curve_inner: beta exceeds pi - pi(1-t)^2");
  MinCurveResult r;
  r.outer = false;
  r.t = t;
  r.beta = beta;
  if (beta == 0.0) {
    r.length = 2.0 * kPi + 2.0 * t;
    r.case_tag = CurveCase::tangent_segment;
    r.curvature = 1.0;
    return r;
  }
  const double half = 1.0 - 0.5 * t;
  if (beta >= kPi - kPi * half * half) {
    const double R = std::sqrt(1.0 - beta / kPi);
    r.length = 2.0 * kPi * R;
    r.contact_angle = kPi;
    r.t_eff = t;
    r.case_tag = CurveCase::full_circle;
    r.curvature = 1.0 / R;
    return r;
  }
  const double theta_t = 0.5 * kPi - 2.0 * std::atan(a);
  if (beta <= inner_tangent_area(theta_t)) {
    const double th = detail::bisect_increasing(inner_tangent_area, 0.0, theta_t, beta, 1e-15);
    const double t_int = 1.0 - std::tan(0.25 * kPi - 0.5 * th);
    return detail::assemble(false, t, beta, th, 1.0 + 1.0 / std::sin(th), t_int, CurveCase::tangent_segment);
  }
  const double th =
      detail::bisect_increasing([&](double x) { return inner_corner_area(t, x); }, theta_t, kPi, beta, 1e-15);
  return detail::assemble(false, t, beta, th, detail::apex_curvature(th, a), t, CurveCase::corner);
}

// Closed counter-clockwise polyline of a minimal curve.  The radial segment
// of the tangent case appears out and back.
inline std::vector<Vec2> min_curve_points(const MinCurveResult& r, std::size_t n = 720) {
  std::vector<Vec2> pts;
  if (r.case_tag == CurveCase::full_circle) {
    const double R = 1.0 / r.curvature;
    const double cx = r.outer ? 1.0 + r.t - R : -(R - 1.0 + r.t);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
      pts.push_back({cx + R * std::cos(u), R * std::sin(u)});
    }
    return pts;
  }
  const double th = r.contact_angle;
  const std::size_t n_unit = std::max<std::size_t>(8, n / 2);
  for (std::size_t i = 0; i <= n_unit; ++i) {
    const double u = th + (2.0 * kPi - 2.0 * th) * static_cast<double>(i) / static_cast<double>(n_unit);
    pts.push_back({std::cos(u), std::sin(u)});
  }
  if (th == 0.0) {
    // zero-area spike
    const double tip = r.outer ? 1.0 + r.t : 1.0 - r.t;
    pts.push_back({tip, 0.0});
    return pts;
  }
  const double L = detail::contact_arc(th, r.curvature).length;
  const std::size_t n_arc = std::max<std::size_t>(8, n / 4);
  for (std::size_t i = 1; i <= n_arc; ++i) {
    const Vec2 p = detail::contact_arc_point(th, r.curvature, L * static_cast<double>(i) / static_cast<double>(n_arc));
    pts.push_back({p.x, -p.y});
  }
  if (r.t > r.t_eff) {
    const double tip = r.outer ? 1.0 + r.t : 1.0 - r.t;
    const Vec2 base = pts.back();
    pts.push_back({tip, 0.0});
    pts.push_back(base);
  }
  for (std::size_t i = n_arc; i-- > 1;)
    pts.push_back(detail::contact_arc_point(th, r.curvature, L * static_cast<double>(i) / static_cast<double>(n_arc)));
  return pts;
}

// beta / (t_eff theta) for the minimal curves and nu / (d theta) for the caps
// over t in (0, 1] and beta across the corner and tangent range.  Values hold
// the observed intervals; the report fails only on a nonpositive or
// non-finite ratio.
inline CheckReport comparability_interval(std::size_t n_t = 20, std::size_t n_beta = 20) {
  CheckReport rep;
  double lo_curve = 1e300, hi_curve = 0.0, lo_cap = 1e300, hi_cap = 0.0;
  for (bool outer : {true, false}) {
    for (double t : linspace(1.0 / static_cast<double>(n_t), 1.0, n_t)) {
      const double half = outer ? 1.0 + 0.5 * t : 1.0 - 0.5 * t;
      const double beta_max = outer ? kPi * half * half - kPi : kPi - kPi * half * half;
      for (std::size_t k = 1; k < n_beta; ++k) {
        const double beta = beta_max * static_cast<double>(k) / static_cast<double>(n_beta);
        const MinCurveResult m = outer ? min_curve_outer(t, beta) : min_curve_inner(t, beta);
        const double q = beta / (m.t_eff * m.contact_angle);
        const CapArc cap = cap_arc(m.contact_angle, outer ? beta : -beta);
        const double qc = beta / (cap.depth * m.contact_angle);
        ++rep.samples_used;
        if (!(q > 0.0 && std::isfinite(q) && qc > 0.0 && std::isfinite(qc)))
          rep.add_witness(json{{"outer", outer}, {"t", t}, {"beta", beta}});
        if (cap.depth > 1.0) continue;
        lo_curve = std::min(lo_curve, q);
        hi_curve = std::max(hi_curve, q);
        lo_cap = std::min(lo_cap, qc);
        hi_cap = std::max(hi_cap, qc);
      }
    }
  }
  rep.values["curve_ratio_min"] = lo_curve;
  rep.values["curve_ratio_max"] = hi_curve;
  rep.values["cap_ratio_min"] = lo_cap;
  rep.values["cap_ratio_max"] = hi_cap;
  rep.extremal_ratio = std::max(hi_curve / lo_curve, hi_cap / lo_cap);
  return rep;
}

// ---- perimeter deficit ---------------------------------------------------

struct DeficitReport {
  double perimeter_gap = 0.0;
  AsymmetryReport asymmetry;
  std::optional<double> ratio;
};

inline void to_json(json& j, const DeficitReport& r) {
  j = json{{"perimeter_gap", r.perimeter_gap}, {"asymmetry", r.asymmetry}};
  j["ratio"] = r.ratio ? json(*r.ratio) : json(nullptr);
}

// (P(E) - 2 pi) / (nu (delta+ + delta-)) for a shape of area pi; no ratio
// when nu vanishes.
inline DeficitReport deficit_report(const StarShape& s) {
  DeficitReport d;
  d.asymmetry = fraenkel_center(s);
  d.perimeter_gap = perimeter(s) - 2.0 * kPi;
  const double den = d.asymmetry.nu * (d.asymmetry.delta_plus + d.asymmetry.delta_minus);
  if (d.asymmetry.nu > 1e-12 && den > 0.0) d.ratio = d.perimeter_gap / den;
  return d;
}

inline std::optional<double> deficit_ratio(const StarShape& s) { return deficit_report(s).ratio; }

// Random perturbation of the unit disk with modes 2..max_mode, amplitudes up
// to `amplitude` decaying like 1/k, rescaled to area pi.
inline StarShape random_perturbed_disk(std::mt19937_64& rng, int max_mode = 6, double amplitude = 0.05) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 1.0);
  StarShape s = disk();
  const double amp = amplitude * scale(rng);
  for (int k = 2; k <= max_mode; ++k) s.modes.push_back({k, amp * u(rng) / k, amp * u(rng) / k});
  s.r0 = std::sqrt(kPi / area(s));
  return s;
}

// Empirical infimum of deficit_ratio over n random perturbed disks.
inline CheckReport deficit_suite(std::uint64_t seed, std::size_t n, int max_mode = 6, double amplitude = 0.05) {
  std::mt19937_64 rng(seed);
  std::vector<StarShape> shapes;
  for (std::size_t i = 0; i < n; ++i) shapes.push_back(random_perturbed_disk(rng, max_mode, amplitude));
  std::vector<std::optional<double>> ratios(n);
  parallel_for(n, [&](std::size_t i) { ratios[i] = deficit_ratio(shapes[i]); });
  CheckReport rep;
  rep.samples_used = n;
  double lo = 1e300, hi = 0.0;
  std::size_t undefined = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ratios[i]) {
      ++undefined;
      continue;
    }
    lo = std::min(lo, *ratios[i]);
    hi = std::max(hi, *ratios[i]);
    if (!(*ratios[i] > 0.0)) rep.add_witness(json{{"index", i}, {"ratio", *ratios[i]}, {"shape", to_json_value(shapes[i])}});
  }
  rep.extremal_ratio = lo;
  rep.values["min_ratio"] = lo;
  rep.values["max_ratio"] = hi;
  rep.values["undefined"] = static_cast<double>(undefined);
  return rep;
}

// ---- pictures ----------------------------------------------------------

inline std::vector<Vec2> arc_points(Vec2 c, double r, double a0, double a1, std::size_t n = 96) {
  std::vector<Vec2> p;
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * static_cast<double>(i) / static_cast<double>(n);
    p.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return p;
}

inline std::string lens_svg(double theta_bar, double delta) {
  const LensState s = lens_state_extended(theta_bar, delta);
  const double cb = std::cos(theta_bar), sb = std::sin(theta_bar);
  svg::Document d({-0.2, -1.2}, {1.6, 1.2});
  d.polyline(arc_points({0, 0}, 1.0, -theta_bar - 0.4, theta_bar + 0.4), {"black", "none", 1.2, ""});
  std::vector<Vec2> lens = arc_points({0, 0}, 1.0, theta_bar, -theta_bar);
  std::vector<Vec2> cap;
  if (std::abs(s.theta) < 1e-9) {
    cap = {{cb, -sb}, {cb, sb}};
  } else {
    cap = arc_points({s.eta, 0.0}, std::abs(s.rho), s.rho > 0 ? -s.theta : kPi - s.theta,
                     s.rho > 0 ? s.theta : kPi + s.theta);
    if (s.rho < 0) std::reverse(cap.begin(), cap.end());
  }
  lens.insert(lens.end(), cap.begin(), cap.end());
  d.polyline(lens, {"none", "#f4c7c7", 0.0, ""}, true);
  d.polyline(cap, {"#1f4fbf", "none", 1.6, ""});
  d.line({0, 0}, {cb, sb}, {"black", "none", 0.8, ""});
  d.line({0, 0}, {cb, -sb}, {"black", "none", 0.8, ""});
  d.line({0, 0}, {1.0 + delta, 0}, {"#666", "none", 0.8, "3,3"});
  d.dot({0, 0});
  d.dot({cb, sb});
  d.dot({cb, -sb});
  d.dot({1.0 + delta, 0});
  if (std::abs(s.eta) < 2.0) d.dot({s.eta, 0}, 2.5, "#1f4fbf");
  d.text({0.0, -0.08}, "O", 12, "end");
  d.text({cb + 0.03, sb}, "P");
  d.text({cb + 0.03, -sb - 0.06}, "Q");
  d.text({1.0 + delta + 0.03, -0.08}, "S");
  std::ostringstream cap_text;
  cap_text.precision(4);
  cap_text << "theta_bar=" << theta_bar << " delta=" << delta << " tau=" << s.tau << " mu=" << s.mu;
  d.text({-0.15, 1.1}, cap_text.str(), 11);
  return d.str();
}

inline std::string min_curve_svg(const MinCurveResult& r) {
  const double ext = r.outer ? 1.0 + r.t : 1.0;
  svg::Document d({-ext - 0.1, -ext - 0.1}, {ext + 0.1, ext + 0.25});
  d.polyline(min_curve_points(r), {"#1f4fbf", "#f4c7c7", 1.4, ""}, true);
  d.circle({0, 0}, 1.0, {"black", "none", 1.0, "4,3"});
  d.dot({0, 0});
  const double tip = r.outer ? 1.0 + r.t : 1.0 - r.t;
  d.dot({tip, 0});
  std::ostringstream cap_text;
  cap_text.precision(4);
  cap_text << (r.outer ? "outer" : "inner") << " t=" << r.t << " beta=" << r.beta << " length=" << r.length << " "
           << case_name(r.case_tag);
  d.text({-ext, ext + 0.12}, cap_text.str(), 11);
  return d.str();
}

}  // namespace gamow
