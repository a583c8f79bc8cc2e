#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "gamow/core.hpp"
#include "gamow/quadrature.hpp"
#include "gamow/raster.hpp"
#include "gamow/star_shape.hpp"

namespace gamow {

namespace detail {

// int_0^{2 pi} |f| for a smooth periodic f: sign changes on an n-point grid
// are refined to roots and every piece gets an 8-point Gauss rule.
inline double integrate_abs_periodic(const std::function<double(double)>& f, std::size_t n) {
  const auto& gl = quad::gauss_legendre<8>();
  const double h = 2.0 * kPi / static_cast<double>(n);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(h * static_cast<double>(i));
  std::vector<double> parts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = h * static_cast<double>(i), b = a + h;
    std::vector<double> cuts{a};
    if ((vals[i] < 0.0) != (vals[i + 1] < 0.0) && vals[i] != 0.0 && vals[i + 1] != 0.0) {
      boost::uintmax_t it = 60;
      auto r = boost::math::tools::toms748_solve(f, a, b, vals[i], vals[i + 1],
                                                 boost::math::tools::eps_tolerance<double>(50), it);
      cuts.push_back(0.5 * (r.first + r.second));
    }
    cuts.push_back(b);
    double s = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double m = 0.5 * (cuts[c] + cuts[c + 1]), w = 0.5 * (cuts[c + 1] - cuts[c]);
      double piece = 0.0;
      for (std::size_t q = 0; q < gl.x.size(); ++q) piece += gl.w[q] * f(m + w * gl.x[q]);
      s += std::abs(piece * w);
    }
    parts[i] = s;
  }
  return pairwise_sum(parts);
}

inline std::size_t angular_intervals(const StarShape& a, const StarShape& b) {
  return std::max<std::size_t>(512, 8 * static_cast<std::size_t>(std::max(max_mode(a), max_mode(b))));
}

// Radius of the disk (centre z, radius R) seen from an interior point c.
inline double disk_radius_from(Vec2 c, Vec2 z, double R, double t) {
  const Vec2 w = z - c;
  const double we = w.x * std::cos(t) + w.y * std::sin(t);
  return we + std::sqrt(R * R - dot(w, w) + we * we);
}

}  // namespace detail

// |a \ b| + |b \ a|.  Shapes sharing a centre are integrated in angle, as is a
// disk whose interior contains the other shape's centre; anything else is
// rasterized at `pitch`.
inline double symmetric_difference(const StarShape& a, const StarShape& b, double pitch = 1.0 / 128.0) {
  const std::size_t n = detail::angular_intervals(a, b);
  if (a.center == b.center) {
    return 0.5 * detail::integrate_abs_periodic(
                     [&](double t) {
                       const double ra = radius(a, t), rb = radius(b, t);
                       return ra * ra - rb * rb;
                     },
                     n);
  }
  auto via_disk = [&](const StarShape& s, const StarShape& d) -> std::optional<double> {
    if (!is_disk(d) || norm(d.center - s.center) >= d.r0) return std::nullopt;
    return 0.5 * detail::integrate_abs_periodic(
                     [&](double t) {
                       const double rs = radius(s, t);
                       const double rd = detail::disk_radius_from(s.center, d.center, d.r0, t);
                       return rs * rs - rd * rd;
                     },
                     n);
  };
  if (auto v = via_disk(a, b)) return *v;
  if (auto v = via_disk(b, a)) return *v;
  return symmetric_difference(rasterize(a, pitch), rasterize(b, pitch));
}

struct AsymmetryReport {
  Vec2 optimal_translation;
  double asymmetry = 0.0;
  double nu = 0.0;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
};

inline void to_json(json& j, const AsymmetryReport& r) {
  j = json{{"optimal_translation", {r.optimal_translation.x, r.optimal_translation.y}},
           {"asymmetry", r.asymmetry},
           {"nu", r.nu},
           {"delta_plus", r.delta_plus},
           {"delta_minus", r.delta_minus}};
}

// Extremes of |x(t) - z| over the boundary: dense sampling plus a parabolic
// refinement through the best sample and its neighbours.
inline std::pair<double, double> boundary_distance_range(const StarShape& s, Vec2 z, std::size_t n = 4096) {
  n = std::max<std::size_t>(n, 32 * static_cast<std::size_t>(max_mode(s)));
  const double h = 2.0 * kPi / static_cast<double>(n);
  auto d = [&](double t) { return norm(boundary_point(s, t) - z); };
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = d(h * static_cast<double>(i));
  auto refine = [&](std::size_t i) {
    const double f0 = v[(i + n - 1) % n], f1 = v[i], f2 = v[(i + 1) % n];
    const double den = f0 - 2.0 * f1 + f2;
    if (den == 0.0) return f1;
    const double off = std::clamp(0.5 * (f0 - f2) / den, -1.0, 1.0);
    return d(h * (static_cast<double>(i) + off));
  };
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double lo = std::min(*mn, refine(static_cast<std::size_t>(mn - v.begin())));
  const double hi = std::max(*mx, refine(static_cast<std::size_t>(mx - v.begin())));
  return {lo, hi};
}

// Fraenkel asymmetry of a shape of area pi: the unit disk centre z is found by
// pattern search from the centroid with step halving down to `min_step`.
inline AsymmetryReport fraenkel_center(const StarShape& s, double min_step = 1e-5) {
  validate(s);
  const double A = area(s);
  if (std::abs(A - kPi) > 1e-8 * kPi) throw PreconditionError("fraenkel_center: area must equal pi");
  auto objective = [&](Vec2 z) { return symmetric_difference(s, disk(1.0, z)); };
  Vec2 z = centroid(s);
  double best = objective(z);
  double step = 0.05;
  const Vec2 dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (step >= min_step && best > 0.0) {
    bool moved = false;
    for (const Vec2& d : dirs) {
      const Vec2 trial = z + d * step;
      const double v = objective(trial);
      if (v < best) {
        best = v;
        z = trial;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  AsymmetryReport rep;
  rep.optimal_translation = z;
  rep.asymmetry = best;
  rep.nu = best / 2.0;
  const auto [dmin, dmax] = boundary_distance_range(s, z);
  rep.delta_plus = std::max(0.0, dmax - 1.0);
  rep.delta_minus = contains(s, z) ? std::clamp(1.0 - dmin, 0.0, 1.0) : 1.0;
  return rep;
}

}  // namespace gamow
