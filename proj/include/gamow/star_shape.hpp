#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "gamow/core.hpp"

namespace gamow {

struct Mode {
  int k = 1;
  double a = 0.0;
  double b = 0.0;
  bool operator==(const Mode&) const = default;
};

// Star-shaped planar set with radius r(t) = r0 (1 + sum a_k cos kt + b_k sin kt)
// around `center`.  No modes means an exact disk.
struct StarShape {
  Vec2 center;
  double r0 = 1.0;
  std::vector<Mode> modes;
  bool operator==(const StarShape&) const = default;
};

inline StarShape disk(double radius = 1.0, Vec2 center = {}) { return {center, radius, {}}; }

inline bool is_disk(const StarShape& s) {
  return std::all_of(s.modes.begin(), s.modes.end(), [](const Mode& m) { return m.a == 0.0 && m.b == 0.0; });
}

inline int max_mode(const StarShape& s) {
  int k = 0;
  for (const auto& m : s.modes) k = std::max(k, m.k);
  return k;
}

// relative radius 1 + sum(...) and its derivative
inline double radial_factor(const StarShape& s, double t) {
  double f = 1.0;
  for (const auto& m : s.modes) f += m.a * std::cos(m.k * t) + m.b * std::sin(m.k * t);
  return f;
}

inline double radius(const StarShape& s, double t) { return s.r0 * radial_factor(s, t); }

inline double radius_derivative(const StarShape& s, double t) {
  double d = 0.0;
  for (const auto& m : s.modes) d += m.k * (-m.a * std::sin(m.k * t) + m.b * std::cos(m.k * t));
  return s.r0 * d;
}

inline Vec2 boundary_point(const StarShape& s, double t) {
  const double r = radius(s, t);
  return {s.center.x + r * std::cos(t), s.center.y + r * std::sin(t)};
}

// dx/dt of the boundary parametrization
inline Vec2 boundary_tangent(const StarShape& s, double t) {
  const double r = radius(s, t);
  const double dr = radius_derivative(s, t);
  const double c = std::cos(t), sn = std::sin(t);
  return {dr * c - r * sn, dr * sn + r * c};
}

inline std::vector<Vec2> boundary(const StarShape& s, std::size_t n) {
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = boundary_point(s, 2.0 * kPi * static_cast<double>(i) / n);
  return pts;
}

inline void validate(const StarShape& s, std::size_t n = 4096) {
  if (!(s.r0 > 0.0) || !std::isfinite(s.r0)) throw PreconditionError("star shape: r0 must be > 0");
  for (const auto& m : s.modes) {
    if (m.k < 1) throw PreconditionError("star shape: mode index must be >= 1");
    if (!std::isfinite(m.a) || !std::isfinite(m.b)) throw PreconditionError("star shape: non-finite mode");
  }
  n = std::max<std::size_t>(n, 16 * static_cast<std::size_t>(max_mode(s)));
  for (std::size_t i = 0; i < n; ++i)
    if (radial_factor(s, 2.0 * kPi * static_cast<double>(i) / n) <= 0.0)
      throw PreconditionError("star shape: radius must stay positive");
}

inline double min_radial_factor(const StarShape& s, std::size_t n = 4096) {
  n = std::max<std::size_t>(n, 16 * static_cast<std::size_t>(max_mode(s)));
  double mn = 1e300;
  for (std::size_t i = 0; i < n; ++i) mn = std::min(mn, radial_factor(s, 2.0 * kPi * static_cast<double>(i) / n));
  return mn;
}

// Duplicate indices are added together; result sorted by k.
inline std::vector<Mode> merged_modes(const StarShape& s) {
  std::map<int, Mode> acc;
  for (const auto& m : s.modes) {
    auto& e = acc[m.k];
    e.k = m.k;
    e.a += m.a;
    e.b += m.b;
  }
  std::vector<Mode> out;
  for (auto& [k, m] : acc) out.push_back(m);
  return out;
}

// 1/2 int r^2 dt, by Parseval: exact for every trigonometric radius.
inline double area(const StarShape& s) {
  double q = 0.0;
  for (const auto& m : merged_modes(s)) q += m.a * m.a + m.b * m.b;
  return kPi * s.r0 * s.r0 * (1.0 + 0.5 * q);
}

// int sqrt(r^2 + r'^2) dt, periodic trapezoid rule.
inline double perimeter(const StarShape& s, std::size_t n = 4096) {
  if (is_disk(s)) return 2.0 * kPi * s.r0;
  n = std::max<std::size_t>(n, 32 * static_cast<std::size_t>(max_mode(s)));
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / n;
    v[i] = std::hypot(radius(s, t), radius_derivative(s, t));
  }
  return pairwise_sum(v) * 2.0 * kPi / static_cast<double>(n);
}

// Dilation about the shape's own centre.
inline StarShape scale(const StarShape& s, double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("scale: lambda must be > 0");
  StarShape out = s;
  out.r0 *= lambda;
  return out;
}

inline StarShape translate(const StarShape& s, Vec2 v) {
  StarShape out = s;
  out.center += v;
  return out;
}

// Centre of mass: c + (1 / 3A) int r^3 (cos t, sin t) dt.
inline Vec2 centroid(const StarShape& s, std::size_t n = 4096) {
  if (is_disk(s)) return s.center;
  n = std::max<std::size_t>(n, 8 * static_cast<std::size_t>(max_mode(s)));
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / n;
    const double r3 = std::pow(radius(s, t), 3);
    mx += r3 * std::cos(t);
    my += r3 * std::sin(t);
  }
  const double h = 2.0 * kPi / static_cast<double>(n);
  const double A = area(s);
  return {s.center.x + mx * h / (3.0 * A), s.center.y + my * h / (3.0 * A)};
}

inline bool contains(const StarShape& s, Vec2 p) {
  const Vec2 d = p - s.center;
  const double r = norm(d);
  if (r == 0.0) return true;
  return r <= radius(s, std::atan2(d.y, d.x));
}

// Truncated Fourier series of the centred ellipse radius
// r(t) = ab / sqrt((b cos t)^2 + (a sin t)^2).
inline StarShape ellipse(double a, double b, int n_modes = 40, Vec2 center = {}) {
  if (!(a > 0.0 && b > 0.0)) throw PreconditionError("ellipse: semi-axes must be > 0");
  const std::size_t n = 4096;
  std::vector<double> r(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / n;
    r[i] = a * b / std::hypot(b * std::cos(t), a * std::sin(t));
    mean += r[i];
  }
  mean /= static_cast<double>(n);
  StarShape s{center, mean, {}};
  for (int k = 1; k <= n_modes; ++k) {
    double ca = 0.0, cb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 2.0 * kPi * static_cast<double>(i) / n;
      ca += r[i] * std::cos(k * t);
      cb += r[i] * std::sin(k * t);
    }
    ca *= 2.0 / (static_cast<double>(n) * mean);
    cb *= 2.0 / (static_cast<double>(n) * mean);
    if (std::abs(ca) > 1e-16 || std::abs(cb) > 1e-16) s.modes.push_back({k, ca, cb});
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON: {"version": 1, "center": [x, y], "r0": r, "modes": [[k, a, b], ...]}

inline json to_json_value(const StarShape& s) {
  json modes = json::array();
  for (const auto& m : s.modes) modes.push_back(json::array({m.k, m.a, m.b}));
  return json{{"version", 1}, {"center", {s.center.x, s.center.y}}, {"r0", s.r0}, {"modes", modes}};
}

inline StarShape star_shape_from_json(const json& j) {
  if (!j.is_object()) throw PreconditionError("star shape JSON must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "version" && it.key() != "center" && it.key() != "r0" && it.key() != "modes")
      throw PreconditionError("star shape JSON: unknown key " + it.key());
  if (j.contains("version") && j.at("version") != 1) throw PreconditionError("star shape JSON: unsupported version");
  StarShape s;
  try {
    if (j.contains("center")) {
      const auto& c = j.at("center");
      if (!c.is_array() || c.size() != 2) throw PreconditionError("star shape JSON: center must be [x, y]");
      s.center = {c[0].get<double>(), c[1].get<double>()};
    }
    s.r0 = j.at("r0").get<double>();
    if (j.contains("modes")) {
      for (const auto& m : j.at("modes")) {
        if (!m.is_array() || m.size() != 3) throw PreconditionError("star shape JSON: modes must be [k, a, b]");
        s.modes.push_back({m[0].get<int>(), m[1].get<double>(), m[2].get<double>()});
      }
    }
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("star shape JSON: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace gamow
