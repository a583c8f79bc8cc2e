#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include <boost/math/special_functions/gamma.hpp>

#include "gamow/core.hpp"
#include "gamow/quadrature.hpp"

namespace gamow {

enum class Family { power, gauss_power, indicator, constant, tabulated };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::power: return "power";
    case Family::gauss_power: return "gauss_power";
    case Family::indicator: return "indicator";
    case Family::constant: return "constant";
    case Family::tabulated: return "tabulated";
  }
  return "?";
}

namespace detail {

// integral of c * s^e over [a, b]
inline double power_integral(double c, double e, double a, double b) {
  if (std::abs(e + 1.0) < 1e-12) return c * std::log(b / a);
  return c * (std::pow(b, e + 1.0) - std::pow(a, e + 1.0)) / (e + 1.0);
}

// Piecewise power-law radial profile.  Between samples g is interpolated
// linearly in log-log; below the first sample a power law fitted on the
// smallest decade is used, above the last sample the last segment continues.
struct Table {
  std::vector<double> r;
  std::vector<double> g;
  std::vector<double> q;  // exponent of each segment, q.size() = r.size() - 1
  double head_p = 0.0;
  double head_c = 0.0;
  std::vector<double> mass_at;  // M(r_i) = int_0^{r_i} s g(s) ds
  std::vector<double> pot_at;   // U(r_i) = int_0^{r_i} M(s)/s ds
  bool mass_finite = false;
  std::string source;

  std::size_t segment(double x) const {
    auto it = std::upper_bound(r.begin(), r.end(), x);
    std::size_t i = static_cast<std::size_t>(it - r.begin());
    if (i == 0) return 0;
    return std::min(i - 1, q.size() - 1);
  }

  double eval(double x) const {
    if (x < r.front()) return head_c * std::pow(x, head_p);
    const std::size_t i = segment(x);
    return g[i] * std::pow(x / r[i], q[i]);
  }

  // M and U on a segment starting at node i (also used past the last node).
  double seg_mass(std::size_t i, double x) const {
    const double c = g[i] / std::pow(r[i], q[i]);
    return mass_at[i] + power_integral(c, q[i] + 1.0, r[i], x);
  }

  double seg_pot(std::size_t i, double x) const {
    const double a = r[i];
    const double c = g[i] / std::pow(a, q[i]);
    const double e = q[i] + 2.0;
    const double l = std::log(x / a);
    double extra;
    if (std::abs(e) < 1e-12) {
      extra = c * l * l / 2.0;
    } else {
      const double ae = std::pow(a, e);
      extra = c / e * ((std::pow(x, e) - ae) / e - ae * l);
    }
    return pot_at[i] + mass_at[i] * l + extra;
  }

  double mass(double x) const {
    if (x < r.front()) return head_c * std::pow(x, head_p + 2.0) / (head_p + 2.0);
    return seg_mass(segment(x), x);
  }

  double potential(double x) const {
    if (x < r.front()) {
      const double e = head_p + 2.0;
      return head_c * std::pow(x, e) / (e * e);
    }
    return seg_pot(segment(x), x);
  }

  std::optional<double> moment(double m, double x) const {
    const double e = head_p + m + 1.0;
    if (e <= 0.0) return std::nullopt;
    const double r0 = r.front();
    if (x <= r0) return head_c * std::pow(x, e) / e;
    double total = head_c * std::pow(r0, e) / e;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double lo = r[i];
      const double hi = (i + 1 == q.size()) ? std::max(x, r[i + 1]) : r[i + 1];
      if (lo >= x) break;
      const double c = g[i] / std::pow(lo, q[i]);
      total += power_integral(c, q[i] + m, lo, std::min(hi, x));
    }
    return total;
  }
};

inline std::shared_ptr<const Table> build_table(std::vector<double> r, std::vector<double> g,
                                                std::string source) {
  if (r.size() != g.size() || r.size() < 2)
    throw PreconditionError("tabulated kernel needs at least two (r, g) samples");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0) || !(g[i] > 0.0))
      throw PreconditionError("tabulated kernel samples must have r > 0 and g > 0");
    if (i > 0 && !(r[i] > r[i - 1]))
      throw PreconditionError("tabulated kernel radii must be strictly increasing");
  }
  const double r0 = r.front();
  std::size_t head_n = 0;
  while (head_n < r.size() && r[head_n] <= 10.0 * r0 * (1.0 + 1e-12)) ++head_n;
  if (r0 > 0.1 || head_n < 2)
    throw InsufficientData(
        "tabulated kernel: need samples near 0 (first radius <= 0.1 and two samples in its decade)");

  auto t = std::make_shared<Table>();
  t->r = std::move(r);
  t->g = std::move(g);
  t->source = std::move(source);
  for (std::size_t i = 0; i + 1 < t->r.size(); ++i)
    t->q.push_back(std::log(t->g[i + 1] / t->g[i]) / std::log(t->r[i + 1] / t->r[i]));

  // least-squares slope in log-log over the smallest decade
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < head_n; ++i) {
    const double lx = std::log(t->r[i]);
    const double ly = std::log(t->g[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(head_n);
  t->head_p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  t->head_c = t->g[0] / std::pow(r0, t->head_p);

  t->mass_finite = t->head_p > -2.0;
  if (t->mass_finite) {
    const double e = t->head_p + 2.0;
    t->mass_at.assign(t->r.size(), 0.0);
    t->pot_at.assign(t->r.size(), 0.0);
    t->mass_at[0] = t->head_c * std::pow(r0, e) / e;
    t->pot_at[0] = t->head_c * std::pow(r0, e) / (e * e);
    for (std::size_t i = 0; i + 1 < t->r.size(); ++i) {
      t->mass_at[i + 1] = t->seg_mass(i, t->r[i + 1]);
      t->pot_at[i + 1] = t->seg_pot(i, t->r[i + 1]);
    }
  }
  return t;
}

// U(r) = int_0^r M(s)/s ds for g = exp(-kappa r^2) r^-a, in the variable
// X = kappa r^2:  U = kappa^-s S(X) / 4,  S(X) = int_0^X gamma(s,u)/u du.
struct GaussPotential {
  double kappa = 0.0;
  double s = 0.0;  // (2 - a) / 2
  static constexpr double kSeriesMax = 8.0;
  static constexpr double kTableMax = 64.0;
  static constexpr double kStep = 0.05;
  double s_at_split = 0.0;
  std::vector<double> tail;   // E(X) = int_8^X Gamma(s,u)/u du on the grid
  std::vector<double> dtail;  // E'(X)
  double tail_inf = 0.0;

  double series(double x) const {
    double sum = 0.0;
    double xp = std::pow(x, s);  // x^(s+n) / n!
    for (int n = 0; n < 200; ++n) {
      const double d = s + n;
      const double term = xp / (d * d);
      sum += (n % 2 == 0) ? term : -term;
      if (n > x && std::abs(term) < 1e-18 * std::abs(sum)) break;
      xp *= x / (n + 1);
    }
    return sum;
  }

  double tail_integral(double x) const {
    if (x >= kTableMax) return tail_inf;
    const double u = (x - kSeriesMax) / kStep;
    std::size_t i = std::min(static_cast<std::size_t>(u), tail.size() - 2);
    const double t = u - static_cast<double>(i);
    const double h = kStep;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * tail[i] + (t3 - 2 * t2 + t) * h * dtail[i] +
           (-2 * t3 + 3 * t2) * tail[i + 1] + (t3 - t2) * h * dtail[i + 1];
  }

  double operator()(double r) const {
    const double x = kappa * r * r;
    double v;
    if (x <= kSeriesMax) {
      v = series(x);
    } else {
      v = s_at_split + boost::math::tgamma(s) * std::log(x / kSeriesMax) - tail_integral(x);
    }
    return 0.25 * std::pow(kappa, -s) * v;
  }
};

inline std::shared_ptr<const GaussPotential> build_gauss_potential(double kappa, double a) {
  auto p = std::make_shared<GaussPotential>();
  p->kappa = kappa;
  p->s = (2.0 - a) / 2.0;
  p->s_at_split = p->series(GaussPotential::kSeriesMax);
  const double s = p->s;
  auto integrand = [s](double u) { return boost::math::tgamma(s, u) / u; };
  const std::size_t n = static_cast<std::size_t>(
      std::lround((GaussPotential::kTableMax - GaussPotential::kSeriesMax) / GaussPotential::kStep));
  p->tail.assign(n + 1, 0.0);
  p->dtail.assign(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = GaussPotential::kSeriesMax + GaussPotential::kStep * static_cast<double>(i);
    p->dtail[i] = integrand(x);
    if (i > 0) {
      const double x0 = x - GaussPotential::kStep;
      p->tail[i] = p->tail[i - 1] +
                   boost::math::quadrature::gauss_kronrod<double, 21>::integrate(integrand, x0, x, 0, 0);
    }
  }
  p->tail_inf = p->tail[n];
  return p;
}

}  // namespace detail

// A radial interaction kernel g.  Build with the factory functions below so
// that derived caches (tables, potentials) are filled in.
struct KernelSpec {
  Family family = Family::power;
  double alpha = 0.0;
  double kappa = 0.0;
  double radius = 1.0;
  int dim = 2;
  std::shared_ptr<const detail::Table> table;
  std::shared_ptr<const detail::GaussPotential> gauss;
};

inline KernelSpec power(double alpha, int dim = 2) {
  if (!std::isfinite(alpha)) throw PreconditionError("power kernel: alpha must be finite");
  KernelSpec k;
  k.family = Family::power;
  k.alpha = alpha;
  k.dim = dim;
  return k;
}

inline KernelSpec gauss_power(double kappa, double alpha, int dim = 2) {
  if (!(kappa >= 0.0)) throw PreconditionError("gauss_power kernel: kappa must be >= 0");
  // alpha = 0 (plain Gaussian) is accepted as the bounded end of the family
  if (!(alpha >= 0.0 && alpha < dim))
    throw PreconditionError("gauss_power kernel: need 0 <= alpha < N");
  KernelSpec k;
  k.family = Family::gauss_power;
  k.kappa = kappa;
  k.alpha = alpha;
  k.dim = dim;
  if (kappa > 0.0 && alpha < 2.0) k.gauss = detail::build_gauss_potential(kappa, alpha);
  return k;
}

inline KernelSpec indicator(double radius, int dim = 2) {
  if (!(radius > 0.0)) throw PreconditionError("indicator kernel: radius must be > 0");
  KernelSpec k;
  k.family = Family::indicator;
  k.radius = radius;
  k.dim = dim;
  return k;
}

inline KernelSpec constant(int dim = 2) {
  KernelSpec k;
  k.family = Family::constant;
  k.dim = dim;
  return k;
}

inline KernelSpec tabulated(std::vector<double> r, std::vector<double> g, int dim = 2,
                            std::string source = "") {
  KernelSpec k;
  k.family = Family::tabulated;
  k.dim = dim;
  k.table = detail::build_table(std::move(r), std::move(g), std::move(source));
  return k;
}

// Two whitespace-separated columns r g; '#' starts a comment.
inline KernelSpec tabulated_from_file(const std::string& path, int dim = 2) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open kernel table " + path);
  std::vector<double> r, g;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    double a, b;
    if (ls >> a >> b) {
      r.push_back(a);
      g.push_back(b);
    }
  }
  return tabulated(std::move(r), std::move(g), dim, path);
}

inline double eval_kernel(const KernelSpec& k, double r) {
  if (!(r > 0.0)) throw DomainError("kernel undefined at r <= 0");
  switch (k.family) {
    case Family::power: return std::pow(r, k.alpha);
    case Family::gauss_power: return std::exp(-k.kappa * r * r) * std::pow(r, -k.alpha);
    case Family::indicator: return r <= k.radius ? 1.0 : 0.0;
    case Family::constant: return 1.0;
    case Family::tabulated: return k.table->eval(r);
  }
  return 0.0;
}

// int_0^x g(t) t^m dt, or nullopt when it diverges at 0.
inline std::optional<double> radial_moment(const KernelSpec& k, double m, double x) {
  if (x <= 0.0) return 0.0;
  switch (k.family) {
    case Family::power: {
      const double e = k.alpha + m + 1.0;
      if (e <= 0.0) return std::nullopt;
      return std::pow(x, e) / e;
    }
    case Family::gauss_power: {
      const double e = m + 1.0 - k.alpha;
      if (e <= 0.0) return std::nullopt;
      if (k.kappa == 0.0) return std::pow(x, e) / e;
      const double s = e / 2.0;
      return 0.5 * std::pow(k.kappa, -s) * boost::math::tgamma_lower(s, k.kappa * x * x);
    }
    case Family::indicator: {
      if (m + 1.0 <= 0.0) return std::nullopt;
      return std::pow(std::min(x, k.radius), m + 1.0) / (m + 1.0);
    }
    case Family::constant: {
      if (m + 1.0 <= 0.0) return std::nullopt;
      return std::pow(x, m + 1.0) / (m + 1.0);
    }
    case Family::tabulated: return k.table->moment(m, x);
  }
  return std::nullopt;
}

inline std::optional<double> admissibility_integral(const KernelSpec& k, int N) {
  if (N < 1) throw PreconditionError("admissibility_integral: need N >= 1");
  return radial_moment(k, N - 1.0, 1.0);
}

inline std::optional<double> lipschitz_integral(const KernelSpec& k, int N) {
  if (N < 2) throw PreconditionError("lipschitz_integral: need N >= 2");
  return radial_moment(k, N - 2.0, 1.0);
}

inline bool admissible(const KernelSpec& k) {
  return admissibility_integral(k, k.dim).has_value();
}

// Planar radial mass M(r) = int_0^r s g(s) ds.
inline double mass(const KernelSpec& k, double r) {
  if (r <= 0.0) return 0.0;
  switch (k.family) {
    case Family::power: {
      const double e = k.alpha + 2.0;
      if (e <= 0.0) throw PreconditionError("kernel not admissible in the plane");
      return std::pow(r, e) / e;
    }
    case Family::indicator: {
      const double x = std::min(r, k.radius);
      return 0.5 * x * x;
    }
    case Family::constant: return 0.5 * r * r;
    case Family::tabulated:
      if (!k.table->mass_finite) throw PreconditionError("kernel not admissible in the plane");
      return k.table->mass(r);
    case Family::gauss_power: {
      auto v = radial_moment(k, 1.0, r);
      if (!v) throw PreconditionError("kernel not admissible in the plane");
      return *v;
    }
  }
  return 0.0;
}

namespace detail {

// The FFTW planner is not thread safe; every plan create/destroy goes through
// this lock.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

inline std::shared_ptr<const GaussPotential> gauss_cache(double kappa, double a) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, std::shared_ptr<const GaussPotential>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{kappa, a}];
  if (!slot) slot = build_gauss_potential(kappa, a);
  return slot;
}

}  // namespace detail

// Planar logarithmic potential U(r) = int_0^r M(s)/s ds, so that the
// Laplacian of U(|x|) is g(|x|) and U(0) = 0.
inline double potential(const KernelSpec& k, double r) {
  if (r <= 0.0) return 0.0;
  switch (k.family) {
    case Family::power: {
      const double e = k.alpha + 2.0;
      if (e <= 0.0) throw PreconditionError("kernel not admissible in the plane");
      return std::pow(r, e) / (e * e);
    }
    case Family::indicator: {
      const double R = k.radius;
      if (r <= R) return 0.25 * r * r;
      return 0.25 * R * R + 0.5 * R * R * std::log(r / R);
    }
    case Family::constant: return 0.25 * r * r;
    case Family::tabulated:
      if (!k.table->mass_finite) throw PreconditionError("kernel not admissible in the plane");
      return k.table->potential(r);
    case Family::gauss_power: {
      if (k.alpha >= 2.0) throw PreconditionError("kernel not admissible in the plane");
      if (k.kappa == 0.0) {
        const double e = 2.0 - k.alpha;
        return std::pow(r, e) / (e * e);
      }
      const auto& gp = k.gauss ? k.gauss : detail::gauss_cache(k.kappa, k.alpha);
      return (*gp)(r);
    }
  }
  return 0.0;
}

// Leading term c r^b of the expansion of U at 0.  It limits the accuracy of
// the trapezoid rule unless b is an even integer.
inline std::optional<std::pair<double, double>> potential_singular_term(const KernelSpec& k) {
  switch (k.family) {
    case Family::power: {
      const double b = k.alpha + 2.0;
      return std::pair{b, 1.0 / (b * b)};
    }
    case Family::gauss_power: {
      const double b = 2.0 - k.alpha;
      return std::pair{b, 1.0 / (b * b)};
    }
    case Family::tabulated: {
      const double b = k.table->head_p + 2.0;
      return std::pair{b, k.table->head_c / (b * b)};
    }
    default: return std::nullopt;
  }
}

// g(0) when the kernel extends continuously to the origin.
inline std::optional<double> value_at_origin(const KernelSpec& k) {
  switch (k.family) {
    case Family::power:
      if (k.alpha == 0.0) return 1.0;
      if (k.alpha > 0.0) return 0.0;
      return std::nullopt;
    case Family::gauss_power:
      if (k.alpha == 0.0) return 1.0;
      return std::nullopt;
    case Family::indicator:
    case Family::constant: return 1.0;
    case Family::tabulated:
      if (k.table->head_p == 0.0) return k.table->head_c;
      if (k.table->head_p > 0.0) return 0.0;
      return std::nullopt;
  }
  return std::nullopt;
}

// Natural length scale used for default windows.
inline double length_scale(const KernelSpec& k) {
  if (k.family == Family::gauss_power && k.kappa > 0.0) return 1.0 / std::sqrt(k.kappa);
  if (k.family == Family::indicator) return k.radius;
  return 1.0;
}

// ---------------------------------------------------------------------------
// grammar: family(name=value, ...), e.g. power(alpha=-0.5)

inline std::string to_string(const KernelSpec& k) {
  std::ostringstream os;
  os.precision(17);
  os << family_name(k.family) << "(";
  switch (k.family) {
    case Family::power: os << "alpha=" << k.alpha; break;
    case Family::gauss_power: os << "kappa=" << k.kappa << ", alpha=" << k.alpha; break;
    case Family::indicator: os << "radius=" << k.radius; break;
    case Family::constant: break;
    case Family::tabulated: os << "file=" << (k.table ? k.table->source : ""); break;
  }
  if (k.dim != 2) os << (k.family == Family::constant ? "" : ", ") << "dim=" << k.dim;
  os << ")";
  return os.str();
}

inline KernelSpec parse_kernel(const std::string& text) {
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw PreconditionError("kernel spec must look like family(key=value, ...): " + text);
  const std::string fam = trim(s.substr(0, open));
  const std::string body = s.substr(open + 1, s.size() - open - 2);

  std::map<std::string, std::string> args;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw PreconditionError("kernel argument without '=': " + item);
    args[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
  auto num = [&](const std::string& key) {
    auto it = args.find(key);
    if (it == args.end()) throw PreconditionError("kernel " + fam + " needs " + key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != it->second.size()) throw PreconditionError("bad number for " + key + ": " + it->second);
    args.erase(it);
    return v;
  };
  int dim = 2;
  if (args.count("dim")) dim = static_cast<int>(num("dim"));
  if (dim < 1) throw PreconditionError("kernel dim must be >= 1");

  KernelSpec k;
  if (fam == "power") {
    k = power(num("alpha"), dim);
  } else if (fam == "gauss_power") {
    const double kappa = num("kappa");
    k = gauss_power(kappa, num("alpha"), dim);
  } else if (fam == "indicator") {
    k = indicator(num("radius"), dim);
  } else if (fam == "constant") {
    k = constant(dim);
  } else if (fam == "tabulated") {
    auto it = args.find("file");
    if (it == args.end()) throw PreconditionError("tabulated kernel needs file=PATH");
    const std::string path = it->second;
    args.erase(it);
    k = tabulated_from_file(path, dim);
  } else {
    throw PreconditionError("unknown kernel family: " + fam);
  }
  if (!args.empty()) throw PreconditionError("unknown kernel argument: " + args.begin()->first);
  return k;
}

// ---------------------------------------------------------------------------
// checks

// Monotonicity along rays: g(l r) <= g(r) for every grid pair (r, l).  The
// weaker scaled bound g(l r) <= l g(r) is reported as a flag only.
inline CheckReport check_decreasing(const KernelSpec& k,
                                    const std::vector<std::pair<double, double>>& grid) {
  if (grid.empty()) throw PreconditionError("check_decreasing: empty grid");
  CheckReport rep;
  bool scaled_ok = true;
  double worst = 0.0;
  for (auto [r, l] : grid) {
    if (!(r > 0.0) || !(l > 1.0)) throw PreconditionError("check_decreasing: need r > 0 and lambda > 1");
    const double a = eval_kernel(k, r);
    const double b = eval_kernel(k, l * r);
    if (a > 0.0) worst = std::max(worst, b / a);
    if (b > a * (1.0 + 1e-12)) rep.add_witness({{"r", r}, {"lambda", l}, {"g_r", a}, {"g_lambda_r", b}});
    if (b > l * a * (1.0 + 1e-12)) scaled_ok = false;
    ++rep.samples_used;
  }
  rep.extremal_ratio = worst;
  rep.flags["scaled_bound"] = scaled_ok;
  return rep;
}

inline std::vector<std::pair<double, double>> default_decreasing_grid() {
  std::vector<std::pair<double, double>> grid;
  for (int i = -30; i <= 20; ++i)
    for (double l : {1.01, 1.1, 1.5, 2.0, 4.0, 10.0}) grid.emplace_back(std::pow(10.0, i / 10.0), l);
  return grid;
}

struct FourierGrid {
  std::size_t n = 512;   // samples per axis
  double window = 0.0;   // half-width of the sampling box; 0 picks 20 length scales
};

// Heuristic surrogate for a nonnegative Fourier transform: sample g on a
// centred periodic box, take the DFT and look at the smallest real part.
inline CheckReport check_pd_fourier(const KernelSpec& k, FourierGrid grid = {}) {
  const int N = k.dim;
  if (N < 1 || N > 3) throw PreconditionError("check_pd_fourier: dimension must be 1, 2 or 3");
  if (grid.n < 4) throw PreconditionError("check_pd_fourier: grid too small");
  const double L = grid.window > 0.0 ? grid.window : 20.0 * length_scale(k);
  const std::size_t n = grid.n;
  const double h = 2.0 * L / static_cast<double>(n);

  // origin sample: g(0) for kernels bounded at 0, otherwise the average of g
  // over the ball with the volume of one cell
  const double omega = N == 1 ? 2.0 : (N == 2 ? kPi : 4.0 * kPi / 3.0);
  const double rho = std::pow(std::pow(h, N) / omega, 1.0 / N);
  const auto m0 = radial_moment(k, N - 1.0, rho);
  if (!m0) throw PreconditionError("check_pd_fourier: kernel not locally integrable");
  double g0 = N * (*m0) / std::pow(rho, N);
  if (const auto b = value_at_origin(k)) g0 = *b;

  std::size_t total = 1;
  for (int d = 0; d < N; ++d) total *= n;
  std::vector<double> f(total);
  std::vector<int> dims(static_cast<std::size_t>(N), static_cast<int>(n));
  double edge = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    double r2 = 0.0;
    bool on_edge = false;
    for (int d = 0; d < N; ++d) {
      const std::size_t m = rem % n;
      rem /= n;
      const std::size_t w = std::min(m, n - m);
      if (w == n / 2) on_edge = true;
      r2 += static_cast<double>(w * w);
    }
    const double v = idx == 0 ? g0 : eval_kernel(k, h * std::sqrt(r2));
    f[idx] = v;
    if (on_edge) edge = std::max(edge, std::abs(v));
  }

  const std::size_t last = n / 2 + 1;
  const std::size_t out_n = total / n * last;
  fftw_complex* out = fftw_alloc_complex(out_n);
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_r2c(N, dims.data(), f.data(), out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);

  const double scale = std::pow(h, N);
  double mn = 1e300, mx = -1e300;
  std::vector<std::pair<double, std::size_t>> negatives;
  for (std::size_t i = 0; i < out_n; ++i) {
    const double re = out[i][0] * scale;
    mn = std::min(mn, re);
    mx = std::max(mx, re);
    if (re < 0.0) negatives.emplace_back(re, i);
  }
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);

  CheckReport rep;
  rep.samples_used = total;
  rep.extremal_ratio = mx != 0.0 ? mn / mx : 0.0;
  rep.values["min_real"] = mn;
  rep.values["max_real"] = mx;
  rep.values["window"] = L;
  const double tol = 1e-9 * std::abs(mx);
  std::sort(negatives.begin(), negatives.end());
  std::size_t reported = 0;
  for (auto [v, i] : negatives) {
    if (v >= -tol) break;
    if (reported++ == 10) break;
    // index i in the r2c layout: last axis has n/2+1 entries
    std::vector<long> freq;
    std::size_t rem = i;
    const std::size_t inner = rem % last;
    rem /= last;
    for (int d = 0; d + 1 < N; ++d) {
      freq.insert(freq.begin(), static_cast<long>(rem % n));
      rem /= n;
    }
    freq.push_back(static_cast<long>(inner));
    for (auto& q : freq)
      if (q > static_cast<long>(n / 2)) q -= static_cast<long>(n);
    std::vector<double> wavenumber;
    for (long q : freq) wavenumber.push_back(static_cast<double>(q) / (2.0 * L));
    rep.add_witness({{"frequency", wavenumber}, {"value", v}});
  }
  // kernel still sizeable at the box edge: truncation dominates the result
  const double ref = std::max(std::abs(g0), std::abs(eval_kernel(k, h)));
  rep.flags["window_truncation"] = edge > 1e-6 * ref;
  return rep;
}

// Phi(t) = int_B g(y - x) dx with |y| = t, in polar coordinates around y:
// Phi = int [M(rho+) - M(rho-)] dphi over the directions that hit B.
inline double potential_phi(const KernelSpec& k, double t, double rel_tol = 1e-11) {
  if (!(t >= 0.0)) throw PreconditionError("potential_phi: need t >= 0");
  if (!admissible(k)) throw PreconditionError("potential_phi: kernel not admissible");
  if (t == 0.0) return 2.0 * kPi * mass(k, 1.0);
  auto inside = [&](double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const double sq = std::sqrt(std::max(0.0, 1.0 - t * t * s * s));
    // roots of |y + rho e|^2 = 1, written without cancellation
    double rp, rm = 0.0;
    if (c >= 0.0) {
      rp = (1.0 - t * t) / (sq + t * c);
    } else {
      rp = -t * c + sq;
      if (t > 1.0) rm = (t * t - 1.0) / (-t * c + sq);
    }
    if (rp <= 0.0) return 0.0;
    return mass(k, rp) - mass(k, rm);
  };
  const double abs_tol = 1e-12 * mass(k, 1.0);
  // Breakpoints: pi/2 separates the directions facing towards and away from
  // B; for the indicator the integrand kinks where the support circle of
  // radius R around y crosses the unit circle.
  // for t >= 1 only directions within asin(1/t) of -y hit B (all of the
  // half-plane facing B when t = 1)
  const double lo = t < 1.0 ? 0.0 : kPi - std::asin(1.0 / t);
  std::vector<double> cuts = {lo, kPi};
  if (t < 1.0) cuts.push_back(kPi / 2);
  if (k.family == Family::indicator) {
    const double R = k.radius;
    const double c = (1.0 - t * t - R * R) / (2.0 * t * R);
    if (std::abs(c) < 1.0) {
      const double phi = std::acos(c);
      if (phi > lo && phi < kPi) cuts.push_back(phi);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  // breakpoints closer than this would leave slivers the quadrature cannot resolve
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < 1e-9; }),
             cuts.end());
  cuts.back() = kPi;
  try {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1] > cuts[i])
        total += quad::integrate_singular(inside, cuts[i], cuts[i + 1], rel_tol, "potential_phi", abs_tol);
    return 2.0 * total;
  } catch (const ToleranceNotMet& e) {
    throw ToleranceNotMet("potential_phi: tolerance not met", 2.0 * e.estimate, 2.0 * e.error);
  }
}

// phi(sigma): integral of g over the disk of area sigma centred at the origin.
inline double concentration_bound_phi(const KernelSpec& k, double sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("concentration_bound_phi: need sigma > 0");
  if (!admissible(k)) throw PreconditionError("concentration_bound_phi: kernel not admissible");
  return 2.0 * kPi * mass(k, std::sqrt(sigma / kPi));
}

}  // namespace gamow
