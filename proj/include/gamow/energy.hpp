#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fftw3.h>

#include <boost/math/special_functions/zeta.hpp>

#include "gamow/core.hpp"
#include "gamow/kernel.hpp"
#include "gamow/parallel.hpp"
#include "gamow/quadrature.hpp"
#include "gamow/raster.hpp"
#include "gamow/star_shape.hpp"

namespace gamow {

// ---------------------------------------------------------------------------
// Star shapes.  With U(|x|) the planar potential of g (Laplacian of U = g),
// Green's formula turns the area double integral into
//   R(F, G) = - int_dF int_dG U(|x - y|) T_F . T_G ds dt
// over counter-clockwise boundaries.  Both loops use the periodic trapezoid
// rule; on the diagonal of a self-interaction the r^b singularity of U gets
// the zeta-function endpoint correction.

inline void require_planar(const KernelSpec& k) {
  if (k.dim != 2) throw PreconditionError("shape energies are planar: kernel dimension must be 2");
  if (!admissible(k)) throw PreconditionError("kernel is not admissible");
}

inline std::size_t default_riesz_nodes(const StarShape& s) {
  return std::max<std::size_t>(128, 16 * static_cast<std::size_t>(max_mode(s)));
}

namespace detail {

struct BoundarySamples {
  std::vector<Vec2> x;
  std::vector<Vec2> t;
  double h = 0.0;
};

inline BoundarySamples sample_boundary(const StarShape& s, std::size_t n) {
  BoundarySamples b;
  b.h = 2.0 * kPi / static_cast<double>(n);
  b.x.resize(n);
  b.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = b.h * static_cast<double>(i);
    b.x[i] = boundary_point(s, th);
    b.t[i] = boundary_tangent(s, th);
  }
  return b;
}

inline double boundary_double_sum(const KernelSpec& k, const BoundarySamples& a, const BoundarySamples& b) {
  std::vector<double> rows(a.x.size());
  parallel_for(a.x.size(), [&](std::size_t i) {
    std::vector<double> row(b.x.size());
    for (std::size_t j = 0; j < b.x.size(); ++j) {
      const double d = norm(a.x[i] - b.x[j]);
      row[j] = d > 0.0 ? potential(k, d) * dot(a.t[i], b.t[j]) : 0.0;
    }
    rows[i] = pairwise_sum(row);
  });
  return -pairwise_sum(rows) * a.h * b.h;
}

// Same sum for a == b, using the symmetry of the summand.
inline double boundary_self_sum(const KernelSpec& k, const BoundarySamples& a) {
  const std::size_t n = a.x.size();
  std::vector<double> rows(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> row(n - i - 1);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = norm(a.x[i] - a.x[j]);
      row[j - i - 1] = d > 0.0 ? potential(k, d) * dot(a.t[i], a.t[j]) : 0.0;
    }
    rows[i] = pairwise_sum(row);
  });
  return -2.0 * pairwise_sum(rows) * a.h * a.h;
}

}  // namespace detail

inline double riesz_self(const KernelSpec& k, const StarShape& s, std::size_t nodes = 0) {
  require_planar(k);
  const std::size_t n = nodes ? nodes : default_riesz_nodes(s);
  validate(s, 4 * n);
  const auto b = detail::sample_boundary(s, n);
  double v = detail::boundary_self_sum(k, b);
  if (auto term = potential_singular_term(k)) {
    const auto [beta, c] = *term;
    const double z = boost::math::zeta(-beta);
    if (z != 0.0) {
      std::vector<double> tn(n);
      for (std::size_t i = 0; i < n; ++i) tn[i] = std::pow(norm(b.t[i]), beta + 2.0);
      v += 2.0 * z * c * std::pow(b.h, beta + 2.0) * pairwise_sum(tn);
    }
  }
  return v;
}

inline double riesz_interaction(const KernelSpec& k, const StarShape& F, const StarShape& G, std::size_t nodes = 0) {
  if (F == G) return riesz_self(k, F, nodes);
  require_planar(k);
  validate(F);
  validate(G);
  const auto a = detail::sample_boundary(F, nodes ? nodes : default_riesz_nodes(F));
  const auto b = detail::sample_boundary(G, nodes ? nodes : default_riesz_nodes(G));
  return detail::boundary_double_sum(k, a, b);
}

// ---------------------------------------------------------------------------
// Rasters.  For two cells of side p at integer offset d,
//   K(d) = int_cell int_{cell + p d} g(|x - y|) = p^4 int_{[-1,1]^2} g(p |d + s|) w(s) ds
// with the tent weight w(s) = (1 - |s_x|)(1 - |s_y|).  Interactions are then
// sum_d H(d) K(d) with H the integer histogram of cell-pair offsets.

class CellTable {
 public:
  CellTable(KernelSpec k, double pitch) : k_(std::move(k)), p_(pitch) {
    if (!admissible(k_)) throw PreconditionError("kernel is not admissible");
    if (k_.dim != 2) throw PreconditionError("raster energies are planar: kernel dimension must be 2");
    double e = 0.0;
    if (k_.family == Family::power) e = k_.alpha;
    if (k_.family == Family::gauss_power) e = -k_.alpha;
    if (k_.family == Family::tabulated) e = k_.table->head_p;
    grading_ = std::max(1, static_cast<int>(std::ceil(3.0 / (std::min(e, 0.0) + 2.0))));
  }

  double pitch() const { return p_; }
  const KernelSpec& kernel() const { return k_; }

  double operator()(long dx, long dy) {
    dx = std::labs(dx);
    dy = std::labs(dy);
    if (dx < dy) std::swap(dx, dy);
    const std::uint64_t key = (static_cast<std::uint64_t>(dx) << 32) | static_cast<std::uint64_t>(dy);
    {
      std::lock_guard lock(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    const double v = compute(dx, dy);
    std::lock_guard lock(mu_);
    memo_.emplace(key, v);
    return v;
  }

 private:
  double g(double r) const { return r > 0.0 ? eval_kernel(k_, r) : 0.0; }

  // quadrant (sx, sy) = (sgx u, sgy v), u, v in [0, 1]
  double quadrant(long dx, long dy, int sgx, int sgy) const {
    auto f = [&](double u, double v) {
      const double ax = static_cast<double>(dx) + sgx * u, ay = static_cast<double>(dy) + sgy * v;
      return g(p_ * std::hypot(ax, ay)) * (1.0 - u) * (1.0 - v);
    };
    // the zero of d + s can only sit at a corner of the unit square
    const double us = -sgx * static_cast<double>(dx), vs = -sgy * static_cast<double>(dy);
    const bool singular = (us == 0.0 || us == 1.0) && (vs == 0.0 || vs == 1.0);
    if (k_.family == Family::indicator) return subdivided(f, dx, dy, sgx, sgy, 0.0, 1.0, 0.0, 1.0, 0);
    if (singular) return duffy(f, us, vs);
    const long far = std::max(dx, dy);
    return far >= 3 ? tensor_gl(f, quad::gauss_legendre<8>(), 0, 1, 0, 1)
                    : tensor_gl(f, quad::gauss_legendre<20>(), 0, 1, 0, 1);
  }

  template <class F>
  static double tensor_gl(F& f, const quad::Rule& r, double u0, double u1, double v0, double v1) {
    const double mu = 0.5 * (u0 + u1), hu = 0.5 * (u1 - u0), mv = 0.5 * (v0 + v1), hv = 0.5 * (v1 - v0);
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < r.x.size(); ++j) row += r.w[j] * f(mu + hu * r.x[i], mv + hv * r.x[j]);
      s += r.w[i] * row;
    }
    return s * hu * hv;
  }

  // Singular corner (us, vs): reflect it to the origin, split the square
  // along the diagonal and map both triangles to the square (Duffy), with a
  // polynomial grading of the radial variable.
  template <class F>
  double duffy(F& f, double us, double vs) const {
    const auto& r = quad::gauss_legendre<20>();
    const int m = grading_;
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      const double tau = 0.5 * (r.x[i] + 1.0);
      const double w = std::pow(tau, m);
      const double jac = m * std::pow(tau, m - 1) * w;  // dw/dtau times the Duffy factor w
      double inner = 0.0;
      for (std::size_t j = 0; j < r.x.size(); ++j) {
        const double t = 0.5 * (r.x[j] + 1.0);
        auto at = [&](double a, double b) {
          const double u = us == 0.0 ? a : 1.0 - a;
          const double v = vs == 0.0 ? b : 1.0 - b;
          return f(u, v);
        };
        inner += 0.5 * r.w[j] * (at(w, w * t) + at(w * t, w));
      }
      s += 0.5 * r.w[i] * jac * inner;
    }
    return s;
  }

  // Indicator kernels jump at the support radius; boxes straddling it are
  // split before the Gauss rule is applied.
  template <class F>
  double subdivided(F& f, long dx, long dy, int sgx, int sgy, double u0, double u1, double v0, double v1,
                    int depth) const {
    // distance range over the box, via its extreme coordinates
    auto range1 = [](double c, int sg, double a0, double a1) {
      const double x0 = c + sg * a0, x1 = c + sg * a1;
      const double lo = (x0 <= 0.0 && x1 >= 0.0) || (x1 <= 0.0 && x0 >= 0.0) ? 0.0 : std::min(std::abs(x0), std::abs(x1));
      return std::pair{lo, std::max(std::abs(x0), std::abs(x1))};
    };
    const auto [xl, xh] = range1(static_cast<double>(dx), sgx, u0, u1);
    const auto [yl, yh] = range1(static_cast<double>(dy), sgy, v0, v1);
    const double dmin = p_ * std::hypot(xl, yl), dmax = p_ * std::hypot(xh, yh);
    const double R = k_.radius;
    if (dmin >= R) return 0.0;
    if (dmax <= R || depth >= 7) {
      if (dmax <= R) {
        // integrand is the polynomial tent weight: exact
        auto prim = [](double a0, double a1) { return (a1 - a0) - 0.5 * (a1 * a1 - a0 * a0); };
        return prim(u0, u1) * prim(v0, v1);
      }
      return tensor_gl(f, quad::gauss_legendre<8>(), u0, u1, v0, v1);
    }
    const double um = 0.5 * (u0 + u1), vm = 0.5 * (v0 + v1);
    return subdivided(f, dx, dy, sgx, sgy, u0, um, v0, vm, depth + 1) +
           subdivided(f, dx, dy, sgx, sgy, um, u1, v0, vm, depth + 1) +
           subdivided(f, dx, dy, sgx, sgy, u0, um, vm, v1, depth + 1) +
           subdivided(f, dx, dy, sgx, sgy, um, u1, vm, v1, depth + 1);
  }

  double compute(long dx, long dy) const {
    const double q = quadrant(dx, dy, 1, 1) + quadrant(dx, dy, -1, 1) + quadrant(dx, dy, 1, -1) +
                     quadrant(dx, dy, -1, -1);
    return std::pow(p_, 4) * q;
  }

  KernelSpec k_;
  double p_;
  int grading_ = 2;
  std::mutex mu_;
  std::unordered_map<std::uint64_t, double> memo_;
};

// Offset histogram H(d) = #{(i, j): i in A, j in B, j - i = d} as a dense
// grid.  Entry (x, y) holds the offset (dx_lo + x, dy_lo + y).
struct OffsetHistogram {
  long dx_lo = 0;
  long dy_lo = 0;
  int nx = 0;
  int ny = 0;
  std::vector<std::int64_t> count;
};

namespace detail {

inline OffsetHistogram histogram_direct(const std::vector<int>& a, const RasterSet& A, const std::vector<int>& b,
                                        const RasterSet& B, OffsetHistogram h) {
  h.count.assign(static_cast<std::size_t>(h.nx) * h.ny, 0);
  std::vector<std::pair<long, long>> pa, pb;
  for (int j = 0; j < A.ny; ++j)
    for (int i = 0; i < A.nx; ++i)
      if (a[static_cast<std::size_t>(j) * A.nx + i]) pa.emplace_back(A.ix0 + i, A.iy0 + j);
  for (int j = 0; j < B.ny; ++j)
    for (int i = 0; i < B.nx; ++i)
      if (b[static_cast<std::size_t>(j) * B.nx + i]) pb.emplace_back(B.ix0 + i, B.iy0 + j);
  for (std::size_t u = 0; u < pa.size(); ++u) {
    const int wa = a[static_cast<std::size_t>(pa[u].second - A.iy0) * A.nx + (pa[u].first - A.ix0)];
    for (std::size_t v = 0; v < pb.size(); ++v) {
      const int wb = b[static_cast<std::size_t>(pb[v].second - B.iy0) * B.nx + (pb[v].first - B.ix0)];
      const long x = pb[v].first - pa[u].first - h.dx_lo, y = pb[v].second - pa[u].second - h.dy_lo;
      h.count[static_cast<std::size_t>(y) * h.nx + x] += wa * wb;
    }
  }
  return h;
}

// Cross-correlation of two integer-weighted grids.  Small inputs are counted
// directly; larger ones go through FFTW and are rounded, with a check that
// every entry was within 0.25 of an integer.
inline OffsetHistogram weighted_histogram(const std::vector<int>& a, const RasterSet& A, const std::vector<int>& b,
                                          const RasterSet& B) {
  OffsetHistogram h;
  h.dx_lo = B.ix0 - (A.ix0 + A.nx - 1);
  h.dy_lo = B.iy0 - (A.iy0 + A.ny - 1);
  h.nx = A.nx + B.nx - 1;
  h.ny = A.ny + B.ny - 1;
  if (A.nx == 0 || A.ny == 0 || B.nx == 0 || B.ny == 0) {
    h.nx = h.ny = 0;
    return h;
  }
  std::size_t na = 0, nb = 0;
  for (int v : a) na += v != 0;
  for (int v : b) nb += v != 0;
  if (na * nb <= 4'000'000) return histogram_direct(a, A, b, B, h);

  const int Lx = h.nx, Ly = h.ny;
  const std::size_t total = static_cast<std::size_t>(Lx) * Ly;
  const std::size_t half = static_cast<std::size_t>(Ly) * (Lx / 2 + 1);
  std::vector<double> ra(total, 0.0), rb(total, 0.0);
  // reversed a and plain b, row-major with x fastest: index y * Lx + x;
  // FFTW sees dims (Ly, Lx)
  for (int j = 0; j < A.ny; ++j)
    for (int i = 0; i < A.nx; ++i)
      ra[static_cast<std::size_t>(A.ny - 1 - j) * Lx + (A.nx - 1 - i)] = a[static_cast<std::size_t>(j) * A.nx + i];
  for (int j = 0; j < B.ny; ++j)
    for (int i = 0; i < B.nx; ++i) rb[static_cast<std::size_t>(j) * Lx + i] = b[static_cast<std::size_t>(j) * B.nx + i];
  fftw_complex* fa = fftw_alloc_complex(half);
  fftw_complex* fb = fftw_alloc_complex(half);
  fftw_plan pa, pb, pc;
  {
    std::lock_guard lock(fftw_planner_mutex());
    pa = fftw_plan_dft_r2c_2d(Ly, Lx, ra.data(), fa, FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_2d(Ly, Lx, rb.data(), fb, FFTW_ESTIMATE);
    pc = fftw_plan_dft_c2r_2d(Ly, Lx, fa, ra.data(), FFTW_ESTIMATE);
  }
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t i = 0; i < half; ++i) {
    const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
    const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
    fa[i][0] = re;
    fa[i][1] = im;
  }
  fftw_execute(pc);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pc);
  }
  fftw_free(fa);
  fftw_free(fb);
  h.count.resize(total);
  double worst = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double v = ra[i] / static_cast<double>(total);
    const double r = std::round(v);
    worst = std::max(worst, std::abs(v - r));
    h.count[i] = static_cast<std::int64_t>(r);
  }
  if (worst > 0.25) return histogram_direct(a, A, b, B, h);
  return h;
}

inline std::vector<int> as_weights(const RasterSet& r) {
  std::vector<int> w(r.mask.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = r.mask[i];
  return w;
}

}  // namespace detail

inline OffsetHistogram offset_histogram(const RasterSet& A, const RasterSet& B) {
  require_compatible(A, B);
  return detail::weighted_histogram(detail::as_weights(A), A, detail::as_weights(B), B);
}

inline double contract(const OffsetHistogram& h, CellTable& table) {
  std::vector<std::size_t> nz;
  for (std::size_t i = 0; i < h.count.size(); ++i)
    if (h.count[i] != 0) nz.push_back(i);
  std::vector<double> terms(nz.size());
  parallel_for(nz.size(), [&](std::size_t q) {
    const std::size_t i = nz[q];
    const long dx = h.dx_lo + static_cast<long>(i % static_cast<std::size_t>(h.nx));
    const long dy = h.dy_lo + static_cast<long>(i / static_cast<std::size_t>(h.nx));
    terms[q] = static_cast<double>(h.count[i]) * table(dx, dy);
  });
  return pairwise_sum(terms);
}

inline double riesz_interaction(CellTable& table, const RasterSet& F, const RasterSet& G) {
  if (std::abs(F.pitch - table.pitch()) > 1e-12 * table.pitch())
    throw PreconditionError("raster pitch differs from the cell table pitch");
  return contract(offset_histogram(F, G), table);
}

inline double riesz_interaction(const KernelSpec& k, const RasterSet& F, const RasterSet& G) {
  CellTable table(k, F.pitch);
  return riesz_interaction(table, F, G);
}

// R(F) + R(G) - 2 R(F, G) as the quadratic form of 1_F - 1_G, so the value is
// exactly 0 when F = G.
inline double pd_slack(CellTable& table, const RasterSet& F, const RasterSet& G) {
  require_compatible(F, G);
  const RasterSet U = raster_union(F, G);
  std::vector<int> w(U.mask.size(), 0);
  for (int j = 0; j < U.ny; ++j)
    for (int i = 0; i < U.nx; ++i) {
      const long gi = U.ix0 + i, gj = U.iy0 + j;
      const int f = F.at(static_cast<int>(gi - F.ix0), static_cast<int>(gj - F.iy0));
      const int g = G.at(static_cast<int>(gi - G.ix0), static_cast<int>(gj - G.iy0));
      w[static_cast<std::size_t>(j) * U.nx + i] = f - g;
    }
  return contract(detail::weighted_histogram(w, U, w, U), table);
}

// ---------------------------------------------------------------------------
// Energies

struct EnergyBreakdown {
  double perimeter = 0.0;
  double riesz = 0.0;
  double epsilon = 0.0;
  double total = 0.0;
  std::optional<std::vector<std::pair<double, double>>> per_component;
};

inline void to_json(json& j, const EnergyBreakdown& e) {
  j = json{{"perimeter", e.perimeter}, {"riesz", e.riesz}, {"epsilon", e.epsilon}, {"total", e.total}};
  if (e.per_component) {
    json pc = json::array();
    for (const auto& [p, r] : *e.per_component) pc.push_back(json{{"perimeter", p}, {"riesz", r}});
    j["per_component"] = pc;
  }
}

inline EnergyBreakdown make_breakdown(double perimeter, double riesz, double eps) {
  return {perimeter, riesz, eps, perimeter + eps * riesz, std::nullopt};
}

inline void require_epsilon(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw PreconditionError("epsilon must be >= 0");
}

inline EnergyBreakdown gamow_energy(const KernelSpec& k, double eps, const StarShape& F, std::size_t nodes = 0) {
  require_epsilon(eps);
  return make_breakdown(perimeter(F), riesz_self(k, F, nodes), eps);
}

inline EnergyBreakdown gamow_energy(CellTable& table, double eps, const RasterSet& F) {
  require_epsilon(eps);
  return make_breakdown(perimeter(F), riesz_interaction(table, F, F), eps);
}

// Components at mutually infinite distance: no cross terms.
struct ComponentList {
  std::vector<StarShape> components;
};

inline double total_area(const ComponentList& c) {
  double a = 0.0;
  for (const auto& s : c.components) a += area(s);
  return a;
}

inline EnergyBreakdown generalized_energy(const KernelSpec& k, double eps, const ComponentList& c,
                                          std::size_t nodes = 0) {
  require_epsilon(eps);
  if (c.components.empty()) throw PreconditionError("component list is empty");
  std::vector<std::pair<double, double>> parts;
  std::vector<double> ps, rs;
  for (const auto& s : c.components) {
    parts.emplace_back(perimeter(s), riesz_self(k, s, nodes));
    ps.push_back(parts.back().first);
    rs.push_back(parts.back().second);
  }
  EnergyBreakdown e = make_breakdown(pairwise_sum(ps), pairwise_sum(rs), eps);
  e.per_component = std::move(parts);
  return e;
}

// |F(m S) - m (P(S) + m^{3 + alpha} R(S))| with F = P + R, for power kernels in
// the plane.  The two sides use different boundary node counts.
inline double scaling_residual(const KernelSpec& k, const StarShape& s, double m) {
  if (k.family != Family::power) throw PreconditionError("scaling_residual needs a power kernel");
  if (!(m > 0.0)) throw PreconditionError("scaling factor must be > 0");
  const std::size_t n = default_riesz_nodes(s);
  const StarShape ms = scale(s, m);
  const double lhs = perimeter(ms) + riesz_self(k, ms, n);
  const double rhs = m * (perimeter(s, 6144) + std::pow(m, 3.0 + k.alpha) * riesz_self(k, s, n + n / 2));
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Cut and paste on rasters: remove the columns between two thin cross
// sections a+ and b- of the band [a, b].

enum class CutOutcome { cut, no_cut, empty };

inline const char* outcome_name(CutOutcome o) {
  switch (o) {
    case CutOutcome::cut: return "cut";
    case CutOutcome::no_cut: return "no_cut";
    case CutOutcome::empty: return "empty";
  }
  return "";
}

struct CutResult {
  CutOutcome outcome = CutOutcome::no_cut;
  RasterSet set;
  double delta_energy = 0.0;
  double a_plus = 0.0;
  double b_minus = 0.0;
  double removed_area = 0.0;
  double guaranteed_decrease = 0.0;  // sqrt(pi m), the bound for N = 2
  EnergyBreakdown before;
  EnergyBreakdown after;
};

inline void to_json(json& j, const CutResult& r) {
  j = json{{"outcome", outcome_name(r.outcome)},
           {"delta_energy", r.delta_energy},
           {"a_plus", r.a_plus},
           {"b_minus", r.b_minus},
           {"removed_area", r.removed_area},
           {"guaranteed_decrease", r.guaranteed_decrease},
           {"before", r.before},
           {"after", r.after}};
}

// window <= 0 selects the default (b - a) / 2.
inline CutResult cut_and_paste(const KernelSpec& k, double eps, const RasterSet& E, double a, double b, double m_bar,
                               double window = 0.0) {
  require_epsilon(eps);
  if (!(b > a)) throw PreconditionError("cut_and_paste: need a < b");
  const double L = window > 0.0 ? window : 0.5 * (b - a);
  if (b - a < 2.0 * L) throw PreconditionError("cut_and_paste: band must be at least twice the window");
  const double p = E.pitch;
  auto col_of = [&](double x) { return static_cast<long>(std::floor(x / p)) - E.ix0; };
  auto col_count = [&](long i) {
    std::size_t c = 0;
    if (i < 0 || i >= E.nx) return c;
    for (int j = 0; j < E.ny; ++j) c += E.at(static_cast<int>(i), j);
    return c;
  };
  // columns whose centre lies in [lo, hi]
  auto first_col = [&](double x) { return static_cast<long>(std::ceil(x / p - 0.5)) - E.ix0; };
  auto last_col = [&](double x) { return static_cast<long>(std::floor(x / p - 0.5)) - E.ix0; };
  auto mass_cols = [&](long i0, long i1) {
    std::size_t c = 0;
    for (long i = std::max(i0, 0L); i <= std::min(i1, static_cast<long>(E.nx) - 1); ++i) c += col_count(i);
    return static_cast<double>(c) * p * p;
  };
  const long ca = first_col(a), cb = last_col(b);
  const double band_mass = mass_cols(ca, cb);
  if (band_mass > m_bar + 1e-12) throw PreconditionError("cut_and_paste: band mass exceeds the budget");

  CellTable table(k, p);
  CutResult res;
  res.before = gamow_energy(table, eps, E);
  if (band_mass == 0.0) {
    res.outcome = CutOutcome::empty;
    res.set = E;
    res.after = res.before;
    return res;
  }
  const double c = 0.5 * (a + b);
  const long cc = col_of(c);
  const double coef = std::sqrt(kPi) / 4.0;  // (1/8) N omega_N^{1/N} for N = 2
  std::optional<long> ap, bm;
  for (long i = first_col(a); i <= last_col(a + L) && i < cc; ++i) {
    const double sigma = static_cast<double>(col_count(i)) * p;
    const double m1 = mass_cols(i + 1, cc - 1);
    if (sigma <= coef * std::sqrt(m1)) {
      ap = i;
      break;
    }
  }
  for (long i = last_col(b); i >= first_col(b - L) && i > cc; --i) {
    const double sigma = static_cast<double>(col_count(i)) * p;
    const double m2 = mass_cols(cc + 1, i - 1);
    if (sigma <= coef * std::sqrt(m2)) {
      bm = i;
      break;
    }
  }
  if (!ap || !bm) {
    res.outcome = CutOutcome::no_cut;
    res.set = E;
    res.after = res.before;
    return res;
  }
  RasterSet out = E;
  for (long i = *ap; i <= *bm; ++i)
    for (int j = 0; j < E.ny; ++j) out.set(static_cast<int>(i), j, false);
  res.outcome = CutOutcome::cut;
  res.a_plus = (static_cast<double>(E.ix0 + *ap) + 0.5) * p;
  res.b_minus = (static_cast<double>(E.ix0 + *bm) + 0.5) * p;
  res.removed_area = area(E) - area(out);
  res.guaranteed_decrease = std::sqrt(kPi * res.removed_area);
  res.set = trimmed(out);
  res.after = gamow_energy(table, eps, res.set);
  res.delta_energy = res.after.total - res.before.total;
  return res;
}

}  // namespace gamow
