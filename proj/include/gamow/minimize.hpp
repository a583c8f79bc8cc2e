#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gamow/asymmetry.hpp"
#include "gamow/core.hpp"
#include "gamow/energy.hpp"
#include "gamow/kernel.hpp"
#include "gamow/parallel.hpp"
#include "gamow/star_shape.hpp"
#include "gamow/svg.hpp"

namespace gamow {

struct OptimizerConfig {
  int n_modes = 8;
  int max_iters = 400;          // coordinate sweeps
  double step_init = 0.05;
  double step_shrink = 0.5;
  double tol_energy = 1e-12;
  double tol_step = 1e-5;
  std::uint64_t seed = 1;
  std::size_t riesz_nodes = 0;  // 0: default for the shape
  std::size_t perimeter_nodes = 512;
  int mass_grid = 4;            // simplex resolution per component
  int refine_rounds = 2;
  double start_amplitude = 0.02;
  double asymmetry_tol = 1e-2;
  double asymmetry_floor = 1e-3;
};

inline void validate(const OptimizerConfig& c) {
  if (c.n_modes < 1) throw PreconditionError("optimizer: n_modes must be >= 1");
  if (c.max_iters < 1) throw PreconditionError("optimizer: max_iters must be >= 1");
  if (!(c.step_init > 0.0)) throw PreconditionError("optimizer: step_init must be > 0");
  if (!(c.step_shrink > 0.0 && c.step_shrink < 1.0)) throw PreconditionError("optimizer: step_shrink must be in (0, 1)");
  if (!(c.tol_energy > 0.0)) throw PreconditionError("optimizer: tol_energy must be > 0");
  if (!(c.tol_step > 0.0)) throw PreconditionError("optimizer: tol_step must be > 0");
  if (c.perimeter_nodes < 64) throw PreconditionError("optimizer: perimeter_nodes must be >= 64");
  if (c.mass_grid < 1) throw PreconditionError("optimizer: mass_grid must be >= 1");
  if (c.refine_rounds < 0) throw PreconditionError("optimizer: refine_rounds must be >= 0");
  if (!(c.start_amplitude >= 0.0)) throw PreconditionError("optimizer: start_amplitude must be >= 0");
  if (!(c.asymmetry_tol > 0.0)) throw PreconditionError("optimizer: asymmetry_tol must be > 0");
  if (!(c.asymmetry_floor > 0.0)) throw PreconditionError("optimizer: asymmetry_floor must be > 0");
}

inline void to_json(json& j, const OptimizerConfig& c) {
  j = json{{"n_modes", c.n_modes},
           {"max_iters", c.max_iters},
           {"step_init", c.step_init},
           {"step_shrink", c.step_shrink},
           {"tol_energy", c.tol_energy},
           {"tol_step", c.tol_step},
           {"seed", c.seed},
           {"riesz_nodes", c.riesz_nodes},
           {"perimeter_nodes", c.perimeter_nodes},
           {"mass_grid", c.mass_grid},
           {"refine_rounds", c.refine_rounds},
           {"start_amplitude", c.start_amplitude},
           {"asymmetry_tol", c.asymmetry_tol},
           {"asymmetry_floor", c.asymmetry_floor}};
}

// Reads the keys present in j over the defaults; unknown keys are rejected.
inline OptimizerConfig optimizer_config_from_json(const json& j, OptimizerConfig c = {}) {
  if (!j.is_object()) throw PreconditionError("optimizer config must be an object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const json& v = it.value();
      if (key == "n_modes") c.n_modes = v.get<int>();
      else if (key == "max_iters") c.max_iters = v.get<int>();
      else if (key == "step_init") c.step_init = v.get<double>();
      else if (key == "step_shrink") c.step_shrink = v.get<double>();
      else if (key == "tol_energy") c.tol_energy = v.get<double>();
      else if (key == "tol_step") c.tol_step = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "riesz_nodes") c.riesz_nodes = v.get<std::size_t>();
      else if (key == "perimeter_nodes") c.perimeter_nodes = v.get<std::size_t>();
      else if (key == "mass_grid") c.mass_grid = v.get<int>();
      else if (key == "refine_rounds") c.refine_rounds = v.get<int>();
      else if (key == "start_amplitude") c.start_amplitude = v.get<double>();
      else if (key == "asymmetry_tol") c.asymmetry_tol = v.get<double>();
      else if (key == "asymmetry_floor") c.asymmetry_floor = v.get<double>();
      else throw PreconditionError("optimizer config: unknown key " + key);
    }
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("optimizer config: ") + e.what());
  }
  validate(c);
  return c;
}

inline StarShape project_volume(const StarShape& s, double target) {
  if (!(target > 0.0) || !std::isfinite(target)) throw PreconditionError("project_volume: target must be > 0");
  const double a = area(s);
  if (!(a > 0.0) || !std::isfinite(a)) throw PreconditionError("project_volume: degenerate shape");
  StarShape out = s;
  out.r0 *= std::sqrt(target / a);
  return out;
}

// Disk of area pi with modes 2..n_modes of size up to amplitude / k.
inline StarShape random_start(std::mt19937_64& rng, int n_modes, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StarShape s = disk();
  for (int k = 2; k <= n_modes; ++k) s.modes.push_back({k, amplitude * u(rng) / k, amplitude * u(rng) / k});
  return project_volume(s, kPi);
}

struct IterationRecord {
  int sweep = 0;
  double energy = 0.0;
  double step = 0.0;
  double area = 0.0;
};

struct MinimizeTrace {
  std::vector<IterationRecord> iterations;  // start, then every accepted step
  std::vector<StarShape> final_shapes;
  AsymmetryReport asymmetry;
  bool converged = false;
  int sweeps = 0;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;  // kept out of JSON so output is reproducible

  double final_energy() const { return iterations.empty() ? std::nan("") : iterations.back().energy; }
};

inline void to_json(json& j, const MinimizeTrace& t) {
  json its = json::array();
  for (const auto& r : t.iterations)
    its.push_back(json{{"sweep", r.sweep}, {"energy", r.energy}, {"step", r.step}, {"area", r.area}});
  json shapes = json::array();
  for (const auto& s : t.final_shapes) shapes.push_back(to_json_value(s));
  j = json{{"iterations", its},     {"final_shapes", shapes}, {"asymmetry", t.asymmetry},
           {"converged", t.converged}, {"sweeps", t.sweeps},    {"evaluations", t.evaluations}};
}

namespace detail {

// Perimeter plus eps times the Riesz self-energy of one star shape.
struct ShapeEnergy {
  const KernelSpec& kernel;
  double eps;
  const OptimizerConfig& cfg;
  std::size_t calls = 0;

  double operator()(const StarShape& s) {
    ++calls;
    const double p = perimeter(s, cfg.perimeter_nodes);
    if (eps == 0.0) return p;
    return p + eps * riesz_self(kernel, s, cfg.riesz_nodes);
  }
};

inline StarShape with_modes(const StarShape& s, int n_modes) {
  StarShape out = s;
  out.modes = merged_modes(s);
  for (int k = 2; k <= n_modes; ++k)
    if (std::none_of(out.modes.begin(), out.modes.end(), [k](const Mode& m) { return m.k == k; }))
      out.modes.push_back({k, 0.0, 0.0});
  std::sort(out.modes.begin(), out.modes.end(), [](const Mode& a, const Mode& b) { return a.k < b.k; });
  return out;
}

inline StarShape drop_zero_modes(const StarShape& s) {
  StarShape out = s;
  std::erase_if(out.modes, [](const Mode& m) { return m.a == 0.0 && m.b == 0.0; });
  return out;
}

// Trial iterates must stay comfortably star-shaped.
inline bool usable(const StarShape& s) { return min_radial_factor(s, 512) > 0.05; }

inline AsymmetryReport normalized_asymmetry(const StarShape& s) {
  return fraenkel_center(project_volume(s, kPi));
}

}  // namespace detail

// Projected coordinate descent on the Fourier coefficients of modes
// 2..n_modes; mode 1 is a translation to first order and is left as given,
// like any mode above the cutoff.  A trial changes one coefficient by +-step and is rescaled to
// the target area; it is accepted when the energy drops by more than
// tol_energy, and the same move is repeated while it keeps paying.  A sweep
// without any acceptance shrinks the step.
inline MinimizeTrace minimize_single(const KernelSpec& k, double eps, const StarShape& start,
                                     const OptimizerConfig& cfg, double target_area = kPi) {
  validate(cfg);
  require_epsilon(eps);
  if (eps > 0.0) require_planar(k);
  validate(start);
  const auto t0 = std::chrono::steady_clock::now();
  detail::ShapeEnergy energy{k, eps, cfg};
  MinimizeTrace tr;
  StarShape s = project_volume(detail::with_modes(start, cfg.n_modes), target_area);
  auto eval = [&](const StarShape& x) {
    try {
      return energy(x);
    } catch (const ToleranceNotMet& e) {
      throw ToleranceNotMet(std::string(e.what()) + " (sweep " + std::to_string(tr.sweeps) + ")", e.estimate, e.error);
    }
  };
  double E = eval(s);
  double step = cfg.step_init;
  tr.iterations.push_back({0, E, step, area(s)});
  while (tr.sweeps < cfg.max_iters && step >= cfg.tol_step) {
    bool improved = false;
    for (std::size_t m = 0; m < s.modes.size(); ++m)
      for (int c = 0; c < 2; ++c)
        for (double dir : {1.0, -1.0}) {
          if (s.modes[m].k < 2 || s.modes[m].k > cfg.n_modes) break;
          bool moved = false;
          for (int rep = 0; rep < 16; ++rep) {
            StarShape trial = s;
            (c == 0 ? trial.modes[m].a : trial.modes[m].b) += dir * step;
            if (!detail::usable(trial)) break;
            trial = project_volume(trial, target_area);
            const double Et = eval(trial);
            if (!(Et < E - cfg.tol_energy)) break;
            s = std::move(trial);
            E = Et;
            moved = improved = true;
            tr.iterations.push_back({tr.sweeps + 1, E, step, area(s)});
          }
          if (moved) break;
        }
    ++tr.sweeps;
    if (!improved) step *= cfg.step_shrink;
  }
  tr.converged = step < cfg.tol_step;
  tr.evaluations = energy.calls;
  s = detail::drop_zero_modes(s);
  tr.asymmetry = detail::normalized_asymmetry(s);
  tr.final_shapes = {s};
  tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return tr;
}

// True when no single coefficient move of size `step` lowers the energy by
// more than tol_energy.
inline bool locally_optimal(const KernelSpec& k, double eps, const StarShape& s, const OptimizerConfig& cfg,
                            double step) {
  detail::ShapeEnergy energy{k, eps, cfg};
  const double target = area(s);
  const StarShape base = detail::with_modes(s, cfg.n_modes);
  const double E = energy(base);
  for (std::size_t m = 0; m < base.modes.size(); ++m)
    for (int c = 0; c < 2; ++c)
      for (double dir : {1.0, -1.0}) {
        if (base.modes[m].k < 2 || base.modes[m].k > cfg.n_modes) continue;
        StarShape trial = base;
        (c == 0 ? trial.modes[m].a : trial.modes[m].b) += dir * step;
        if (!detail::usable(trial)) continue;
        if (energy(project_volume(trial, target)) < E - cfg.tol_energy) return false;
      }
  return true;
}

// ---------------------------------------------------------------------------
// Generalized minimization over finitely many components at infinite distance

struct GeneralizedResult {
  ComponentList components;
  MinimizeTrace trace;
  std::vector<double> masses;
  EnergyBreakdown energy;
  std::vector<double> best_by_count;  // index H-1; best total energy with H components
  std::vector<std::vector<double>> best_masses_by_count;
  MinimizeTrace single;  // the H = 1 run
  bool locally_optimal = false;
};

inline void to_json(json& j, const GeneralizedResult& r) {
  json comps = json::array();
  for (const auto& s : r.components.components) comps.push_back(to_json_value(s));
  j = json{{"components", comps},
           {"masses", r.masses},
           {"energy", r.energy},
           {"best_by_count", r.best_by_count},
           {"locally_optimal", r.locally_optimal},
           {"trace", r.trace}};
}

namespace detail {

// Sorted allocations of `units` into h positive parts, most balanced first.
inline std::vector<std::vector<int>> simplex_allocations(int units, int h) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int, int, int)> rec = [&](int left, int parts, int min_part) {
    if (parts == 1) {
      if (left >= min_part) {
        cur.push_back(left);
        out.push_back(cur);
        cur.pop_back();
      }
      return;
    }
    for (int p = min_part; p * parts <= left; ++p) {
      cur.push_back(p);
      rec(left - p, parts - 1, p);
      cur.pop_back();
    }
  };
  rec(units, h, 1);
  auto spread = [](const std::vector<int>& a) { return a.back() - a.front(); };
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return spread(a) < spread(b); });
  return out;
}

}  // namespace detail

// Outer search over the component count H and the mass split, inner
// minimize_single per component.  Each component starts from `warm` when
// given, otherwise from a seeded small perturbation of the disk, so that
// symmetric minimizers can still lose symmetry.
inline GeneralizedResult minimize_generalized(const KernelSpec& k, double eps, int H_max, const OptimizerConfig& cfg,
                                              const StarShape* warm = nullptr, double total_area = kPi) {
  validate(cfg);
  require_epsilon(eps);
  if (H_max < 1) throw PreconditionError("minimize_generalized: H_max must be >= 1");
  if (!(total_area > 0.0)) throw PreconditionError("minimize_generalized: total area must be > 0");
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(cfg.seed);
  const StarShape start = warm ? *warm : random_start(rng, cfg.n_modes, cfg.start_amplitude);

  std::map<double, MinimizeTrace> cache;
  std::size_t evaluations = 0;
  auto component = [&](double m) -> const MinimizeTrace& {
    auto it = cache.find(m);
    if (it == cache.end()) {
      it = cache.emplace(m, minimize_single(k, eps, start, cfg, m)).first;
      evaluations += it->second.evaluations;
    }
    return it->second;
  };
  auto total = [&](const std::vector<double>& ms) {
    std::vector<double> e;
    for (double m : ms) e.push_back(component(m).final_energy());
    return pairwise_sum(e);
  };

  GeneralizedResult res;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_ms;
  std::vector<IterationRecord> history;
  auto consider = [&](const std::vector<double>& ms, double E) {
    if (E < best) {
      best = E;
      best_ms = ms;
      history.push_back({static_cast<int>(history.size()), E, 0.0, total_area});
    }
  };

  for (int H = 1; H <= H_max; ++H) {
    const int units = cfg.mass_grid * H;
    double bestH = std::numeric_limits<double>::infinity();
    std::vector<double> msH;
    for (const auto& alloc : detail::simplex_allocations(units, H)) {
      std::vector<double> ms;
      for (int a : alloc) ms.push_back(total_area * a / units);
      const double E = total(ms);
      if (E < bestH) bestH = E, msH = ms;
    }
    // refinement around the incumbent: move mass between pairs of components
    double d = total_area / units;
    for (int round = 0; round < cfg.refine_rounds && H > 1; ++round) {
      d *= 0.5;
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < H; ++j) {
          if (i == j || msH[static_cast<std::size_t>(i)] - d <= 0.0) continue;
          std::vector<double> ms = msH;
          ms[static_cast<std::size_t>(i)] -= d;
          ms[static_cast<std::size_t>(j)] += d;
          std::sort(ms.begin(), ms.end());
          const double E = total(ms);
          if (E < bestH) bestH = E, msH = ms;
        }
    }
    res.best_by_count.push_back(bestH);
    res.best_masses_by_count.push_back(msH);
    consider(msH, bestH);
  }

  res.single = component(total_area);
  res.masses = best_ms;
  bool converged = true;
  res.locally_optimal = true;
  for (double m : best_ms) {
    const MinimizeTrace& t = component(m);
    res.components.components.push_back(t.final_shapes.front());
    converged = converged && t.converged;
    res.locally_optimal =
        res.locally_optimal && locally_optimal(k, eps, t.final_shapes.front(), cfg, 10.0 * cfg.tol_step);
  }
  res.energy = eps > 0.0 ? generalized_energy(k, eps, res.components, cfg.riesz_nodes)
                         : make_breakdown(best, 0.0, 0.0);
  const auto largest = std::max_element(best_ms.begin(), best_ms.end()) - best_ms.begin();
  res.trace.iterations = std::move(history);
  res.trace.final_shapes = res.components.components;
  res.trace.asymmetry = component(best_ms[static_cast<std::size_t>(largest)]).asymmetry;
  res.trace.converged = converged;
  res.trace.sweeps = static_cast<int>(cache.size());
  res.trace.evaluations = evaluations;
  res.trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// ---------------------------------------------------------------------------
// Epsilon sweeps

struct SweepRow {
  double eps = 0.0;
  double best_single_energy = std::nan("");
  double best_split_energy = std::nan("");  // over H = 1..H_max
  double best_multi_energy = std::nan("");  // over H = 2..H_max
  int n_components = 0;
  double asymmetry = std::nan("");          // of the single-component minimizer
  std::vector<double> masses;
  bool ok = true;
  std::string error;
  std::optional<StarShape> single_shape;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> threshold;               // first eps where splitting wins
  std::optional<double> threshold_interpolated;  // zero of the linearly interpolated energy gap
};

inline void to_json(json& j, const SweepRow& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  j = json{{"eps", r.eps},
           {"best_single_energy", num(r.best_single_energy)},
           {"best_split_energy", num(r.best_split_energy)},
           {"best_multi_energy", num(r.best_multi_energy)},
           {"n_components", r.n_components},
           {"asymmetry", num(r.asymmetry)},
           {"masses", r.masses},
           {"status", r.ok ? "ok" : "failed"}};
  if (!r.ok) j["error"] = r.error;
}

inline void to_json(json& j, const SweepResult& s) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  j = json{{"rows", s.rows}, {"threshold", opt(s.threshold)}, {"threshold_interpolated", opt(s.threshold_interpolated)}};
}

inline std::string sweep_csv_header() {
  return "eps,best_single_energy,best_split_energy,best_multi_energy,n_components,asymmetry,masses,status,"
         "single_shape";
}

namespace detail {

inline std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// cx;cy;r0;k:a:b;... with round-trip precision
inline std::string encode_shape(const StarShape& s) {
  std::string out = exact(s.center.x) + ';' + exact(s.center.y) + ';' + exact(s.r0);
  for (const auto& m : s.modes) out += ';' + std::to_string(m.k) + ':' + exact(m.a) + ':' + exact(m.b);
  return out;
}

inline StarShape decode_shape(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ';')) parts.push_back(p);
  if (parts.size() < 3) throw PreconditionError("bad shape encoding: " + text);
  StarShape s{{std::stod(parts[0]), std::stod(parts[1])}, std::stod(parts[2]), {}};
  for (std::size_t i = 3; i < parts.size(); ++i) {
    const auto c1 = parts[i].find(':'), c2 = parts[i].rfind(':');
    if (c1 == std::string::npos || c1 == c2) throw PreconditionError("bad shape encoding: " + text);
    s.modes.push_back({std::stoi(parts[i].substr(0, c1)), std::stod(parts[i].substr(c1 + 1, c2 - c1 - 1)),
                       std::stod(parts[i].substr(c2 + 1))});
  }
  validate(s);
  return s;
}

}  // namespace detail

inline std::string to_csv_line(const SweepRow& r) {
  using detail::exact;
  std::string masses;
  for (std::size_t i = 0; i < r.masses.size(); ++i) masses += (i ? ";" : "") + exact(r.masses[i]);
  return exact(r.eps) + ',' + exact(r.best_single_energy) + ',' + exact(r.best_split_energy) + ',' +
         exact(r.best_multi_energy) + ',' + std::to_string(r.n_components) + ',' + exact(r.asymmetry) + ',' + masses +
         ',' + (r.ok ? "ok" : "failed") + ',' + (r.single_shape ? detail::encode_shape(*r.single_shape) : "");
}

inline std::string to_csv(const SweepResult& s) {
  std::string out = sweep_csv_header() + '\n';
  for (const auto& r : s.rows) out += to_csv_line(r) + '\n';
  return out;
}

// Rows previously written by to_csv, after any leading '#' lines; failed
// rows are dropped so they rerun.
inline std::vector<SweepRow> sweep_rows_from_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  while (std::getline(in, line) && !line.empty() && line.front() == '#') {
  }
  if (line.empty()) return rows;
  if (line != sweep_csv_header()) throw PreconditionError("sweep checkpoint: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw PreconditionError("sweep checkpoint: malformed row: " + line);
    if (f[7] != "ok") continue;
    SweepRow r;
    try {
      r.eps = std::stod(f[0]);
      r.best_single_energy = std::stod(f[1]);
      r.best_split_energy = std::stod(f[2]);
      r.best_multi_energy = std::stod(f[3]);
      r.n_components = std::stoi(f[4]);
      r.asymmetry = std::stod(f[5]);
      std::stringstream ms(f[6]);
      while (std::getline(ms, cell, ';'))
        if (!cell.empty()) r.masses.push_back(std::stod(cell));
      if (!f[8].empty()) r.single_shape = detail::decode_shape(f[8]);
    } catch (const std::exception&) {
      throw PreconditionError("sweep checkpoint: malformed row: " + line);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void estimate_thresholds(SweepResult& s, double tol) {
  s.threshold.reset();
  s.threshold_interpolated.reset();
  const SweepRow* prev = nullptr;
  for (const auto& r : s.rows) {
    if (!r.ok || !std::isfinite(r.best_multi_energy)) continue;
    const double gap = r.best_single_energy - r.best_multi_energy;
    if (gap > tol) {
      s.threshold = r.eps;
      if (prev) {
        const double g0 = prev->best_single_energy - prev->best_multi_energy;
        s.threshold_interpolated = prev->eps + (r.eps - prev->eps) * (-g0) / (gap - g0);
      } else {
        s.threshold_interpolated = r.eps;
      }
      return;
    }
    prev = &r;
  }
}

// Rows whose eps already appears in `done` are reused as they are.  The
// single-component minimizer of each row seeds the next one.  on_row sees
// every row as soon as it is final, which is how callers checkpoint.
inline SweepResult epsilon_sweep(const KernelSpec& k, const std::vector<double>& eps_list, const OptimizerConfig& cfg,
                                 int H_max = 2, const std::vector<SweepRow>& done = {},
                                 const std::function<void(const SweepRow&)>& on_row = {}) {
  validate(cfg);
  if (eps_list.empty()) throw PreconditionError("epsilon_sweep: empty epsilon list");
  if (!std::is_sorted(eps_list.begin(), eps_list.end())) throw PreconditionError("epsilon_sweep: eps list must be sorted");
  for (double e : eps_list) require_epsilon(e);
  SweepResult out;
  std::optional<StarShape> warm;
  for (double eps : eps_list) {
    auto hit = std::find_if(done.begin(), done.end(), [eps](const SweepRow& r) { return r.eps == eps; });
    SweepRow row;
    if (hit != done.end()) {
      row = *hit;
      if (row.single_shape) warm = row.single_shape;
    } else {
      row.eps = eps;
      try {
        const GeneralizedResult g = minimize_generalized(k, eps, H_max, cfg, warm ? &*warm : nullptr);
        row.best_single_energy = g.best_by_count.front();
        row.best_split_energy = g.energy.total;
        if (g.best_by_count.size() > 1)
          row.best_multi_energy = *std::min_element(g.best_by_count.begin() + 1, g.best_by_count.end());
        row.n_components = static_cast<int>(g.masses.size());
        row.masses = g.masses;
        row.asymmetry = g.single.asymmetry.asymmetry;
        row.single_shape = g.single.final_shapes.front();
        warm = row.single_shape;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
    if (on_row) on_row(row);
    out.rows.push_back(std::move(row));
  }
  estimate_thresholds(out, cfg.tol_energy);
  return out;
}

// Energy against eps for the best single and best split configuration.
inline std::string fission_svg(const SweepResult& s) {
  svg::Series single{"single", {}, "#1f4e9c"}, multi{"split", {}, "#c0392b"};
  for (const auto& r : s.rows) {
    if (!r.ok) continue;
    single.points.push_back({r.eps, r.best_single_energy});
    if (std::isfinite(r.best_multi_energy)) multi.points.push_back({r.eps, r.best_multi_energy});
  }
  std::vector<std::pair<double, std::string>> marks;
  if (s.threshold_interpolated) marks.emplace_back(*s.threshold_interpolated, "threshold");
  return svg::line_plot({single, multi}, "epsilon", "energy", marks);
}

// Components side by side, each centred on its own slot.
inline std::string shapes_svg(const std::vector<StarShape>& shapes) {
  if (shapes.empty()) throw PreconditionError("shapes_svg: nothing to draw");
  double rmax = 0.0;
  for (const auto& s : shapes) {
    for (const Vec2& p : boundary(s, 256)) rmax = std::max(rmax, norm(p - s.center));
  }
  const double slot = 2.4 * rmax;
  svg::Document d({-0.5 * slot, -0.5 * slot}, {slot * (static_cast<double>(shapes.size()) - 0.5), 0.5 * slot});
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const StarShape& s = shapes[i];
    std::vector<Vec2> pts;
    for (const Vec2& p : boundary(s, 512)) pts.push_back(p - s.center + Vec2{slot * static_cast<double>(i), 0.0});
    d.circle({slot * static_cast<double>(i), 0.0}, std::sqrt(area(s) / kPi), {"#999", "none", 1.0, "4,3"});
    d.polyline(pts, {"#1f4e9c", "#dce6f5", 1.5, ""}, true);
  }
  return d.str();
}

// ---------------------------------------------------------------------------
// Ball minimality at desk scale

// Best energy of the unit disk and of two half-area disks far apart.
inline double two_ball_energy(const KernelSpec& k, double eps, double separation, std::size_t nodes = 0) {
  const double r = std::sqrt(0.5);
  const StarShape a = disk(r), b = disk(r, {separation, 0.0});
  double e = 2.0 * perimeter(a);
  if (eps > 0.0) e += eps * (2.0 * riesz_self(k, a, nodes) + 2.0 * riesz_interaction(k, a, b, nodes));
  return e;
}

// (i) the unit disk beats every random area-pi start and a distant pair of
// half disks; (ii) descent from every start returns close to a disk;
// (iii) the returned asymmetry obeys sqrt(eps R(B) / C) with C the smallest
// isoperimetric deficit over squared asymmetry seen on the starts, up to
// cfg.asymmetry_floor.  Kernel hypotheses are checked and reported as flags;
// a failed hypothesis is also a witness.
inline CheckReport ball_minimality_test(const KernelSpec& k, double eps, std::size_t n_perturbations,
                                        const OptimizerConfig& cfg, double split_separation = 1000.0) {
  validate(cfg);
  require_epsilon(eps);
  require_planar(k);
  if (n_perturbations < 1) throw PreconditionError("ball_minimality_test: need at least one perturbation");
  CheckReport rep;
  rep.flags["decreasing"] = check_decreasing(k, default_decreasing_grid()).passed;
  rep.flags["positive_definite"] = check_pd_fourier(k).passed;
  const auto lip = lipschitz_integral(k, 2);
  rep.flags["lipschitz_finite"] = lip.has_value() && std::isfinite(*lip);
  for (const char* h : {"decreasing", "positive_definite", "lipschitz_finite"})
    if (!rep.flags[h]) rep.add_witness(json{{"check", "hypothesis"}, {"hypothesis", h}});

  std::mt19937_64 rng(cfg.seed);
  std::vector<StarShape> starts;
  for (std::size_t i = 0; i < n_perturbations; ++i)
    starts.push_back(random_start(rng, cfg.n_modes, 0.1 + 0.2 * std::generate_canonical<double, 53>(rng)));

  detail::ShapeEnergy energy{k, eps, cfg};
  const double ball = energy(disk());
  const double riesz_ball = riesz_self(k, disk(), cfg.riesz_nodes);
  rep.values["ball_energy"] = ball;
  rep.values["riesz_ball"] = riesz_ball;

  std::vector<double> start_energy(n_perturbations), qii(n_perturbations);
  std::vector<MinimizeTrace> traces(n_perturbations);
  parallel_for(n_perturbations, [&](std::size_t i) {
    detail::ShapeEnergy e{k, eps, cfg};
    start_energy[i] = e(starts[i]);
    const double asym = detail::normalized_asymmetry(starts[i]).asymmetry;
    qii[i] = (perimeter(starts[i], cfg.perimeter_nodes) - 2.0 * kPi) / (asym * asym);
    traces[i] = minimize_single(k, eps, starts[i], cfg);
  });

  const double split = two_ball_energy(k, eps, split_separation, cfg.riesz_nodes);
  rep.values["split_energy"] = split;
  if (ball > split + cfg.tol_energy)
    rep.add_witness(json{{"check", "ball_vs_start"}, {"competitor", "two_balls"}, {"ball_energy", ball},
                         {"energy", split}, {"separation", split_separation}});

  const double C = *std::min_element(qii.begin(), qii.end());
  const double bound = std::sqrt(eps * riesz_ball / C);
  rep.values["c_qii"] = C;
  rep.values["asymmetry_bound"] = bound;
  double worst_asym = 0.0;
  for (std::size_t i = 0; i < n_perturbations; ++i) {
    ++rep.samples_used;
    if (ball > start_energy[i] + cfg.tol_energy)
      rep.add_witness(json{{"check", "ball_vs_start"}, {"index", i}, {"ball_energy", ball},
                           {"energy", start_energy[i]}, {"shape", to_json_value(starts[i])}});
    const double a = traces[i].asymmetry.asymmetry;
    worst_asym = std::max(worst_asym, a);
    if (!(a < cfg.asymmetry_tol))
      rep.add_witness(json{{"check", "descent_returns_to_ball"}, {"index", i}, {"asymmetry", a}});
    if (a > bound + cfg.asymmetry_floor)
      rep.add_witness(json{{"check", "asymmetry_bound"}, {"index", i}, {"asymmetry", a}, {"bound", bound}});
  }
  rep.values["max_final_asymmetry"] = worst_asym;
  rep.extremal_ratio = worst_asym;
  return rep;
}

}  // namespace gamow
