#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gamow/core.hpp"
#include "gamow/energy.hpp"
#include "gamow/fixtures.hpp"
#include "gamow/kernel.hpp"
#include "gamow/lens.hpp"
#include "gamow/minimize.hpp"
#include "gamow/parallel.hpp"
#include "gamow/positive_definite.hpp"
#include "gamow/raster.hpp"
#include "gamow/star_shape.hpp"

namespace gamow::cli {

enum Exit : int { pass = 0, fail = 1, config_error = 2, partial = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Schema: allowed top-level keys per subcommand.  Nested objects (optimizer,
// lens, set) are checked by their own readers.

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"kernel-check", {"kernel", "checks", "pd_tol", "seed"}},
      {"energy", {"kernel", "epsilon", "shape", "components", "nodes", "svg", "seed"}},
      {"minimize", {"kernel", "epsilon", "start", "h_max", "optimizer", "svg", "seed"}},
      {"sweep", {"kernel", "epsilons", "h_max", "optimizer", "svg", "seed", "resume"}},
      {"lens-verify", {"lens", "svg", "seed"}},
      {"cut-paste", {"kernel", "epsilon", "set", "band", "m_bar", "window", "seed"}},
      {"report", {"seed"}},
  };
  return s;
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key " + it.key());
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key " + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": bad type for " + key);
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

// FNV-1a over the canonical dump; object keys are sorted by nlohmann::json.
inline std::string config_hash(const json& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : cfg.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Plain tolerance names and the section they live in.
inline std::string override_path(const std::string& key) {
  static const std::map<std::string, std::string> plain{
      {"tol_energy", "optimizer"}, {"tol_step", "optimizer"},  {"asymmetry_tol", "optimizer"},
      {"asymmetry_floor", "optimizer"}, {"fd_tol", "lens"},     {"slack_tol", "lens"},
      {"pd_tol", ""}};
  if (key.find('.') != std::string::npos) return key;
  auto it = plain.find(key);
  if (it == plain.end()) throw ConfigError("--tol-override: unknown key " + key);
  return it->second.empty() ? key : it->second + "." + key;
}

inline void apply_override(json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("--tol-override needs KEY=VAL: " + kv);
  const std::string path = override_path(kv.substr(0, eq));
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(kv.substr(eq + 1), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != kv.size() - eq - 1) throw ConfigError("--tol-override: bad value in " + kv);
  const auto dot = path.find('.');
  if (dot == std::string::npos) {
    cfg[path] = v;
  } else {
    json& sec = cfg[path.substr(0, dot)];
    if (sec.is_null()) sec = json::object();
    sec[path.substr(dot + 1)] = v;
  }
}

struct Context {
  std::string command;
  json config;  // effective, after flags and overrides
  std::string hash;
  std::filesystem::path out;

  std::string stamp() const { return std::string("gamow ") + kVersion + " config_hash=" + hash; }

  json envelope(bool passed, json result) const {
    json shown = config;
    shown.erase("resume");
    return json{{"version", kVersion}, {"config_hash", hash}, {"command", command},
                {"config", shown},     {"passed", passed},    {"result", std::move(result)}};
  }

  // Single writer for every output file.
  void write(const std::string& name, const std::string& text) const {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out / name).string());
    f << text;
  }
  void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }
  void write_svg(const std::string& name, const std::string& svg) const {
    write(name, "<!-- " + stamp() + " -->\n" + svg);
  }
  void write_csv(const std::string& name, const std::string& csv) const { write(name, "# " + stamp() + "\n" + csv); }
};

inline KernelSpec kernel_of(const json& cfg, const std::string& where) {
  try {
    return parse_kernel(get<std::string>(cfg, "kernel", where));
  } catch (const PreconditionError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline double epsilon_of(const json& cfg, const std::string& where) {
  const double eps = get<double>(cfg, "epsilon", where);
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError(where + ": epsilon must be >= 0");
  return eps;
}

// A shape is given inline or as the path of a JSON file.
inline StarShape shape_of(const json& v, const std::string& where) {
  try {
    if (v.is_string()) {
      std::ifstream f(v.get<std::string>());
      if (!f) throw ConfigError(where + ": cannot read " + v.get<std::string>());
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw ConfigError(where + ": malformed shape file: " + e.what());
      }
      return star_shape_from_json(j);
    }
    return star_shape_from_json(v);
  } catch (const PreconditionError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline OptimizerConfig optimizer_of(const json& cfg) {
  OptimizerConfig c;
  try {
    if (cfg.contains("optimizer")) c = optimizer_config_from_json(cfg.at("optimizer"));
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.contains("seed")) c.seed = get<std::uint64_t>(cfg, "seed", "config");
  return c;
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_kernel_check(const Context& ctx) {
  const json& cfg = ctx.config;
  const KernelSpec k = kernel_of(cfg, "kernel-check");
  static const std::set<std::string> known{"admissibility", "lipschitz", "decreasing", "pd"};
  std::vector<std::string> checks{"admissibility", "lipschitz", "decreasing", "pd"};
  if (cfg.contains("checks")) checks = get<std::vector<std::string>>(cfg, "checks", "kernel-check");
  for (const auto& c : checks)
    if (!known.count(c)) throw ConfigError("kernel-check: unknown check " + c);
  const double pd_tol = get_or<double>(cfg, "pd_tol", 1e-9, "kernel-check");

  json result{{"kernel", to_string(k)}};
  bool all = true;
  auto integral = [&](const std::string& name, std::optional<double> v) {
    const bool ok = v.has_value() && std::isfinite(*v);
    result[name] = json{{"passed", ok}, {"status", ok ? "FINITE" : "DIVERGENT"}, {"value", ok ? json(*v) : json()}};
    all = all && ok;
  };
  for (const auto& c : checks) {
    if (c == "admissibility") {
      integral(c, admissibility_integral(k, k.dim));
    } else if (c == "lipschitz") {
      integral(c, lipschitz_integral(k, k.dim));
    } else if (c == "decreasing") {
      const CheckReport r = check_decreasing(k, default_decreasing_grid());
      result[c] = json{{"passed", r.passed}, {"witnesses", r.witnesses}, {"flags", r.flags}};
      all = all && r.passed;
    } else {
      const CheckReport f = check_pd_fourier(k);
      json entry{{"passed", f.passed}, {"fourier", {{"passed", f.passed}, {"min_ratio", f.extremal_ratio}}}};
      if (k.dim == 2 && admissible(k)) {
        const CheckReport s = search_pd_strip_witness(k, pd_tol);
        entry["strip_search"] = json{{"passed", s.passed}, {"values", s.values}};
        if (!s.passed) {
          const json& w = s.witnesses.front();
          ctx.write("kernel_check_witness_F.pbm", w.at("F").get<std::string>());
          ctx.write("kernel_check_witness_G.pbm", w.at("G").get<std::string>());
          entry["witness"] = json{{"spacing", w.at("spacing")},
                                  {"slack", w.at("slack")},
                                  {"files", {"kernel_check_witness_F.pbm", "kernel_check_witness_G.pbm"}}};
        }
        entry["passed"] = f.passed && s.passed;
      }
      all = all && entry["passed"].get<bool>();
      result[c] = entry;
    }
  }
  ctx.write_json("kernel_check.json", ctx.envelope(all, result));
  return all ? pass : fail;
}

inline int cmd_energy(const Context& ctx) {
  const json& cfg = ctx.config;
  const KernelSpec k = kernel_of(cfg, "energy");
  const double eps = epsilon_of(cfg, "energy");
  const auto nodes = get_or<std::size_t>(cfg, "nodes", 0, "energy");
  if (cfg.contains("shape") == cfg.contains("components"))
    throw ConfigError("energy: give exactly one of shape, components");
  std::vector<StarShape> shapes;
  if (cfg.contains("shape")) {
    shapes.push_back(shape_of(cfg.at("shape"), "energy.shape"));
  } else {
    const json& list = cfg.at("components");
    if (!list.is_array() || list.empty()) throw ConfigError("energy: components must be a non-empty array");
    for (const auto& c : list) shapes.push_back(shape_of(c, "energy.components"));
  }
  EnergyBreakdown e = shapes.size() == 1 ? gamow_energy(k, eps, shapes.front(), nodes)
                                         : generalized_energy(k, eps, ComponentList{shapes}, nodes);
  json result{{"kernel", to_string(k)}, {"energy", e}};
  double a = 0.0;
  for (const auto& s : shapes) a += area(s);
  result["area"] = a;
  ctx.write_json("energy.json", ctx.envelope(true, result));
  if (get_or<bool>(cfg, "svg", true, "energy")) ctx.write_svg("energy.svg", shapes_svg(shapes));
  return pass;
}

inline int cmd_minimize(const Context& ctx) {
  const json& cfg = ctx.config;
  const KernelSpec k = kernel_of(cfg, "minimize");
  const double eps = epsilon_of(cfg, "minimize");
  const OptimizerConfig oc = optimizer_of(cfg);
  const int h_max = get_or<int>(cfg, "h_max", 1, "minimize");
  if (h_max < 1) throw ConfigError("minimize: h_max must be >= 1");
  std::mt19937_64 rng(oc.seed);
  const StarShape start = cfg.contains("start") ? shape_of(cfg.at("start"), "minimize.start")
                                                : random_start(rng, oc.n_modes, 0.1);
  json result{{"kernel", to_string(k)}, {"epsilon", eps}};
  bool ok = false;
  std::vector<StarShape> shapes;
  if (h_max == 1) {
    const MinimizeTrace t = minimize_single(k, eps, start, oc);
    result["trace"] = t;
    result["final_energy"] = t.final_energy();
    ok = t.converged;
    shapes = t.final_shapes;
  } else {
    const GeneralizedResult g = minimize_generalized(k, eps, h_max, oc, &start);
    result["generalized"] = g;
    ok = g.trace.converged && g.locally_optimal;
    shapes = g.components.components;
  }
  ctx.write_json("minimize.json", ctx.envelope(ok, result));
  if (get_or<bool>(cfg, "svg", true, "minimize")) ctx.write_svg("minimize.svg", shapes_svg(shapes));
  return ok ? pass : fail;
}

inline int cmd_sweep(const Context& ctx) {
  const json& cfg = ctx.config;
  const KernelSpec k = kernel_of(cfg, "sweep");
  const auto eps = get<std::vector<double>>(cfg, "epsilons", "sweep");
  if (eps.empty()) throw ConfigError("sweep: epsilons must not be empty");
  if (!std::is_sorted(eps.begin(), eps.end())) throw ConfigError("sweep: epsilons must be sorted");
  for (double e : eps)
    if (!(e >= 0.0)) throw ConfigError("sweep: epsilons must be >= 0");
  const OptimizerConfig oc = optimizer_of(cfg);
  const int h_max = get_or<int>(cfg, "h_max", 2, "sweep");
  if (h_max < 1) throw ConfigError("sweep: h_max must be >= 1");

  std::vector<SweepRow> done;
  const auto csv_path = ctx.out / "sweep.csv";
  if (get_or<bool>(cfg, "resume", false, "sweep") && std::filesystem::exists(csv_path)) {
    std::ifstream f(csv_path);
    std::string first;
    std::getline(f, first);
    if (first != "# " + ctx.stamp()) throw ConfigError("sweep: checkpoint belongs to a different config");
    f.seekg(0);
    try {
      done = sweep_rows_from_csv(f);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
  }

  // checkpoint: the CSV grows one flushed row at a time
  std::ofstream part(csv_path, std::ios::binary);
  if (!part) throw std::runtime_error("cannot write " + csv_path.string());
  part << "# " << ctx.stamp() << '\n' << sweep_csv_header() << '\n' << std::flush;
  const SweepResult s = epsilon_sweep(k, eps, oc, h_max, done, [&](const SweepRow& r) {
    part << to_csv_line(r) << '\n' << std::flush;
  });
  part.close();

  ctx.write_csv("sweep.csv", to_csv(s));
  const bool any_failed = std::any_of(s.rows.begin(), s.rows.end(), [](const SweepRow& r) { return !r.ok; });
  json result = s;
  result["kernel"] = to_string(k);
  result["h_max"] = h_max;
  ctx.write_json("sweep.json", ctx.envelope(!any_failed, result));
  if (get_or<bool>(cfg, "svg", true, "sweep")) ctx.write_svg("fission.svg", fission_svg(s));
  return any_failed ? partial : pass;
}

inline int cmd_lens_verify(const Context& ctx) {
  json lc = ctx.config.value("lens", json::object());
  check_keys(lc, {"n_theta", "n_delta", "fd_tol", "slack_tol", "delta_scale"}, "lens-verify.lens");
  const auto n_theta = get_or<std::size_t>(lc, "n_theta", 100, "lens");
  const auto n_delta = get_or<std::size_t>(lc, "n_delta", 101, "lens");
  const double fd_tol = get_or<double>(lc, "fd_tol", 1e-6, "lens");
  const double slack_tol = get_or<double>(lc, "slack_tol", 1e-12, "lens");
  const double scale = get_or<double>(lc, "delta_scale", 1.0, "lens");
  LensGridCheck g;
  try {
    g = lens_grid_check(n_theta, n_delta, fd_tol, slack_tol, scale);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  std::size_t outside = 0;
  for (const auto& r : g.rows) outside += !r.in_domain;
  auto summary = [](const CheckReport& r) {
    return json{{"passed", r.passed}, {"samples", r.samples_used}, {"extremal", r.extremal_ratio},
                {"values", r.values},  {"witnesses", r.witnesses}};
  };
  const bool ok = g.derivatives.passed && g.closed_forms.passed && g.inequality.passed && g.flat_slope.passed;
  json result{{"rows", g.rows.size()},
              {"out_of_domain_rows", outside},
              {"derivatives", summary(g.derivatives)},
              {"closed_forms", summary(g.closed_forms)},
              {"inequality", summary(g.inequality)},
              {"flat_slope", summary(g.flat_slope)}};
  ctx.write_csv("lens_grid.csv", to_csv(g.rows));
  ctx.write_json("lens_verify.json", ctx.envelope(ok, result));
  if (get_or<bool>(ctx.config, "svg", true, "lens-verify")) {
    ctx.write_svg("lens.svg", lens_svg(kPi / 4, 0.06));
    ctx.write_svg("min_curve.svg", min_curve_svg(min_curve_outer(0.3, 0.5)));
  }
  return ok ? pass : fail;
}

inline int cmd_cut_paste(const Context& ctx) {
  const json& cfg = ctx.config;
  const KernelSpec k = kernel_of(cfg, "cut-paste");
  const double eps = epsilon_of(cfg, "cut-paste");
  const json sc = cfg.value("set", json{{"fixture", "dumbbell"}});
  check_keys(sc, {"fixture", "pitch", "pbm"}, "cut-paste.set");
  RasterSet E;
  if (sc.contains("pbm")) {
    if (sc.contains("fixture")) throw ConfigError("cut-paste.set: give fixture or pbm, not both");
    try {
      E = read_pbm(get<std::string>(sc, "pbm", "cut-paste.set"));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("cut-paste.set: ") + e.what());
    }
  } else {
    const std::string name = get<std::string>(sc, "fixture", "cut-paste.set");
    const double pitch = get_or<double>(sc, "pitch", name == "dumbbell" ? 1.0 / 80 : 1.0 / 64, "cut-paste.set");
    if (!(pitch > 0.0)) throw ConfigError("cut-paste.set: pitch must be > 0");
    if (name == "dumbbell") E = fixtures::dumbbell(pitch);
    else if (name == "solid_disk") E = fixtures::solid_disk(pitch);
    else throw ConfigError("cut-paste.set: unknown fixture " + name);
  }
  const auto band = get_or<std::vector<double>>(cfg, "band", {-1.5, 1.5}, "cut-paste");
  if (band.size() != 2) throw ConfigError("cut-paste: band must be [a, b]");
  const double m_bar = get_or<double>(cfg, "m_bar", 1.0, "cut-paste");
  const double window = get_or<double>(cfg, "window", 0.0, "cut-paste");
  CutResult r;
  try {
    r = cut_and_paste(k, eps, E, band[0], band[1], m_bar, window);
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("cut-paste: ") + e.what());
  }
  const bool ok = r.outcome != CutOutcome::cut || r.delta_energy <= -r.guaranteed_decrease;
  ctx.write_json("cut_paste.json", ctx.envelope(ok, r));
  ctx.write("cut_paste_result.pbm", to_pbm(r.set));
  return ok ? pass : fail;
}

// Collects the JSON outputs already in the output directory into
// report.json and a markdown summary.
inline int cmd_report(const Context& ctx) {
  static const std::vector<std::string> files{"kernel_check.json", "energy.json",     "minimize.json",
                                              "sweep.json",        "lens_verify.json", "cut_paste.json"};
  json entries = json::array();
  std::ostringstream md;
  md << "# gamow report\n\n" << ctx.stamp() << "\n\n| command | passed | config hash |\n|---|---|---|\n";
  bool all = true;
  for (const auto& name : files) {
    const auto path = ctx.out / name;
    if (!std::filesystem::exists(path)) continue;
    std::ifstream f(path);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigError("report: malformed " + name + ": " + e.what());
    }
    const bool ok = j.value("passed", false);
    all = all && ok;
    entries.push_back(json{{"file", name}, {"command", j.value("command", "")}, {"passed", ok},
                           {"config_hash", j.value("config_hash", "")}});
    md << "| " << j.value("command", name) << " | " << (ok ? "yes" : "no") << " | " << j.value("config_hash", "")
       << " |\n";
  }
  if (entries.empty()) throw ConfigError("report: no outputs found in " + ctx.out.string());
  md << "\nFigures:";
  for (const char* svg : {"energy.svg", "minimize.svg", "fission.svg", "lens.svg", "min_curve.svg"})
    if (std::filesystem::exists(ctx.out / svg)) md << " [" << svg << "](" << svg << ")";
  md << "\n";
  ctx.write_json("report.json", ctx.envelope(all, json{{"entries", entries}}));
  ctx.write("report.md", md.str());
  return all ? pass : fail;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Liquid-drop energy toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  unsigned threads = 1;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed, overriding the config");
  app.add_option("--tol-override", overrides, "KEY=VAL tolerance override")->take_all();
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
  for (const auto& [name, keys] : schema()) app.add_subcommand(name, "");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return config_error;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  try {
    json cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read config " + config_path);
      try {
        cfg = json::parse(f);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
      }
    }
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& kv : overrides) apply_override(cfg, kv);
    if (seed) cfg["seed"] = *seed;
    check_keys(cfg, schema().at(ctx.command), ctx.command);
    // resuming must not change any output, so the flag is left out of the
    // embedded config and its hash
    const bool resume = get_or<bool>(cfg, "resume", false, ctx.command);
    cfg.erase("resume");
    ctx.config = cfg;
    json hashed = cfg;
    hashed["command"] = ctx.command;
    ctx.hash = config_hash(hashed);
    if (resume) ctx.config["resume"] = true;
    ctx.out = out_dir;
    std::filesystem::create_directories(ctx.out);
    set_default_threads(threads);

    if (ctx.command == "kernel-check") return cmd_kernel_check(ctx);
    if (ctx.command == "energy") return cmd_energy(ctx);
    if (ctx.command == "minimize") return cmd_minimize(ctx);
    if (ctx.command == "sweep") return cmd_sweep(ctx);
    if (ctx.command == "lens-verify") return cmd_lens_verify(ctx);
    if (ctx.command == "cut-paste") return cmd_cut_paste(ctx);
    return cmd_report(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return fail;
  }
}

}  // namespace gamow::cli
