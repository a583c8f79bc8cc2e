#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "gamow/core.hpp"
#include "gamow/energy.hpp"
#include "gamow/kernel.hpp"
#include "gamow/raster.hpp"

namespace gamow {

// Seeded source of raster pairs on a common lattice: unions of disks, unions
// of rectangles, or Bernoulli noise on a sub-box, all inside [-h, h]^2.
class RandomRasterPairs {
 public:
  explicit RandomRasterPairs(std::uint64_t seed, double pitch = 1.0 / 16, double half_width = 1.0)
      : rng_(seed), pitch_(pitch), h_(half_width) {}

  double pitch() const { return pitch_; }

  RasterSet next_set() {
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> pos(-0.6 * h_, 0.6 * h_);
    std::uniform_real_distribution<double> size(0.1 * h_, 0.6 * h_);
    const Vec2 lo{-h_, -h_}, hi{h_, h_};
    for (;;) {
      RasterSet r;
      switch (kind(rng_)) {
        case 0: {
          std::vector<std::pair<Vec2, double>> disks(static_cast<std::size_t>(count(rng_)));
          for (auto& d : disks) d = {{pos(rng_), pos(rng_)}, size(rng_)};
          r = raster_from_predicate(lo, hi, pitch_, [&](Vec2 p) {
            return std::any_of(disks.begin(), disks.end(), [&](const auto& d) { return norm(p - d.first) <= d.second; });
          });
          break;
        }
        case 1: {
          std::vector<std::pair<Vec2, Vec2>> rects(static_cast<std::size_t>(count(rng_)));
          for (auto& q : rects) q = {{pos(rng_), pos(rng_)}, {size(rng_), size(rng_)}};
          r = raster_from_predicate(lo, hi, pitch_, [&](Vec2 p) {
            return std::any_of(rects.begin(), rects.end(), [&](const auto& q) {
              return std::abs(p.x - q.first.x) <= q.second.x && std::abs(p.y - q.first.y) <= q.second.y;
            });
          });
          break;
        }
        default: {
          const Vec2 c{pos(rng_), pos(rng_)};
          const double s = size(rng_);
          r = raster_from_predicate(lo, hi, pitch_, [](Vec2) { return false; });
          std::bernoulli_distribution fill(0.35);
          for (int j = 0; j < r.ny; ++j)
            for (int i = 0; i < r.nx; ++i) {
              const Vec2 p = r.cell_center(i, j);
              const bool in_box = std::abs(p.x - c.x) <= s && std::abs(p.y - c.y) <= s;
              if (fill(rng_) && in_box) r.set(i, j);
            }
        }
      }
      if (!r.empty()) return r;
    }
  }

  std::pair<RasterSet, RasterSet> next() {
    RasterSet f = next_set();
    RasterSet g = next_set();
    return {std::move(f), std::move(g)};
  }

 private:
  std::mt19937_64 rng_;
  double pitch_;
  double h_;
};

// R(F) + R(G) >= 2 R(F, G) on n random raster pairs.  extremal_ratio is the
// smallest slack relative to R(F) + R(G).
inline CheckReport check_pd_inequality(const KernelSpec& k, RandomRasterPairs& source, std::size_t n_pairs,
                                       double tol = 1e-6) {
  if (!admissible(k)) throw PreconditionError("check_pd_inequality: kernel is not admissible");
  CellTable table(k, source.pitch());
  CheckReport rep;
  rep.samples_used = n_pairs;
  double min_slack = 1e300, min_ratio = 1e300;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto [F, G] = source.next();
    const double slack = pd_slack(table, F, G);
    const double scale = riesz_interaction(table, F, F) + riesz_interaction(table, G, G);
    min_slack = std::min(min_slack, slack);
    min_ratio = std::min(min_ratio, slack / scale);
    if (slack < -tol) rep.add_witness(json{{"pair", i}, {"slack", slack}, {"F", to_pbm(F)}, {"G", to_pbm(G)}});
  }
  rep.extremal_ratio = min_ratio;
  rep.values["min_slack"] = min_slack;
  return rep;
}

// Three parallel strips of length `length` and width `width`: F holds the
// outer two at x = +-s, G the middle one.  Returns the pair.
inline std::pair<RasterSet, RasterSet> strip_pair(double s, double width, double length, double pitch) {
  const double hw = 0.5 * width, hl = 0.5 * length;
  const Vec2 lo{-s - width, -hl - pitch}, hi{s + width, hl + pitch};
  RasterSet F = raster_from_predicate(lo, hi, pitch, [&](Vec2 p) {
    return std::abs(p.y) < hl && (std::abs(p.x - s) < hw || std::abs(p.x + s) < hw);
  });
  RasterSet G = raster_from_predicate(lo, hi, pitch, [&](Vec2 p) { return std::abs(p.y) < hl && std::abs(p.x) < hw; });
  return {std::move(F), std::move(G)};
}

// Directed search over the strip spacing s for a pair violating the
// positive-definiteness inequality.  The most negative slack is reported as
// the witness; passed stays true when every slack is >= -tol.
inline CheckReport search_pd_strip_witness(const KernelSpec& k, double tol = 1e-9) {
  const double ell = length_scale(k);
  const double pitch = ell / 32.0, width = ell / 16.0, length = 4.0 * ell;
  CellTable table(k, pitch);
  CheckReport rep;
  double best = 1e300, best_s = 0.0, best_scale = 1.0;
  for (int i = 8; i <= 48; ++i) {
    const double s = i * ell / 32.0;
    const auto [F, G] = strip_pair(s, width, length, pitch);
    const double slack = pd_slack(table, F, G);
    ++rep.samples_used;
    if (slack < best) {
      best = slack;
      best_s = s;
      best_scale = riesz_interaction(table, F, F) + riesz_interaction(table, G, G);
    }
  }
  rep.extremal_ratio = best / best_scale;
  rep.values["min_slack"] = best;
  rep.values["spacing"] = best_s;
  if (best < -tol) {
    const auto [F, G] = strip_pair(best_s, width, length, pitch);
    rep.add_witness(json{{"spacing", best_s},
                         {"width", width},
                         {"length", length},
                         {"slack", best},
                         {"F", to_pbm(F)},
                         {"G", to_pbm(G)}});
  }
  return rep;
}

// R(F, G) <= |F| phi(|G|) on random raster pairs.  extremal_ratio is the
// largest R(F, G) / (|F| phi(|G|)).
inline CheckReport check_concentration_bound(const KernelSpec& k, RandomRasterPairs& source, std::size_t n_pairs,
                                             double rel_tol = 1e-9) {
  if (!admissible(k)) throw PreconditionError("check_concentration_bound: kernel is not admissible");
  CellTable table(k, source.pitch());
  CheckReport rep;
  rep.samples_used = n_pairs;
  double worst = 0.0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto [F, G] = source.next();
    const double lhs = riesz_interaction(table, F, G);
    const double rhs = area(F) * concentration_bound_phi(k, area(G));
    worst = std::max(worst, lhs / rhs);
    if (lhs > rhs * (1.0 + rel_tol)) rep.add_witness(json{{"pair", i}, {"interaction", lhs}, {"bound", rhs}});
  }
  rep.extremal_ratio = worst;
  return rep;
}

}  // namespace gamow
