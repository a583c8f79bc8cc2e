#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gamow/asymmetry.hpp"
#include "gamow/raster.hpp"
#include "gamow/star_shape.hpp"

using namespace gamow;

namespace {

StarShape random_shape(std::mt19937_64& rng, int n_modes, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  StarShape s = disk();
  for (int k = 1; k <= n_modes; ++k) s.modes.push_back({k + 1, u(rng), u(rng)});
  return s;
}

StarShape with_area_pi(StarShape s) {
  s.r0 *= std::sqrt(kPi / area(s));
  return s;
}

// Inscribed polyline lengths with Richardson extrapolation, doubled until
// successive estimates agree.
double polyline_length(const StarShape& s) {
  auto poly = [&](std::size_t n) {
    double L = 0.0;
    Vec2 prev = boundary_point(s, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
      const Vec2 p = boundary_point(s, 2.0 * kPi * static_cast<double>(i) / n);
      L += norm(p - prev);
      prev = p;
    }
    return L;
  };
  std::size_t n = 1024;
  double prev_est = 0.0;
  double lo = poly(n);
  for (int it = 0; it < 12; ++it) {
    const double hi = poly(2 * n);
    const double est = (4.0 * hi - lo) / 3.0;
    if (it > 0 && std::abs(est - prev_est) < 1e-8) return est;
    prev_est = est;
    lo = hi;
    n *= 2;
  }
  return prev_est;
}

double two_disk_lens(double R, double d) {
  return 2.0 * R * R * std::acos(d / (2.0 * R)) - 0.5 * d * std::sqrt(4.0 * R * R - d * d);
}

RasterSet dumbbell(double pitch) {
  // squares [-2.5,-1.5]x[-0.5,0.5] and [1.5,2.5]x[-0.5,0.5] joined by a strip of
  // thickness 0.05 along y in [-0.025, 0.025]
  return raster_from_predicate({-3, -1}, {3, 1}, pitch, [](Vec2 p) {
    const bool left = p.x >= -2.5 && p.x <= -1.5 && std::abs(p.y) <= 0.5;
    const bool right = p.x >= 1.5 && p.x <= 2.5 && std::abs(p.y) <= 0.5;
    const bool neck = p.x > -1.5 && p.x < 1.5 && std::abs(p.y) <= 0.025;
    return left || right || neck;
  });
}

}  // namespace

TEST(StarShape, AreaExamples) {
  EXPECT_DOUBLE_EQ(area(disk()), kPi);
  EXPECT_DOUBLE_EQ(area(disk(2.0)), 4.0 * kPi);
  StarShape s = disk();
  s.modes.push_back({2, 0.1, 0.0});
  EXPECT_NEAR(area(s), kPi * 1.005, 1e-15);
}

TEST(StarShape, AreaMatchesTrapezoidOfHalfRadiusSquared) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    StarShape s = random_shape(rng, 5, 0.05);
    const std::size_t n = 2048;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += std::pow(radius(s, 2.0 * kPi * j / n), 2);
    EXPECT_NEAR(area(s), 0.5 * acc * 2.0 * kPi / n, 1e-12);
  }
}

TEST(StarShape, PerimeterExamples) {
  EXPECT_DOUBLE_EQ(perimeter(disk()), 2.0 * kPi);
  EXPECT_NEAR(perimeter(disk(3.5)), 7.0 * kPi, 1e-12);
  const StarShape e = ellipse(1.5, 0.8);
  EXPECT_NEAR(perimeter(e), polyline_length(e), 1e-7);
  StarShape s = disk();
  s.modes = {{2, 0.2, 0.0}, {3, 0.0, 0.05}};
  EXPECT_NEAR(perimeter(s), polyline_length(s), 1e-7);
}

TEST(StarShape, ScaleHomogeneity) {
  std::mt19937_64 rng(11);
  const StarShape d2 = scale(disk(), 2.0);
  EXPECT_NEAR(area(d2), 4.0 * kPi, 1e-12);
  EXPECT_NEAR(perimeter(d2), 4.0 * kPi, 1e-12);
  const StarShape s = random_shape(rng, 4, 0.05);
  EXPECT_EQ(scale(s, 1.0), s);
  const StarShape s3 = scale(s, 3.0);
  EXPECT_NEAR(area(s3) / area(s), 9.0, 1e-12);
  EXPECT_NEAR(perimeter(s3) / perimeter(s), 3.0, 1e-12);
  EXPECT_THROW(scale(s, 0.0), PreconditionError);
  EXPECT_THROW(scale(s, -1.0), PreconditionError);
}

TEST(StarShape, IsoperimetricInequality) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const StarShape s = random_shape(rng, 1 + i % 6, 0.08);
    const double P = perimeter(s), A = area(s);
    EXPECT_GT(P * P - 4.0 * kPi * A, 1e-10) << i;
  }
  const double P = perimeter(disk(1.7));
  EXPECT_NEAR(P * P, 4.0 * kPi * area(disk(1.7)), 1e-10);
}

TEST(StarShape, ValidationAndJson) {
  StarShape bad = disk();
  bad.modes.push_back({2, 1.2, 0.0});
  EXPECT_THROW(validate(bad), PreconditionError);
  EXPECT_THROW(validate(StarShape{{}, -1.0, {}}), PreconditionError);
  EXPECT_THROW(validate(StarShape{{}, 1.0, {{0, 0.1, 0.0}}}), PreconditionError);

  StarShape s{{0.25, -1.0}, 1.3, {{2, 0.1, -0.05}, {5, 0.0, 0.01}}};
  const json j = to_json_value(s);
  EXPECT_EQ(star_shape_from_json(json::parse(j.dump())), s);
  json extra = j;
  extra["colour"] = "red";
  EXPECT_THROW(star_shape_from_json(extra), PreconditionError);
  json wrong = j;
  wrong["modes"] = json::array({json::array({2, 0.1})});
  EXPECT_THROW(star_shape_from_json(wrong), PreconditionError);
}

TEST(StarShape, EllipseSeries) {
  const StarShape e = ellipse(1.1, 1.0 / 1.1);
  EXPECT_NEAR(area(e), kPi, 1e-10);
  for (double t : linspace(0.0, 2.0 * kPi, 37)) {
    const double exact = 1.0 / std::hypot(std::cos(t) / 1.1, 1.1 * std::sin(t));
    EXPECT_NEAR(radius(e, t), exact, 1e-12);
  }
}

TEST(StarShape, CentroidOfShiftedShape) {
  StarShape s = disk(1.0, {0.3, -0.2});
  EXPECT_EQ(centroid(s), s.center);
  s.modes = {{1, 0.1, 0.0}};
  // oracle: centroid by dense raster
  const RasterSet r = rasterize(s, 1.0 / 512);
  double cx = 0.0, cy = 0.0;
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i)
      if (r.at(i, j)) {
        cx += r.cell_center(i, j).x;
        cy += r.cell_center(i, j).y;
      }
  const double n = static_cast<double>(r.count());
  const Vec2 c = centroid(s);
  EXPECT_NEAR(c.x, cx / n, 2e-4);
  EXPECT_NEAR(c.y, cy / n, 2e-4);
}

TEST(Raster, RasterizeDisk) {
  const double p = 1e-2;
  const RasterSet r = rasterize(disk(), p);
  EXPECT_NEAR(area(r), kPi, 3e-2);
  // misclassified cells can only be cells that the unit circle passes through
  std::size_t crossing = 0;
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) {
      const Vec2 c = r.cell_center(i, j);
      const double dmin = std::hypot(std::max(0.0, std::abs(c.x) - p / 2), std::max(0.0, std::abs(c.y) - p / 2));
      const double dmax = std::hypot(std::abs(c.x) + p / 2, std::abs(c.y) + p / 2);
      if (dmin < 1.0 && dmax > 1.0) ++crossing;
    }
  EXPECT_LE(std::abs(area(r) - kPi), static_cast<double>(crossing) * p * p);
  const double big = area(rasterize(scale(disk(), 2.0), p));
  EXPECT_NEAR(big / area(r), 4.0, 4e-3);
}

TEST(Raster, LatticeAlignment) {
  const RasterSet r = rasterize(disk(1.0, {0.123, 0.456}), 0.05);
  EXPECT_NEAR(r.origin().x / r.pitch, std::round(r.origin().x / r.pitch), 1e-12);
  EXPECT_NEAR(r.origin().y / r.pitch, std::round(r.origin().y / r.pitch), 1e-12);
  EXPECT_THROW(rasterize(disk(), 0.0), PreconditionError);
}

TEST(Raster, PerimeterOfSquare) {
  const RasterSet sq = raster_from_predicate({0, 0}, {1, 1}, 0.125, [](Vec2) { return true; });
  EXPECT_DOUBLE_EQ(area(sq), 1.0);
  EXPECT_DOUBLE_EQ(perimeter(sq), 4.0);
}

TEST(Raster, CrossSection) {
  const RasterSet r = rasterize(disk(), 1.0 / 128);
  EXPECT_NEAR(cross_section(r, 1, 0.0), 2.0, 2.0 / 128);
  EXPECT_NEAR(cross_section(r, 2, 0.0), 2.0, 2.0 / 128);
  EXPECT_EQ(cross_section(r, 1, 2.0), 0.0);
  EXPECT_EQ(cross_section(r, 2, -5.0), 0.0);
  EXPECT_THROW(cross_section(r, 3, 0.0), PreconditionError);

  const RasterSet db = dumbbell(1.0 / 80);
  EXPECT_NEAR(cross_section(db, 1, 0.0), 0.05, 1e-12);
  EXPECT_NEAR(cross_section(db, 1, -2.0), 1.0, 1e-12);
}

TEST(Raster, CombineAndPbm) {
  const RasterSet a = rasterize(disk(1.0), 1.0 / 32);
  const RasterSet b = rasterize(disk(1.0, {0.5, 0.0}), 1.0 / 32);
  const double u = area(raster_union(a, b));
  const double sd = symmetric_difference(a, b);
  EXPECT_NEAR(u, (area(a) + area(b) + sd) / 2.0, 1e-12);
  EXPECT_TRUE(subset_of(a, raster_union(a, b)));
  EXPECT_FALSE(subset_of(raster_union(a, b), a));
  EXPECT_EQ(symmetric_difference(a, a), 0.0);

  const RasterSet back = from_pbm(to_pbm(b));
  EXPECT_EQ(back.ix0, b.ix0);
  EXPECT_EQ(back.iy0, b.iy0);
  EXPECT_EQ(back.mask, b.mask);
  EXPECT_DOUBLE_EQ(back.pitch, b.pitch);
  EXPECT_THROW(from_pbm("P1\n2 2\n0 0 0 0\n"), PreconditionError);
  EXPECT_THROW(symmetric_difference(a, rasterize(disk(), 1.0 / 16)), PreconditionError);
}

TEST(SymmetricDifference, Examples) {
  EXPECT_EQ(symmetric_difference(disk(), disk()), 0.0);
  EXPECT_NEAR(symmetric_difference(disk(), disk(2.0)), 3.0 * kPi, 1e-12);
  const double d = 0.5;
  const double oracle = 2.0 * kPi - 2.0 * two_disk_lens(1.0, d);
  const StarShape b = disk(1.0, {d, 0.0});
  EXPECT_NEAR(symmetric_difference(disk(), b), oracle, 1e-10);
  EXPECT_NEAR(symmetric_difference(b, disk()), oracle, 1e-10);
  const double ras = symmetric_difference(rasterize(disk(), 1.0 / 512), rasterize(b, 1.0 / 512));
  EXPECT_NEAR(ras, oracle, 2e-2);
}

TEST(SymmetricDifference, DisjointFallsBackToRaster) {
  const double v = symmetric_difference(disk(), disk(1.0, {3.0, 0.0}), 1.0 / 256);
  EXPECT_NEAR(v, 2.0 * kPi, 2e-2);
}

TEST(SymmetricDifference, AngularMatchesRaster) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    const StarShape s = with_area_pi(random_shape(rng, 3, 0.1));
    const double ang = symmetric_difference(s, disk());
    const double ras = symmetric_difference(rasterize(s, 1.0 / 256), rasterize(disk(), 1.0 / 256));
    EXPECT_NEAR(ang, ras, 4.0 * kPi / 256) << i;
    // centred form: integral of |r^2 - 1| / 2
    double acc = 0.0;
    const std::size_t n = 1 << 16;
    for (std::size_t j = 0; j < n; ++j) acc += std::abs(std::pow(radius(s, 2.0 * kPi * j / n), 2) - 1.0);
    EXPECT_NEAR(ang, 0.5 * acc * 2.0 * kPi / n, 1e-7) << i;
  }
}

TEST(Fraenkel, DiskAndTranslates) {
  const AsymmetryReport r = fraenkel_center(disk());
  EXPECT_EQ(r.asymmetry, 0.0);
  EXPECT_NEAR(r.delta_plus, 0.0, 1e-14);
  EXPECT_NEAR(r.delta_minus, 0.0, 1e-14);
  for (Vec2 v : {Vec2{0.3, -0.7}, Vec2{5.0, 2.0}}) {
    const AsymmetryReport t = fraenkel_center(disk(1.0, v));
    EXPECT_NEAR(t.asymmetry, 0.0, 1e-12);
    EXPECT_NEAR(t.optimal_translation.x, v.x, 1e-5);
    EXPECT_NEAR(t.optimal_translation.y, v.y, 1e-5);
  }
  EXPECT_THROW(fraenkel_center(disk(1.1)), PreconditionError);
}

TEST(Fraenkel, Ellipse) {
  const AsymmetryReport r = fraenkel_center(ellipse(1.1, 1.0 / 1.1));
  EXPECT_NEAR(r.delta_plus, 0.1, 1e-9);
  EXPECT_NEAR(r.delta_minus, 1.0 - 1.0 / 1.1, 1e-9);
  EXPECT_DOUBLE_EQ(r.nu, r.asymmetry / 2.0);
  EXPECT_NEAR(norm(r.optimal_translation), 0.0, 1e-5);
}

TEST(Fraenkel, PatternSearchAgainstGridSearch) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 3; ++i) {
    StarShape s = random_shape(rng, 3, 0.08);
    s.modes.push_back({1, 0.03, -0.02});
    s = with_area_pi(s);
    const AsymmetryReport r = fraenkel_center(s);
    const Vec2 z0 = r.optimal_translation;
    double grid_best = 1e300;
    for (int a = -10; a <= 10; ++a)
      for (int b = -10; b <= 10; ++b) {
        const Vec2 z = z0 + Vec2{a * 2e-3, b * 2e-3};
        grid_best = std::min(grid_best, symmetric_difference(s, disk(1.0, z)));
      }
    EXPECT_LE(r.asymmetry, grid_best + 1e-6) << i;

    // delta bounds enclose the boundary
    for (const Vec2& p : boundary(s, 4096)) {
      const double d = norm(p - z0);
      EXPECT_LE(d, 1.0 + r.delta_plus + 1e-9);
      EXPECT_GE(d, 1.0 - r.delta_minus - 1e-9);
    }
    EXPECT_GE(r.delta_minus, 0.0);
    EXPECT_LE(r.delta_minus, 1.0);
  }
}

TEST(Fraenkel, CentredDeltasMatchRadiusExtremes) {
  // even modes only: centrally symmetric, so the optimal centre is the origin
  StarShape s = disk();
  s.modes = {{2, 0.04, 0.0}, {4, 0.02, 0.01}, {6, 0.0, 0.01}};
  s = with_area_pi(s);
  const AsymmetryReport r = fraenkel_center(s);
  EXPECT_NEAR(norm(r.optimal_translation), 0.0, 1e-5);
  double mx = 0.0, mn = 1e9;
  for (double t : linspace(0.0, 2.0 * kPi, 1 << 16)) {
    mx = std::max(mx, radius(s, t));
    mn = std::min(mn, radius(s, t));
  }
  EXPECT_NEAR(r.delta_plus, mx - 1.0, 1e-5);
  EXPECT_NEAR(r.delta_minus, 1.0 - mn, 1e-5);
}
