// Writes lens and minimal-curve figures for a few parameter choices.
// Usage: lens_gallery [out_dir]

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gamow/lens.hpp"

int main(int argc, char** argv) {
  using namespace gamow;
  const std::filesystem::path dir = argc > 1 ? argv[1] : ".";
  std::filesystem::create_directories(dir);
  int i = 0;
  for (double tb : {kPi / 6, kPi / 4, kPi / 3})
    for (double frac : {-0.9, 0.0, 0.9}) {
      const double delta = frac * std::cos(tb) / 8.0;
      const LensState s = lens_state(tb, delta);
      const auto name = dir / ("lens_" + std::to_string(i++) + ".svg");
      std::ofstream(name) << lens_svg(tb, delta);
      std::printf("theta_bar=%.4f delta=%+.4f tau=%.6f mu=%+.6f slack=%.3e  %s\n", tb, delta, s.tau, s.mu,
                  lens_inequality_check(tb, delta), name.c_str());
    }
  i = 0;
  for (double t : {0.05, 0.2, 0.5})
    for (double beta : {0.01, 0.1}) {
      const MinCurveResult o = min_curve_outer(t, beta), in = min_curve_inner(t, beta);
      std::ofstream(dir / ("outer_" + std::to_string(i) + ".svg")) << min_curve_svg(o);
      std::ofstream(dir / ("inner_" + std::to_string(i++) + ".svg")) << min_curve_svg(in);
      std::printf("t=%.2f beta=%.2f outer %s length %.6f, inner %s length %.6f\n", t, beta, case_name(o.case_tag),
                  o.length, case_name(in.case_tag), in.length);
    }
}
