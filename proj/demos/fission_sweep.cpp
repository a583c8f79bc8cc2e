// Best single-component and best split energies across eps, with fission.svg.
// Usage: fission_sweep [eps_max] [points] [out.svg]

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "gamow/minimize.hpp"

int main(int argc, char** argv) {
  using namespace gamow;
  const double eps_max = argc > 1 ? std::atof(argv[1]) : 1.0;
  const int points = argc > 2 ? std::atoi(argv[2]) : 11;
  const std::string svg = argc > 3 ? argv[3] : "fission.svg";
  std::vector<double> eps;
  for (int i = 0; i < points; ++i) eps.push_back(eps_max * i / std::max(points - 1, 1));
  OptimizerConfig cfg;
  cfg.n_modes = 6;
  const SweepResult r = epsilon_sweep(power(-0.5), eps, cfg, 2, {}, [](const SweepRow& row) {
    std::printf("eps=%.3f single=%.6f split=%.6f components=%d\n", row.eps, row.best_single_energy,
                row.best_split_energy, row.n_components);
    std::fflush(stdout);
  });
  if (r.threshold) std::printf("first split on grid: %.4f\n", *r.threshold);
  if (r.threshold_interpolated) std::printf("interpolated crossing: %.6f\n", *r.threshold_interpolated);
  std::ofstream(svg) << fission_svg(r);
  std::printf("wrote %s\n", svg.c_str());
}
