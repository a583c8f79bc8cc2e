// Energy of one unit-area ball against two far-apart half balls as eps grows.
// Usage: ball_vs_split [alpha]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gamow/energy.hpp"

int main(int argc, char** argv) {
  using namespace gamow;
  const double alpha = argc > 1 ? std::atof(argv[1]) : -0.5;
  const KernelSpec k = power(alpha);
  const StarShape ball = disk(), half = disk(std::sqrt(0.5));
  const double P1 = perimeter(ball), R1 = riesz_self(k, ball);
  const double P2 = 2 * perimeter(half), R2 = 2 * riesz_self(k, half);
  const double crossing = (P2 - P1) / (R1 - R2);
  std::printf("%s  crossing eps* = %.6f\n", to_string(k).c_str(), crossing);
  std::printf("%8s %14s %14s  %s\n", "eps", "one ball", "two halves", "lower");
  for (double eps = 0.0; eps <= 1.2 + 1e-12; eps += 0.1) {
    const double one = P1 + eps * R1, two = P2 + eps * R2;
    std::printf("%8.2f %14.6f %14.6f  %s\n", eps, one, two, one <= two ? "one" : "two");
  }
}
