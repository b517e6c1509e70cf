// Strip-and-parabola region: full solver against the baseline that keeps E = I.
#include <iostream>

#include "dhpair/dhpair.hpp"

int main() {
  using namespace dhpair;
  const LmiRegion region = composite_example_region();
  const MatrixPair p = noisy_region_instance(region, 10, 1.0, 2017);
  BcdOptions opts;
  opts.max_time_s = 20.0;
  const SolveResult base = solve_frozen_E(p.E, p.A, region, opts);
  const SolveResult full = solve_general(p.E, p.A, region, opts);
  std::cout.precision(12);
  std::cout << "E fixed: relative error " << base.relative_error << "\n"
            << "E free:  relative error " << full.relative_error << "\n";
}
