// Nearest Hurwitz-admissible pair to (I, Grcar(10, 2)) with the fast gradient method.
#include <iostream>

#include "dhpair/dhpair.hpp"

int main() {
  using namespace dhpair;
  const MatrixPair p = grcar(10, 2);
  FgmOptions opts;
  opts.max_time_s = 10.0;
  const SolveResult r = solve_hurwitz(p.E, p.A, opts);
  std::cout.precision(12);
  std::cout << "relative error " << r.relative_error << " after " << r.iterations
            << " iterations, admissible: " << (r.admissible ? "yes" : "no") << "\n";
  for (const auto& fe : r.verdict.report.finite_eigenvalues) std::cout << "  " << fe.lambda << "\n";
}
