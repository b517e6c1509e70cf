#pragma once

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "dhpair/dh.hpp"
#include "dhpair/linalg.hpp"
#include "dhpair/pencil.hpp"

namespace dhpair {

// sqrt((||A - At||^2 + ||E - Et||^2) / (||A||^2 + ||E||^2)).
inline double relative_error(const Mat& E, const Mat& A, const Mat& Et, const Mat& At) {
  const double den = frob2(A) + frob2(E);
  if (den == 0.0) throw Error("relative error undefined for E = A = 0");
  return std::sqrt((frob2(A - At) + frob2(E - Et)) / den);
}

struct TracePoint {
  double time_s;
  double objective;  // best so far
  double relative_error;
};

struct SolveResult {
  std::string algorithm;
  DhParam param;
  MatrixPair realized;
  double objective = 0.0;
  double relative_error = 0.0;
  std::vector<TracePoint> trace;
  int iterations = 0;
  double elapsed_s = 0.0;
  double delta_shift = 0.0;  // added to R before the final check, 0 if none
  AdmissibilityVerdict verdict;
  bool admissible = false;
  std::vector<std::string> diagnostics;
};

inline void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "time_s,objective,relative_error\n";
  os.precision(12);
  for (const auto& p : trace) os << p.time_s << ',' << p.objective << ',' << p.relative_error << '\n';
}

inline bool trace_non_increasing(const std::vector<TracePoint>& trace, double rel_tol = 1e-12) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i].objective > trace[i - 1].objective * (1.0 + rel_tol) + 1e-300) return false;
  return true;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

namespace detail {

// T with eigenvalues below tol * ||T|| set to zero (lift = false) or raised to
// tol * ||T|| (lift = true).
inline Mat clean_small_eigenvalues(const Mat& T, double tol, bool lift) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(T));
  const double cut = tol * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  Vec d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d(i) < cut) d(i) = lift ? cut : 0.0;
  return sym(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

// Checks the realized pair. If the check fails, tries an escalating shift of R
// by delta I (1e-10 up to 1e-6 times ||J|| + ||R||), first with T as is, then
// with its numerically negligible eigenvalues zeroed or lifted. The first
// candidate that passes is kept; otherwise the unmodified iterate is returned
// flagged.
inline void finalize_result(SolveResult& res, const MatrixPair& data, const LmiRegion& region,
                            double mu) {
  const DhParam base = res.param;
  const double scale = std::max(spectral_norm(base.J()) + spectral_norm(base.R()), 1e-12);
  res.delta_shift = 0.0;
  bool found = false;
  AdmissibilityVerdict first_verdict;
  MatrixPair first_pair;
  bool have_first = false;
  for (int tmode = 0; tmode < 3 && !found; ++tmode) {
    DhParam tb = base;
    if (tmode > 0) tb.set_T(clean_small_eigenvalues(base.T(), 1e-7, tmode == 2));
    for (double rel = 0.0; rel <= 1e-6 * 1.0000001; rel = rel == 0.0 ? 1e-10 : rel * 10.0) {
      const DhParam cand = rel == 0.0 ? tb : shift_dissipation(tb, rel * scale);
      MatrixPair pair;
      try {
        pair = realize(cand);
      } catch (const SingularMatrixError&) {
        break;
      }
      AdmissibilityVerdict v = admissibility_check(pair, region);
      if (!have_first) {
        first_verdict = v;
        first_pair = pair;
        have_first = true;
      }
      if (v.admissible) {
        res.param = cand;
        res.realized = pair;
        res.verdict = std::move(v);
        res.delta_shift = rel * scale;
        if (tmode > 0) res.diagnostics.push_back("negligible eigenvalues of T cleaned");
        found = true;
        break;
      }
    }
  }
  if (!found) {
    res.param = base;
    if (have_first) {
      res.realized = first_pair;
      res.verdict = first_verdict;
    } else {
      res.diagnostics.push_back("Q numerically singular at return");
      res.realized = MatrixPair(base.T() * base.Q(), (base.J() - base.R()) * base.Q());
      res.verdict = AdmissibilityVerdict{};
      res.verdict.reasons.push_back("Q numerically singular");
    }
  }
  res.admissible = found;
  if (!res.admissible)
    for (const auto& r : res.verdict.reasons) res.diagnostics.push_back("not admissible: " + r);
  res.relative_error = relative_error(data.E, data.A, res.realized.E, res.realized.A);
  res.objective = frob2(data.A - res.realized.A) + mu * frob2(data.E - res.realized.E);
}

}  // namespace detail

}  // namespace dhpair
