#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <ostream>

#include "dhpair/dh.hpp"
#include "dhpair/fgm.hpp"
#include "dhpair/region.hpp"
#include "dhpair/result.hpp"
#include "dhpair/sdp.hpp"

namespace dhpair {

struct QUpdate {
  Mat Q;
  bool regularized = false;
};

// argmin_Q ||A - (J - R)Q||_F^2 + mu ||E - TQ||_F^2, i.e. least squares on the
// stacked system [J - R; sqrt(mu) T] Q = [A; sqrt(mu) E].
inline QUpdate update_Q(const Mat& E, const Mat& A, const Mat& T, const Mat& J, const Mat& R,
                        double mu) {
  const Eigen::Index n = A.rows();
  require_square(E, n, "E");
  require_square(T, n, "T");
  require_square(J, n, "J");
  require_square(R, n, "R");
  const double smu = std::sqrt(mu);
  Mat M(2 * n, n), rhs(2 * n, n);
  M << J - R, smu * T;
  rhs << A, smu * E;
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  const double mscale = M.norm();
  qr.setThreshold(1e-12);
  if (mscale > 0.0 && qr.rank() == n) return {qr.solve(rhs), false};
  const double tau = 1e-12 * std::max(mscale * mscale, 1.0);
  const Mat normal = M.transpose() * M + tau * Mat::Identity(n, n);
  return {normal.ldlt().solve(M.transpose() * rhs), true};
}

struct BcdOptions {
  double mu = 1.0;
  double max_time_s = 100.0;
  int max_outer = 10'000;
  bool extrapolate = true;
  double stall_tol = 1e-10;  // relative change of the best objective ...
  int stall_window = 5;      // ... over this many outer iterations
  double accuracy_floor = 1e-8;
  double accuracy_start = 1e-2;
  // Unset: R >= 0 is required exactly when the region lies in the closed left half-plane.
  std::optional<bool> require_R_psd;
  // Baseline: T = I and Q = I held fixed, only (J, R) optimized once.
  bool freeze_E = false;
  std::ostream* trace = nullptr;
};

// Block coordinate descent alternating a least-squares Q update with the
// convex (T, J, R) subproblem; extrapolation on Q with restart.
inline SolveResult solve_general(const Mat& E, const Mat& A, const LmiRegion& region,
                                 const BcdOptions& opts = {}) {
  const Eigen::Index n = A.rows();
  require_square(E, n, "E");
  if (!(opts.mu > 0.0)) throw Error("mu must be positive");
  Stopwatch clock;
  const double mu = opts.mu;
  const double scale = 1.0 + frob2(A) + mu * frob2(E);
  auto eps_at = [&](int k) {
    return std::max(opts.accuracy_floor, opts.accuracy_start * std::pow(4.0, -k)) * scale;
  };

  ConvexSubproblem sp;
  sp.E = E;
  sp.A = A;
  sp.Q = Mat::Identity(n, n);
  sp.mu = mu;
  sp.region = region;
  sp.require_R_psd = opts.require_R_psd.value_or(region.in_closed_left_half_plane());
  if (opts.freeze_E) sp.fixed_T = Mat::Identity(n, n);

  SolveResult res;
  res.algorithm = opts.freeze_E ? "bcd-frozen-E" : "bcd";
  auto record = [&](double f, const DhParam& d) {
    const double re = relative_error(E, A, d.T() * d.Q(), (d.J() - d.R()) * d.Q());
    res.trace.push_back({clock.seconds(), f, re});
    if (opts.trace) *opts.trace << res.trace.back().time_s << ',' << f << ',' << re << '\n';
  };
  if (opts.trace) *opts.trace << "time_s,objective,relative_error\n";

  auto subsolve = [&](const Mat& Q, const std::optional<TJR>& warm, int k) {
    sp.Q = Q;
    SubproblemOptions so;
    so.accuracy = opts.freeze_E ? opts.accuracy_floor * scale : eps_at(k);
    try {
      return solve_subproblem(sp, warm, so);
    } catch (const InfeasibleRegionError&) {
      throw;
    } catch (const Error& e) {
      throw Error(std::string("subproblem failed at outer iteration ") + std::to_string(k) + ": " +
                  e.what());
    }
  };

  SubproblemSolution sol = subsolve(sp.Q, std::nullopt, 0);
  TJR cur{sol.T, sol.J, sol.R};
  Mat Qcur = sp.Q;
  double f = sol.objective;
  DhParam best(cur.T, cur.J, cur.R, Qcur);
  double fbest = f;
  record(fbest, best);

  int k = 1, momentum_k = 1;
  std::deque<double> window{fbest};
  bool regularized_seen = false;
  const double deadline = opts.max_time_s - std::min(0.25, 0.01 * opts.max_time_s);
  double last_outer_s = 0.0;
  if (!opts.freeze_E) {
    for (; k <= opts.max_outer; ++k) {
      // skip an iteration that would overrun the budget
      const double started = clock.seconds();
      if (started + last_outer_s > deadline) break;
      const QUpdate qu = update_Q(E, A, cur.T, cur.J, cur.R, mu);
      regularized_seen = regularized_seen || qu.regularized;
      const double f_ls = objective(E, A, DhParam(cur.T, cur.J, cur.R, qu.Q), mu);
      const double beta = opts.extrapolate ? (momentum_k - 1.0) / (momentum_k + 2.0) : 0.0;
      Mat Qnew = qu.Q + beta * (qu.Q - Qcur);
      sol = subsolve(Qnew, cur, k);
      if (beta > 0.0 && sol.objective > f_ls) {
        momentum_k = 1;
        Qnew = qu.Q;
        sol = subsolve(Qnew, cur, k);
      } else {
        ++momentum_k;
      }
      cur = {sol.T, sol.J, sol.R};
      Qcur = Qnew;
      f = sol.objective;
      if (f < fbest) {
        fbest = f;
        best = DhParam(cur.T, cur.J, cur.R, Qcur);
      }
      record(fbest, best);
      last_outer_s = clock.seconds() - started;
      window.push_back(fbest);
      if (static_cast<int>(window.size()) > opts.stall_window) {
        const double old = window.front();
        window.pop_front();
        if (old - fbest <= opts.stall_tol * std::max(old, 1e-300)) break;
      }
    }
  }
  if (regularized_seen) res.diagnostics.push_back("Q update used the regularized fallback");
  res.iterations = k - 1;
  res.param = best;
  detail::finalize_result(res, MatrixPair(E, A), region, mu);
  res.elapsed_s = clock.seconds();
  return res;
}

// Baseline that keeps E fixed: T = I, Q = I, one subproblem over (J, R).
inline SolveResult solve_frozen_E(const Mat& E, const Mat& A, const LmiRegion& region,
                                  BcdOptions opts = {}) {
  opts.freeze_E = true;
  return solve_general(E, A, region, opts);
}

}  // namespace dhpair
