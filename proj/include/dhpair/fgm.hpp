#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "dhpair/dh.hpp"
#include "dhpair/pencil.hpp"
#include "dhpair/region.hpp"
#include "dhpair/result.hpp"

namespace dhpair {

struct FgmOptions {
  double mu = 1.0;
  double max_time_s = 30.0;
  long max_iters = 5'000'000;
  double initial_step = -1.0;  // negative: 1 / L estimated at the start
  double backtrack = 0.5;
  double growth = 1.1;
  int max_backtracks = 60;
  double alpha0 = 0.1;  // extrapolation parameter after a restart
  double stall_tol = 1e-13;  // relative best-objective gain over stall_window iterations
  long stall_window = 2000;
  double grad_tol = 1e-13;
  bool balance = true;  // keep ||[J - R; sqrt(mu) T]|| and ||Q|| equal
  std::ostream* trace = nullptr;
};

struct DhGradient {
  Mat T, J, R, Q;
};

// ||A - (J - R)Q||_F^2 + mu ||E - TQ||_F^2.
inline double objective(const Mat& E, const Mat& A, const DhParam& d, double mu) {
  return frob2(A - (d.J() - d.R()) * d.Q()) + mu * frob2(E - d.T() * d.Q());
}

// Euclidean gradient with the J block restricted to skew and T, R blocks to
// symmetric matrices.
inline DhGradient gradient(const Mat& E, const Mat& A, const DhParam& d, double mu) {
  const Mat ra = A - (d.J() - d.R()) * d.Q();
  const Mat re = E - d.T() * d.Q();
  const Mat raq = ra * d.Q().transpose();
  DhGradient g;
  g.J = skew(-2.0 * raq);
  g.R = sym(2.0 * raq);
  g.T = sym(-2.0 * mu * re * d.Q().transpose());
  g.Q = -2.0 * (d.J() - d.R()).transpose() * ra - 2.0 * mu * d.T().transpose() * re;
  return g;
}

// PSD clip of T and R, skew part of J; Q unchanged.
inline DhParam project(const Mat& T, const Mat& J, const Mat& R, const Mat& Q) {
  return {project_psd(T), skew(J), project_psd(R), Q};
}

inline DhParam fgm_initial_point(const Mat& E, const Mat& A) {
  const Eigen::Index n = A.rows();
  return {project_psd(E), skew(A), project_psd(-sym(A)), Mat::Identity(n, n)};
}

namespace detail {

inline double fgm_lipschitz(const DhParam& d, double mu) {
  const double q2 = std::pow(spectral_norm(d.Q()), 2);
  const double jr = std::pow(spectral_norm(d.J() - d.R()), 2);
  const double t2 = std::pow(spectral_norm(d.T()), 2);
  return 2.0 * std::max({q2, mu * q2, jr + mu * t2, 1e-12});
}

inline DhParam fgm_step(const DhParam& y, const DhGradient& g, double step) {
  return project(y.T() - step * g.T, y.J() - step * g.J, y.R() - step * g.R, y.Q() - step * g.Q);
}

inline DhParam fgm_extrapolate(const DhParam& x, const DhParam& xprev, double beta) {
  return {x.T() + beta * (x.T() - xprev.T()), x.J() + beta * (x.J() - xprev.J()),
          x.R() + beta * (x.R() - xprev.R()), x.Q() + beta * (x.Q() - xprev.Q())};
}

// (T, J, R, Q) -> (T/c, J/c, R/c, cQ) leaves the realized pair unchanged; c
// equalizes the norms of the two factors.
inline double balance_factor(const DhParam& d, double mu) {
  const double left = std::sqrt(frob2(d.J() - d.R()) + mu * frob2(d.T()));
  const double right = std::sqrt(frob2(d.Q()));
  if (!(left > 0.0) || !(right > 0.0)) return 1.0;
  return std::sqrt(left / right);
}

inline DhParam rescale(const DhParam& d, double c) {
  return {d.T() / c, d.J() / c, d.R() / c, c * d.Q()};
}

}  // namespace detail

// Projected fast gradient method for the nearest Hurwitz-admissible pair.
inline SolveResult solve_hurwitz(const Mat& E, const Mat& A, const FgmOptions& opts = {}) {
  const Eigen::Index n = A.rows();
  require_square(E, n, "E");
  if (!(opts.mu > 0.0)) throw Error("mu must be positive");
  Stopwatch clock;
  const double mu = opts.mu;
  const double den = frob2(A) + frob2(E);
  auto rel_of = [&](double f) {
    // exact when mu = 1; otherwise recomputed from the iterate on record
    return den > 0.0 ? std::sqrt(f / den) : 0.0;
  };

  DhParam x = fgm_initial_point(E, A);
  DhParam xprev = x, y = x;
  double fx = objective(E, A, x, mu);
  DhParam best = x;
  double fbest = fx;
  double step = opts.initial_step > 0.0 ? opts.initial_step : 1.0 / detail::fgm_lipschitz(x, mu);
  double alpha = opts.alpha0;

  SolveResult res;
  res.algorithm = "fgm";
  auto record = [&](const DhParam& d, double f) {
    const double re = mu == 1.0 ? rel_of(f)
                                : relative_error(E, A, d.T() * d.Q(), (d.J() - d.R()) * d.Q());
    res.trace.push_back({clock.seconds(), f, re});
    if (opts.trace) *opts.trace << res.trace.back().time_s << ',' << f << ',' << re << '\n';
  };
  if (opts.trace) *opts.trace << "time_s,objective,relative_error\n";
  record(best, fbest);

  // leave room for the final admissibility repair inside the budget
  const double deadline = opts.max_time_s - std::min(0.25, 0.01 * opts.max_time_s);
  double window_start = fbest;
  bool restarted = true;
  long k = 0;
  for (; k < opts.max_iters; ++k) {
    if ((k & 63) == 0 && clock.seconds() > deadline) break;
    const DhGradient g = gradient(E, A, y, mu);
    const double gn = std::sqrt(frob2(g.T) + frob2(g.J) + frob2(g.R) + frob2(g.Q));
    if (!std::isfinite(gn)) throw Error("non-finite gradient in fast gradient iteration");
    if (gn <= opts.grad_tol * (1.0 + fx)) break;

    bool accepted = false;
    DhParam xn;
    double fn = fx;
    for (int ls = 0; ls < opts.max_backtracks; ++ls) {
      xn = detail::fgm_step(y, g, step);
      fn = objective(E, A, xn, mu);
      if (std::isfinite(fn) && fn <= fx) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      // drop momentum and retry from x; give up if that already failed
      if (restarted) break;
      y = x;
      alpha = opts.alpha0;
      step = 1.0 / detail::fgm_lipschitz(x, mu);
      restarted = true;
      continue;
    }
    restarted = false;
    const double a2 = alpha * alpha;
    const double alpha_next = 0.5 * (std::sqrt(a2 * a2 + 4.0 * a2) - a2);
    const double beta = alpha * (1.0 - alpha) / (a2 + alpha_next);
    alpha = alpha_next;
    xprev = x;
    x = xn;
    fx = fn;
    if (opts.balance) {
      const double c = detail::balance_factor(x, mu);
      if (std::abs(c - 1.0) > 1e-3) {
        x = detail::rescale(x, c);
        xprev = detail::rescale(xprev, c);
      }
    }
    y = detail::fgm_extrapolate(x, xprev, beta);
    step *= opts.growth;

    if (fx < fbest) {
      fbest = fx;
      best = x;
    }
    if (k < 200 || k % 200 == 0) record(best, fbest);
    if ((k + 1) % opts.stall_window == 0) {
      if (window_start - fbest <= opts.stall_tol * (1.0 + fbest)) break;
      window_start = fbest;
    }
  }
  record(best, fbest);
  res.iterations = static_cast<int>(k);
  res.param = best;
  detail::finalize_result(res, MatrixPair(E, A), hurwitz_region(), mu);
  res.elapsed_s = clock.seconds();
  return res;
}

}  // namespace dhpair
