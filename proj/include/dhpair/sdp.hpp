#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dhpair/linalg.hpp"
#include "dhpair/region.hpp"

namespace dhpair {

class InfeasibleRegionError : public Error {
 public:
  using Error::Error;
};

// min ||A - (J - R)Q||_F^2 + mu ||E - TQ||_F^2 over T >= 0, J skew, R symmetric
// (R >= 0 when require_R_psd) and Mhat(T, J, R) <= -delta_lmi I, with Q fixed.
struct ConvexSubproblem {
  Mat E;
  Mat A;
  Mat Q;
  double mu = 1.0;
  std::optional<LmiRegion> region;
  bool require_R_psd = false;
  // Negative selects 1e-6 * (1 + ||A||_F).
  double delta_lmi = -1.0;
  // When set, T is held at this value and only (J, R) are optimized.
  std::optional<Mat> fixed_T;

  Eigen::Index n() const { return A.rows(); }
  double effective_delta() const { return delta_lmi >= 0.0 ? delta_lmi : 1e-6 * (1.0 + A.norm()); }
};

struct SubproblemOptions {
  // Target duality gap; negative selects 1e-8 * (1 + objective at the start).
  double accuracy = -1.0;
  double barrier_growth = 10.0;
  int max_outer = 40;
  int max_newton_per_center = 60;
  double newton_tol = 1e-10;
  std::ostream* trace = nullptr;  // CSV: iteration,objective,gap,min_margin
};

struct TJR {
  Mat T;
  Mat J;
  Mat R;
};

struct SubproblemSolution {
  Mat T, J, R;
  double objective = 0.0;
  int barrier_iterations = 0;
  int newton_iterations = 0;
  double gap = 0.0;           // nu / t at return
  double kkt_residual = 0.0;  // Newton decrement squared / t at the last centering
  std::vector<double> outer_objectives;
  std::vector<double> margins;  // lambda_min of each constraint block (T, [R], region)
  bool converged = false;
};

inline double subproblem_objective(const ConvexSubproblem& sp, const Mat& T, const Mat& J,
                                   const Mat& R) {
  return frob2(sp.A - (J - R) * sp.Q) + sp.mu * frob2(sp.E - T * sp.Q);
}

namespace detail {

struct Triplet {
  int row;
  int col;
  double val;
};

// Affine symmetric matrix function G(x) = G0 + sum_i x_i G_i, with each G_i
// stored as a sparse list of entries (both triangles).
struct LmiBlock {
  std::string name;
  int dim = 0;
  Mat G0;
  std::vector<std::vector<Triplet>> coeff;  // per variable
  std::vector<int> active;                  // variables with nonzero coefficients
};

class BarrierProblem {
 public:
  explicit BarrierProblem(const ConvexSubproblem& sp) : sp_(sp), n_(static_cast<int>(sp.n())) {
    require_square(sp.E, n_, "E");
    require_square(sp.Q, n_, "Q");
    if (sp.fixed_T) require_square(*sp.fixed_T, n_, "fixed T");
    const int nsym = n_ * (n_ + 1) / 2, nskew = n_ * (n_ - 1) / 2;
    off_T_ = 0;
    off_J_ = sp.fixed_T ? 0 : nsym;
    off_R_ = off_J_ + nskew;
    m_ = off_R_ + nsym;
    for (int k = 0; k < n_; ++k)
      for (int l = k; l < n_; ++l) sym_idx_.push_back({k, l});
    for (int k = 0; k < n_; ++k)
      for (int l = k + 1; l < n_; ++l) skew_idx_.push_back({k, l});
    build_objective();
    build_constraints();
  }

  int dim() const { return m_; }
  double nu() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b.dim;
    return s;
  }
  const std::vector<LmiBlock>& blocks() const { return blocks_; }

  Vec pack(const Mat& T, const Mat& J, const Mat& R) const {
    Vec x(m_);
    if (!sp_.fixed_T)
      for (std::size_t i = 0; i < sym_idx_.size(); ++i)
        x(off_T_ + i) = T(sym_idx_[i].first, sym_idx_[i].second);
    for (std::size_t i = 0; i < skew_idx_.size(); ++i)
      x(off_J_ + i) = J(skew_idx_[i].first, skew_idx_[i].second);
    for (std::size_t i = 0; i < sym_idx_.size(); ++i)
      x(off_R_ + i) = R(sym_idx_[i].first, sym_idx_[i].second);
    return x;
  }

  TJR unpack(const Vec& x) const {
    TJR out{Mat::Zero(n_, n_), Mat::Zero(n_, n_), Mat::Zero(n_, n_)};
    if (sp_.fixed_T) {
      out.T = *sp_.fixed_T;
    } else {
      for (std::size_t i = 0; i < sym_idx_.size(); ++i) {
        auto [k, l] = sym_idx_[i];
        out.T(k, l) = out.T(l, k) = x(off_T_ + i);
      }
    }
    for (std::size_t i = 0; i < skew_idx_.size(); ++i) {
      auto [k, l] = skew_idx_[i];
      out.J(k, l) = x(off_J_ + i);
      out.J(l, k) = -x(off_J_ + i);
    }
    for (std::size_t i = 0; i < sym_idx_.size(); ++i) {
      auto [k, l] = sym_idx_[i];
      out.R(k, l) = out.R(l, k) = x(off_R_ + i);
    }
    return out;
  }

  double objective(const Vec& x) const { return (L_ * x - b_).squaredNorm(); }
  Vec objective_gradient(const Vec& x) const { return 2.0 * L_.transpose() * (L_ * x - b_); }
  const Mat& objective_hessian() const { return H_; }

  Mat evaluate(const LmiBlock& blk, const Vec& x) const {
    Mat g = blk.G0;
    for (int i : blk.active) {
      const double xi = x(i);
      if (xi == 0.0) continue;
      for (const Triplet& t : blk.coeff[i]) g(t.row, t.col) += xi * t.val;
    }
    return g;
  }

 private:
  void build_objective() {
    const int nn = n_ * n_;
    L_ = Mat::Zero(2 * nn, m_);
    b_ = Vec::Zero(2 * nn);
    const double smu = std::sqrt(sp_.mu);
    const Mat& Q = sp_.Q;
    auto put = [&](int col, int row_off, int k, int l, double sign_kl, double sign_lk, double scale) {
      // column of vec(Basis * Q) where Basis = sign_kl e_k e_l^T + sign_lk e_l e_k^T
      Eigen::Map<Mat> colm(L_.col(col).data() + row_off, n_, n_);
      colm.row(k) += scale * sign_kl * Q.row(l);
      if (k != l || sign_lk != 0.0) colm.row(l) += scale * sign_lk * Q.row(k);
    };
    if (!sp_.fixed_T)
      for (std::size_t i = 0; i < sym_idx_.size(); ++i) {
        auto [k, l] = sym_idx_[i];
        put(off_T_ + static_cast<int>(i), nn, k, l, 1.0, k == l ? 0.0 : 1.0, smu);
      }
    for (std::size_t i = 0; i < skew_idx_.size(); ++i) {
      auto [k, l] = skew_idx_[i];
      put(off_J_ + static_cast<int>(i), 0, k, l, 1.0, -1.0, 1.0);
    }
    for (std::size_t i = 0; i < sym_idx_.size(); ++i) {
      auto [k, l] = sym_idx_[i];
      put(off_R_ + static_cast<int>(i), 0, k, l, 1.0, k == l ? 0.0 : 1.0, -1.0);
    }
    Eigen::Map<Mat>(b_.data(), n_, n_) = sp_.A;
    Mat eb = smu * sp_.E;
    if (sp_.fixed_T) eb -= smu * (*sp_.fixed_T) * Q;
    Eigen::Map<Mat>(b_.data() + nn, n_, n_) = eb;
    H_ = 2.0 * L_.transpose() * L_;
  }

  // Adds coefficient entries of (coef (x) Basis) for one variable, where Basis
  // is the symmetric (skew_sign = +1) or skew (skew_sign = -1) unit matrix at (k, l).
  void add_kron_entries(LmiBlock& blk, int var, const Mat& coef, int k, int l, double skew_sign,
                        double scale) {
    for (int a = 0; a < coef.rows(); ++a)
      for (int b = 0; b < coef.cols(); ++b) {
        const double c = scale * coef(a, b);
        if (c == 0.0) continue;
        blk.coeff[var].push_back({a * n_ + k, b * n_ + l, c});
        if (k != l || skew_sign < 0.0) blk.coeff[var].push_back({a * n_ + l, b * n_ + k, skew_sign * c});
      }
  }

  void finalize(LmiBlock& blk) {
    for (int i = 0; i < m_; ++i)
      if (!blk.coeff[i].empty()) blk.active.push_back(i);
    blocks_.push_back(std::move(blk));
  }

  void build_constraints() {
    const Mat one = Mat::Ones(1, 1);
    if (!sp_.fixed_T) {
      LmiBlock t{"T >= 0", n_, Mat::Zero(n_, n_), std::vector<std::vector<Triplet>>(m_), {}};
      for (std::size_t i = 0; i < sym_idx_.size(); ++i) {
        auto [k, l] = sym_idx_[i];
        add_kron_entries(t, off_T_ + static_cast<int>(i), one, k, l, 1.0, 1.0);
      }
      finalize(t);
    }
    if (sp_.require_R_psd) {
      LmiBlock r{"R >= 0", n_, Mat::Zero(n_, n_), std::vector<std::vector<Triplet>>(m_), {}};
      for (std::size_t i = 0; i < sym_idx_.size(); ++i) {
        auto [k, l] = sym_idx_[i];
        add_kron_entries(r, off_R_ + static_cast<int>(i), one, k, l, 1.0, 1.0);
      }
      finalize(r);
    }
    if (sp_.region) {
      const Mat& B = sp_.region->B();
      const Mat& C = sp_.region->C();
      const Mat skewC = C - C.transpose();
      const Mat symC = C + C.transpose();
      const int s = static_cast<int>(B.rows());
      const int d = s * n_;
      // G(x) = -Mhat(T, J, R) - delta I
      LmiBlock g{"region LMI", d, -sp_.effective_delta() * Mat::Identity(d, d),
                 std::vector<std::vector<Triplet>>(m_), {}};
      if (sp_.fixed_T) g.G0 -= kron(B, *sp_.fixed_T);
      if (!sp_.fixed_T)
        for (std::size_t i = 0; i < sym_idx_.size(); ++i) {
          auto [k, l] = sym_idx_[i];
          add_kron_entries(g, off_T_ + static_cast<int>(i), B, k, l, 1.0, -1.0);
        }
      for (std::size_t i = 0; i < skew_idx_.size(); ++i) {
        auto [k, l] = skew_idx_[i];
        add_kron_entries(g, off_J_ + static_cast<int>(i), skewC, k, l, -1.0, -1.0);
      }
      for (std::size_t i = 0; i < sym_idx_.size(); ++i) {
        auto [k, l] = sym_idx_[i];
        add_kron_entries(g, off_R_ + static_cast<int>(i), symC, k, l, 1.0, 1.0);
      }
      finalize(g);
    }
  }

  const ConvexSubproblem& sp_;
  int n_;
  int off_T_ = 0, off_J_ = 0, off_R_ = 0, m_ = 0;
  std::vector<std::pair<int, int>> sym_idx_, skew_idx_;
  Mat L_, H_;
  Vec b_;
  std::vector<LmiBlock> blocks_;
};

struct BarrierEval {
  bool feasible = false;
  double logdet = 0.0;  // sum of log det G_c
  std::vector<Mat> W;   // G_c^{-1}
};

inline BarrierEval barrier_eval(const BarrierProblem& bp, const Vec& x, bool want_inverse) {
  BarrierEval ev;
  for (const auto& blk : bp.blocks()) {
    const Mat g = bp.evaluate(blk, x);
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) return ev;
    const Vec diag = Mat(llt.matrixL()).diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) return ev;
    ev.logdet += 2.0 * diag.array().log().sum();
    if (want_inverse) ev.W.push_back(llt.solve(Mat::Identity(g.rows(), g.cols())));
  }
  ev.feasible = true;
  return ev;
}

inline std::vector<double> block_margins(const BarrierProblem& bp, const Vec& x) {
  std::vector<double> out;
  for (const auto& blk : bp.blocks()) out.push_back(lambda_min(bp.evaluate(blk, x)));
  return out;
}

}  // namespace detail

// Strictly feasible start: T = I (or the frozen T), J = 0, R = rho I where
// -rho is a real point of the region with comfortable margin.
inline TJR initial_point(const ConvexSubproblem& sp) {
  const Eigen::Index n = sp.n();
  const Mat I = Mat::Identity(n, n);
  TJR out{sp.fixed_T ? *sp.fixed_T : I, Mat::Zero(n, n), Mat::Zero(n, n)};
  double rho = sp.require_R_psd ? 1.0 : 0.0;
  if (sp.region) {
    const RealSlice slice = sp.region->real_slice();
    if (slice.empty) throw InfeasibleRegionError("infeasible region: the LMI region is empty");
    double x = 0.0;
    const bool lo_fin = std::isfinite(slice.lo), hi_fin = std::isfinite(slice.hi);
    if (lo_fin && hi_fin)
      x = std::clamp(slice.deepest_x, slice.lo, slice.hi);
    else if (hi_fin)
      x = slice.hi - 1.0;
    else if (lo_fin)
      x = slice.lo + 1.0;
    if (sp.require_R_psd && x >= 0.0)
      throw InfeasibleRegionError(
          "infeasible region: R >= 0 requested but the region has no point with Re z < 0");
    rho = -x;
  }
  out.R = rho * I;
  detail::BarrierProblem bp(sp);
  const Vec x0 = bp.pack(out.T, out.J, out.R);
  const auto margins = detail::block_margins(bp, x0);
  for (std::size_t c = 0; c < margins.size(); ++c)
    if (!(margins[c] > 0.0))
      throw InfeasibleRegionError("infeasible region: no strictly feasible start for " +
                                  bp.blocks()[c].name + " (margin " + std::to_string(margins[c]) +
                                  "); review the region parameters");
  return out;
}

// Path-following log-det barrier method with Newton steps on the packed
// (T, J, R) coordinates.
inline SubproblemSolution solve_subproblem(const ConvexSubproblem& sp,
                                           const std::optional<TJR>& init = std::nullopt,
                                           const SubproblemOptions& opts = {}) {
  require_square(sp.A, sp.n(), "A");
  detail::BarrierProblem bp(sp);
  Vec x;
  bool have_start = false;
  if (init) {
    x = bp.pack(sym(init->T), skew(init->J), sym(init->R));
    if (sp.fixed_T) x = bp.pack(*sp.fixed_T, skew(init->J), sym(init->R));
    const auto margins = detail::block_margins(bp, x);
    have_start = std::all_of(margins.begin(), margins.end(), [](double m) { return m > 0.0; });
  }
  if (!have_start) {
    const TJR p0 = initial_point(sp);
    x = bp.pack(p0.T, p0.J, p0.R);
  }

  const double nu = bp.nu();
  const double f0 = bp.objective(x);
  const double eps = opts.accuracy > 0.0 ? opts.accuracy : 1e-8 * (1.0 + f0);
  const Mat& Hf = bp.objective_hessian();
  const int m = bp.dim();

  SubproblemSolution sol;
  double t = nu > 0.0 ? nu / std::max(f0, 10.0 * eps) : 1.0;
  int iter = 0;

  auto phi = [&](const Vec& z, double logdet) { return t * bp.objective(z) - logdet; };

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    double last_dec = 0.0;
    for (int k = 0; k < opts.max_newton_per_center; ++k) {
      detail::BarrierEval ev = detail::barrier_eval(bp, x, true);
      if (!ev.feasible) throw Error("barrier iterate left the feasible set");
      Vec g = t * bp.objective_gradient(x);
      Mat H = t * Hf;
      for (std::size_t c = 0; c < bp.blocks().size(); ++c) {
        const auto& blk = bp.blocks()[c];
        const Mat& W = ev.W[c];
        for (int i : blk.active) {
          double gi = 0.0;
          for (const auto& e : blk.coeff[i]) gi += e.val * W(e.col, e.row);
          g(i) -= gi;
        }
        for (std::size_t ia = 0; ia < blk.active.size(); ++ia) {
          const int i = blk.active[ia];
          const auto& ci = blk.coeff[i];
          for (std::size_t ja = ia; ja < blk.active.size(); ++ja) {
            const int j = blk.active[ja];
            double h = 0.0;
            for (const auto& a : ci)
              for (const auto& b : blk.coeff[j]) h += a.val * b.val * W(a.col, b.row) * W(b.col, a.row);
            H(i, j) += h;
            if (i != j) H(j, i) += h;
          }
        }
      }
      Eigen::LLT<Mat> llt(H);
      Vec dx;
      if (llt.info() == Eigen::Success) {
        dx = -llt.solve(g);
      } else {
        const double reg = 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
        dx = -(H + reg * Mat::Identity(m, m)).ldlt().solve(g);
      }
      const double dec = -g.dot(dx);
      last_dec = dec;
      ++iter;
      if (dec / 2.0 <= opts.newton_tol || !std::isfinite(dec)) break;
      const double phi0 = phi(x, ev.logdet);
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        const Vec xn = x + alpha * dx;
        const detail::BarrierEval en = detail::barrier_eval(bp, xn, false);
        if (!en.feasible) continue;
        if (phi(xn, en.logdet) <= phi0 - 0.25 * alpha * dec) {
          x = xn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    sol.kkt_residual = last_dec / t;
    const double fx = bp.objective(x);
    sol.outer_objectives.push_back(fx);
    ++sol.barrier_iterations;
    if (opts.trace) {
      const auto mg = detail::block_margins(bp, x);
      const double mm = mg.empty() ? 0.0 : *std::min_element(mg.begin(), mg.end());
      *opts.trace << sol.barrier_iterations << ',' << fx << ',' << nu / t << ',' << mm << '\n';
    }
    if (nu / t <= eps) {
      sol.converged = true;
      break;
    }
    t *= opts.barrier_growth;
  }
  const TJR out = bp.unpack(x);
  sol.T = out.T;
  sol.J = out.J;
  sol.R = out.R;
  sol.objective = bp.objective(x);
  sol.newton_iterations = iter;
  sol.gap = nu / t;
  sol.margins = detail::block_margins(bp, x);
  return sol;
}

}  // namespace dhpair
