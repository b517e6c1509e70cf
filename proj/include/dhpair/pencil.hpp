#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <lapacke.h>

#include "dhpair/linalg.hpp"
#include "dhpair/region.hpp"

namespace dhpair {

struct MatrixPair {
  Mat E;
  Mat A;

  MatrixPair() = default;
  MatrixPair(Mat e, Mat a) : E(std::move(e)), A(std::move(a)) {
    if (E.rows() != E.cols() || A.rows() != A.cols() || E.rows() != A.rows())
      throw DimensionError("E and A must be square of the same size");
  }
  Eigen::Index n() const { return E.rows(); }
};

struct SpectrumOptions {
  double beta_tol = 1e-8;
  // Negative means the default n * eps * sigma_max(E).
  double rank_tol = -1.0;
  // Regularity threshold on sigma_min(sE - A) / (||E|| + ||A||).
  double singular_tol = 1e-12;
};

struct FiniteEigenvalue {
  Complex lambda;
  CVec right;  // (A - lambda E) v = 0
  CVec left;   // u^* (A - lambda E) = 0
  double right_residual = 0.0;
  double left_residual = 0.0;
};

struct RegularityResult {
  bool regular = false;
  Complex witness{0.0, 0.0};
  double best_sigma = 0.0;  // largest normalized sigma_min over samples
};

struct SpectrumReport {
  std::vector<FiniteEigenvalue> finite_eigenvalues;
  int num_infinite = 0;
  int rank_E = 0;
  bool is_regular = false;
  bool is_impulse_free = false;
  double rank_tol = 0.0;
  double beta_tol = 0.0;
  // Largest singular value of E above rank_tol but not above beta_tol * (||E||_F + ||A||_F);
  // zero when none. Such a value makes the finite/infinite split threshold dependent.
  double ambiguous_sigma = 0.0;

  int num_finite() const { return static_cast<int>(finite_eigenvalues.size()); }
};

namespace detail {

inline double pair_scale(const MatrixPair& p) {
  return spectral_norm(p.E) + spectral_norm(p.A);
}

// Fixed sample points plus eight seeded complex Gaussian points.
inline std::vector<Complex> regularity_samples() {
  std::vector<Complex> s = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::mt19937_64 rng(0x5eed2017ULL);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 8; ++i) s.emplace_back(nd(rng), nd(rng));
  return s;
}

inline double relative_residual(const Mat& E, const Mat& A, Complex lambda, const CVec& v,
                                bool left) {
  const CMat m = A.cast<Complex>() - lambda * E.cast<Complex>();
  const double nv = v.norm();
  if (nv == 0.0) return std::numeric_limits<double>::infinity();
  const double r = left ? (v.adjoint() * m).norm() : (m * v).norm();
  return r / ((spectral_norm(A) + std::abs(lambda) * spectral_norm(E)) * nv + 1e-300);
}

}  // namespace detail

inline int numerical_rank(const Mat& x, double tol) {
  Eigen::JacobiSVD<Mat> svd(x);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++r;
  return r;
}

inline double default_rank_tol(const Mat& E) {
  return static_cast<double>(E.rows()) * std::numeric_limits<double>::epsilon() * spectral_norm(E);
}

inline RegularityResult regularity_check(const MatrixPair& p, double singular_tol = 1e-12) {
  RegularityResult out;
  const double scale = detail::pair_scale(p);
  if (p.n() == 0) {
    out.regular = true;
    return out;
  }
  if (scale == 0.0) return out;  // E = A = 0
  const CMat e = p.E.cast<Complex>(), a = p.A.cast<Complex>();
  for (const Complex& s : detail::regularity_samples()) {
    Eigen::JacobiSVD<CMat> svd(s * e - a);
    const double smin = svd.singularValues()(p.n() - 1) / scale;
    if (smin > out.best_sigma) {
      out.best_sigma = smin;
      out.witness = s;
    }
  }
  out.regular = out.best_sigma >= singular_tol;
  return out;
}

// Generalized eigenstructure of sE - A via the QZ algorithm (LAPACK dggev).
inline SpectrumReport spectrum(const MatrixPair& p, const SpectrumOptions& opts = {}) {
  SpectrumReport rep;
  const lapack_int n = static_cast<lapack_int>(p.n());
  rep.beta_tol = opts.beta_tol;
  rep.rank_tol = opts.rank_tol >= 0.0 ? opts.rank_tol : default_rank_tol(p.E);
  rep.rank_E = numerical_rank(p.E, rep.rank_tol);
  if (n > 0) {
    const double band = opts.beta_tol * (p.E.norm() + p.A.norm());
    const Vec sv = Eigen::JacobiSVD<Mat>(p.E).singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > rep.rank_tol && sv(i) <= band) rep.ambiguous_sigma = std::max(rep.ambiguous_sigma, sv(i));
  }
  rep.is_regular = regularity_check(p, opts.singular_tol).regular;
  if (!rep.is_regular || n == 0) {
    rep.is_impulse_free = rep.is_regular && rep.rank_E == 0;
    return rep;
  }

  Mat a = p.A, b = p.E;
  Vec alphar(n), alphai(n), beta(n);
  Mat vl(n, n), vr(n, n);
  const lapack_int info = LAPACKE_dggev(LAPACK_COL_MAJOR, 'V', 'V', n, a.data(), n, b.data(), n,
                                        alphar.data(), alphai.data(), beta.data(), vl.data(), n,
                                        vr.data(), n);
  if (info != 0) throw Error("QZ iteration failed (dggev info " + std::to_string(info) + ")");

  const double scale = spectral_norm(p.E) + spectral_norm(p.A);
  for (lapack_int j = 0; j < n; ++j) {
    const bool complex_pair = alphai(j) != 0.0 && j + 1 < n;
    CVec right(n), left(n);
    if (complex_pair) {
      right = vr.col(j).cast<Complex>() + Complex(0, 1) * vr.col(j + 1).cast<Complex>();
      left = vl.col(j).cast<Complex>() + Complex(0, 1) * vl.col(j + 1).cast<Complex>();
    } else {
      right = vr.col(j).cast<Complex>();
      left = vl.col(j).cast<Complex>();
    }
    for (int c = 0; c < (complex_pair ? 2 : 1); ++c) {
      const lapack_int idx = j + c;
      const CVec rv = c == 0 ? right : CVec(right.conjugate());
      const CVec lv = c == 0 ? left : CVec(left.conjugate());
      if (std::abs(beta(idx)) > opts.beta_tol * scale) {
        FiniteEigenvalue fe;
        fe.lambda = Complex(alphar(idx), alphai(idx)) / beta(idx);
        fe.right = rv;
        fe.left = lv;
        fe.right_residual = detail::relative_residual(p.E, p.A, fe.lambda, rv, false);
        fe.left_residual = detail::relative_residual(p.E, p.A, fe.lambda, lv, true);
        rep.finite_eigenvalues.push_back(std::move(fe));
      } else {
        ++rep.num_infinite;
      }
    }
    if (complex_pair) ++j;
  }
  rep.is_impulse_free = rep.num_finite() == rep.rank_E;
  return rep;
}

struct AdmissibilityVerdict {
  bool admissible = false;
  std::vector<std::string> reasons;
  double worst_margin = std::numeric_limits<double>::infinity();
  Complex worst_eigenvalue{0.0, 0.0};
  SpectrumReport report;
};

// Regular, impulse-free and every finite eigenvalue strictly inside the region.
inline AdmissibilityVerdict admissibility_check(const MatrixPair& p, const LmiRegion& region,
                                                double margin_tol = LmiRegion::kDefaultMarginTol,
                                                const SpectrumOptions& opts = {}) {
  AdmissibilityVerdict v;
  v.report = spectrum(p, opts);
  if (!v.report.is_regular) v.reasons.push_back("not regular");
  if (v.report.is_regular && !v.report.is_impulse_free)
    v.reasons.push_back("not impulse-free: " + std::to_string(v.report.num_finite()) +
                        " finite eigenvalues but rank(E) = " + std::to_string(v.report.rank_E));
  if (v.report.ambiguous_sigma > 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "E nearly singular (singular value %.3g), finite eigenvalue count is ambiguous",
                  v.report.ambiguous_sigma);
    v.reasons.emplace_back(buf);
  }
  bool all_inside = true;
  for (const auto& fe : v.report.finite_eigenvalues) {
    const MembershipResult m = region.membership(fe.lambda, margin_tol);
    if (m.margin < v.worst_margin) {
      v.worst_margin = m.margin;
      v.worst_eigenvalue = fe.lambda;
    }
    if (m.status != Membership::inside) {
      all_inside = false;
      char buf[160];
      std::snprintf(buf, sizeof(buf), "eigenvalue %.12g%+.12gi %s region (margin %.12g)",
                    fe.lambda.real(), fe.lambda.imag(),
                    m.status == Membership::outside ? "outside" : "on boundary of", m.margin);
      v.reasons.emplace_back(buf);
    }
  }
  v.admissible = v.report.is_regular && v.report.is_impulse_free && all_inside &&
                 v.report.ambiguous_sigma == 0.0;
  return v;
}

class LemmaError : public Error {
 public:
  using Error::Error;
};

struct EigenRatios {
  double re;
  double im;
  double im_residual;  // imaginary part discarded from each ratio
};

// Real and imaginary part of the eigenvalue attached to a left eigenvector x
// of (E, (J - R)Q): -x^*Rx / x^*EQ^{-1}x and -i x^*Jx / x^*EQ^{-1}x.
inline EigenRatios lemma2_ratios(const Mat& E, const Mat& J, const Mat& R, const Mat& Q,
                                 const CVec& x) {
  const Eigen::Index n = E.rows();
  require_square(E, n, "E");
  require_square(J, n, "J");
  require_square(R, n, "R");
  require_square(Q, n, "Q");
  if (x.size() != n) throw DimensionError("x must have length n");
  if (x.norm() == 0.0) throw LemmaError("x must be nonzero");
  if (condition_number(Q) > 1e14) throw LemmaError("Q is singular");
  // x^* E Q^{-1} x = x^* E w with Q w = x
  const CMat qc = Q.cast<Complex>();
  const CVec w = qc.fullPivLu().solve(x);
  const Complex den = x.dot(E.cast<Complex>() * w);
  const double den_scale = x.squaredNorm() * spectral_norm(E) * w.norm() / x.norm();
  if (!(std::abs(den) > 1e-13 * den_scale))
    throw LemmaError(
        "x^* E Q^{-1} x vanishes; the pair must be regular with Q^T E = E^T Q >= 0");
  const Complex rx = x.dot(R.cast<Complex>() * x);
  const Complex jx = x.dot(J.cast<Complex>() * x);
  const Complex re = -rx / den;
  const Complex im = Complex(0, -1) * jx / den;
  return {re.real(), im.real(), std::max(std::abs(re.imag()), std::abs(im.imag()))};
}

}  // namespace dhpair
