#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dhpair/linalg.hpp"
#include "dhpair/pencil.hpp"
#include "dhpair/region.hpp"

namespace dhpair {

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// Solver variables (T, J, R, Q) realizing the pair (TQ, (J - R)Q).
// T and R are kept symmetric and J skew-symmetric on every write.
class DhParam {
 public:
  DhParam() = default;
  DhParam(const Mat& T, const Mat& J, const Mat& R, const Mat& Q) {
    const Eigen::Index n = Q.rows();
    require_square(Q, n, "Q");
    require_square(T, n, "T");
    require_square(J, n, "J");
    require_square(R, n, "R");
    T_ = sym(T);
    J_ = skew(J);
    R_ = sym(R);
    Q_ = Q;
  }

  static DhParam identity_init(Eigen::Index n) {
    return {Mat::Identity(n, n), Mat::Zero(n, n), Mat::Zero(n, n), Mat::Identity(n, n)};
  }

  const Mat& T() const { return T_; }
  const Mat& J() const { return J_; }
  const Mat& R() const { return R_; }
  const Mat& Q() const { return Q_; }
  Eigen::Index n() const { return Q_.rows(); }

  void set_T(const Mat& t) { require_square(t, n(), "T"); T_ = sym(t); }
  void set_J(const Mat& j) { require_square(j, n(), "J"); J_ = skew(j); }
  void set_R(const Mat& r) { require_square(r, n(), "R"); R_ = sym(r); }
  void set_Q(const Mat& q) { require_square(q, n(), "Q"); Q_ = q; }

 private:
  Mat T_, J_, R_, Q_;
};

inline double singular_q_limit(Eigen::Index n) { return 1.0 / (static_cast<double>(n) * 1e-12); }

// (TQ, (J - R)Q).
inline MatrixPair realize(const DhParam& d) {
  if (condition_number(d.Q()) > singular_q_limit(d.n()))
    throw SingularMatrixError("Q is numerically singular");
  return {d.T() * d.Q(), (d.J() - d.R()) * d.Q()};
}

inline Mat assemble_M_hat(const LmiRegion& region, const Mat& T, const Mat& J, const Mat& R) {
  return lmi_assemble(region.B(), region.C(), T, J, R);
}

// B (x) Q^T E + (C - C^T) (x) Q^T J Q - (C + C^T) (x) Q^T R Q.
inline Mat assemble_M(const LmiRegion& region, const Mat& E, const Mat& J, const Mat& R,
                      const Mat& Q) {
  const Eigen::Index n = Q.rows();
  require_square(E, n, "E");
  require_square(J, n, "J");
  require_square(R, n, "R");
  return lmi_assemble(region.B(), region.C(), Q.transpose() * E, Q.transpose() * J * Q,
                      Q.transpose() * R * Q);
}

struct ConditionCheck {
  std::string name;
  bool passed;
  double value;  // the quantity tested (eigenvalue, residual, condition number)
};

struct CertificateVerdict {
  bool passed = true;
  std::vector<ConditionCheck> conditions;
  std::optional<AdmissibilityVerdict> admissibility;  // independent spectral cross-check

  void add(std::string name, bool ok, double value) {
    conditions.push_back({std::move(name), ok, value});
    passed = passed && ok;
  }
  std::vector<std::string> failed() const {
    std::vector<std::string> out;
    for (const auto& c : conditions)
      if (!c.passed) out.push_back(c.name);
    return out;
  }
};

namespace detail {

inline double rel_asym(const Mat& x) {
  return (x - x.transpose()).norm() / (1.0 + x.norm());
}

inline void check_symmetric_psd(CertificateVerdict& v, const std::string& label, const Mat& x,
                                double tol) {
  v.add(label + " symmetric", rel_asym(x) <= std::max(tol, 1e-10), rel_asym(x));
  const double lmin = lambda_min(x);
  v.add(label + " positive semidefinite", lmin >= -tol * (1.0 + spectral_norm(x)), lmin);
}

inline void check_negative_definite(CertificateVerdict& v, const std::string& label, const Mat& m,
                                    double tol) {
  v.add(label + " negative definite", negative_definite(m, tol), lambda_max(m));
}

inline void check_negative_semidefinite(CertificateVerdict& v, const std::string& label,
                                        const Mat& m, double tol) {
  const double lmax = lambda_max(m);
  v.add(label + " negative semidefinite", lmax <= tol * (1.0 + spectral_norm(m)), lmax);
}

}  // namespace detail

// Sufficient condition for admissibility of (E, (J - R)Q): J skew, R > 0,
// Q invertible, Q^T E = E^T Q >= 0 and M(E, J, R, Q) < 0. The verdict also
// carries a spectral admissibility check of the same pair.
inline CertificateVerdict verify_sufficiency(const LmiRegion& region, const Mat& E, const Mat& J,
                                             const Mat& R, const Mat& Q, double tol = 1e-9) {
  CertificateVerdict v;
  const Eigen::Index n = Q.rows();
  require_square(E, n, "E");
  const double jskew = (J + J.transpose()).norm() / (1.0 + J.norm());
  v.add("J skew-symmetric", jskew <= std::max(tol, 1e-10), jskew);
  v.add("R positive definite", positive_definite(sym(R), tol), lambda_min(R));
  const double cq = condition_number(Q);
  v.add("Q invertible", cq < singular_q_limit(n), cq);
  detail::check_symmetric_psd(v, "Q^T E", Q.transpose() * E, tol);
  detail::check_negative_definite(v, "M", sym(assemble_M(region, E, skew(J), sym(R), Q)), tol);
  if (cq < singular_q_limit(n))
    v.admissibility = admissibility_check(MatrixPair(E, (J - R) * Q), region);
  return v;
}

// (J, R, Q) with Q = X, R = -sym(A X^{-1}), J = skew(A X^{-1}); (J - R) Q = A.
struct DhTriple {
  Mat J;
  Mat R;
  Mat Q;
};

inline DhTriple dh_from_X_certificate(const Mat& A, const Mat& X) {
  const Eigen::Index n = X.rows();
  require_square(A, n, "A");
  require_square(X, n, "X");
  if (condition_number(X) > singular_q_limit(n)) throw SingularMatrixError("X is singular");
  // A X^{-1} = (X^{-T} A^T)^T
  const Mat ax = X.transpose().fullPivLu().solve(A.transpose()).transpose();
  return {skew(ax), -sym(ax), X};
}

struct Certificate {
  enum class Kind { X, PS, S };
  Kind kind = Kind::X;
  Mat X;  // X certificate
  Mat P;  // PS certificate
  Mat S;  // PS and S certificates
  Mat Q;  // S certificate: the DH factor, J and R follow from A Q^{-1}

  static Certificate x_certificate(Mat x) {
    Certificate c;
    c.kind = Kind::X;
    c.X = std::move(x);
    return c;
  }
  static Certificate ps_certificate(Mat p, Mat s) {
    Certificate c;
    c.kind = Kind::PS;
    c.P = std::move(p);
    c.S = std::move(s);
    return c;
  }
  static Certificate s_certificate(Mat q, Mat s) {
    Certificate c;
    c.kind = Kind::S;
    c.Q = std::move(q);
    c.S = std::move(s);
    return c;
  }
};

// B (x) E^T X + C (x) X^T A + C^T (x) A^T X.
inline Mat assemble_M_X(const LmiRegion& region, const Mat& E, const Mat& A, const Mat& X) {
  const Mat& B = region.B();
  const Mat& C = region.C();
  return kron(B, E.transpose() * X) + kron(C, X.transpose() * A) +
         kron(C.transpose(), A.transpose() * X);
}

// B (x) EP + C (x) AP + C^T (x) (AP)^T + I_s (x) ES.
inline Mat assemble_M_PS(const LmiRegion& region, const Mat& E, const Mat& A, const Mat& P,
                         const Mat& S) {
  const Mat& B = region.B();
  const Mat& C = region.C();
  const Mat ap = A * P;
  return kron(B, E * P) + kron(C, ap) + kron(C.transpose(), ap.transpose()) +
         kron(Mat::Identity(region.size(), region.size()), E * S);
}

// Evaluates every LMI of the certificate's characterization; pass/fail per
// condition. Preconditions on the region (uniform part nonempty, region in the
// open left half-plane) are reported as conditions too.
inline CertificateVerdict verify_certificate(const Certificate& c, const MatrixPair& p,
                                             const LmiRegion& region, double tol = 1e-9) {
  CertificateVerdict v;
  const Mat& E = p.E;
  const Mat& A = p.A;
  const Eigen::Index n = p.n();
  switch (c.kind) {
    case Certificate::Kind::X: {
      require_square(c.X, n, "X");
      v.add("uniform part of region nonempty", region.uniform_part_nonempty(), 0.0);
      detail::check_symmetric_psd(v, "E^T X", E.transpose() * c.X, tol);
      detail::check_negative_definite(v, "M(E, A, X)", sym(assemble_M_X(region, E, A, c.X)), tol);
      break;
    }
    case Certificate::Kind::PS: {
      require_square(c.P, n, "P");
      require_square(c.S, n, "S");
      const RealSlice slice = region.real_slice();
      v.add("region in open left half-plane", !slice.empty && slice.hi < 0.0, slice.hi);
      detail::check_symmetric_psd(v, "EP", E * c.P, tol);
      detail::check_symmetric_psd(v, "ES", E * c.S, tol);
      detail::check_negative_definite(v, "AS + (AS)^T", A * c.S + (A * c.S).transpose(), tol);
      detail::check_negative_semidefinite(v, "M(E, A, P, S)",
                                          sym(assemble_M_PS(region, E, A, c.P, c.S)), tol);
      break;
    }
    case Certificate::Kind::S: {
      require_square(c.Q, n, "Q");
      require_square(c.S, n, "S");
      const RealSlice slice = region.real_slice();
      v.add("region in open left half-plane", !slice.empty && slice.hi < 0.0, slice.hi);
      const double cq = condition_number(c.Q);
      v.add("Q invertible", cq < singular_q_limit(n), cq);
      if (cq >= singular_q_limit(n)) break;
      const DhTriple dh = dh_from_X_certificate(A, c.Q);
      v.add("R positive definite", positive_definite(dh.R, tol), lambda_min(dh.R));
      detail::check_symmetric_psd(v, "Q^T E", c.Q.transpose() * E, tol);
      const double cs = condition_number(c.S);
      v.add("S invertible", cs < singular_q_limit(n), cs);
      detail::check_symmetric_psd(v, "S^T E", c.S.transpose() * E, tol);
      const Mat m = assemble_M(region, E, dh.J, dh.R, c.Q) +
                    kron(Mat::Identity(region.size(), region.size()), E.transpose() * c.S);
      detail::check_negative_semidefinite(v, "M(E, J, R, Q, S)", sym(m), tol);
      break;
    }
  }
  return v;
}

// Adds delta * I to R.
inline DhParam shift_dissipation(const DhParam& d, double delta) {
  DhParam out = d;
  out.set_R(d.R() + delta * Mat::Identity(d.n(), d.n()));
  return out;
}

}  // namespace dhpair
