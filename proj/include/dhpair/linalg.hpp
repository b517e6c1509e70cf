#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dhpair {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

inline Mat sym(const Mat& x) { return 0.5 * (x + x.transpose()); }
inline Mat skew(const Mat& x) { return 0.5 * (x - x.transpose()); }

inline double frob2(const Mat& x) { return x.squaredNorm(); }

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat block_diag(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

// Eigenvalues of the symmetric part, ascending.
inline Vec sym_eigenvalues(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double lambda_max(const Mat& x) { return x.size() == 0 ? 0.0 : sym_eigenvalues(x).maxCoeff(); }
inline double lambda_min(const Mat& x) { return x.size() == 0 ? 0.0 : sym_eigenvalues(x).minCoeff(); }

inline double lambda_max(const CMat& h) {
  if (h.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Nearest positive semidefinite matrix in Frobenius norm (clip negative
// eigenvalues of the symmetric part).
inline Mat project_psd(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(x));
  const Vec d = es.eigenvalues().cwiseMax(0.0);
  Mat out = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  return sym(out);
}

inline double spectral_norm(const Mat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues()(0);
}

// sigma_max / sigma_min; infinity when singular.
inline double condition_number(const Mat& x) {
  Eigen::JacobiSVD<Mat> svd(x);
  const Vec& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

inline void require_square(const Mat& x, Eigen::Index n, const char* what) {
  if (x.rows() != n || x.cols() != n)
    throw DimensionError(std::string(what) + " must be " + std::to_string(n) + "x" +
                         std::to_string(n) + ", got " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()));
}

// Strict negative definiteness with a scale-aware margin:
// lambda_max(M) <= -tol * (1 + ||M||).
inline bool negative_definite(const Mat& m, double tol) {
  return lambda_max(m) <= -tol * (1.0 + spectral_norm(m));
}

inline bool positive_definite(const Mat& m, double tol) {
  return lambda_min(m) >= tol * (1.0 + spectral_norm(m));
}

}  // namespace dhpair
