#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dhpair/dh.hpp"
#include "dhpair/pencil.hpp"
#include "dhpair/result.hpp"
#include "oracles.hpp"

using namespace dhpair;

namespace {

std::vector<double> sorted_real(const SpectrumReport& r) {
  std::vector<double> out;
  for (const auto& fe : r.finite_eigenvalues) out.push_back(fe.lambda.real());
  std::sort(out.begin(), out.end());
  return out;
}

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m.diagonal() << a, b;
  return m;
}

MatrixPair random_dh_pair(int n, std::mt19937_64& rng) {
  const Mat T = oracle::random_spd(n, rng);
  const Mat J = oracle::random_skew(n, rng);
  const Mat R = oracle::random_spd(n, rng);
  const Mat Q = oracle::random_matrix(n, rng) + 0.5 * n * Mat::Identity(n, n);
  return realize(DhParam(T, J, R, Q));
}

}  // namespace

TEST(Spectrum, IdentityAndDiagonal) {
  const SpectrumReport r = spectrum(MatrixPair(Mat::Identity(2, 2), diag2(-1, -2)));
  EXPECT_TRUE(r.is_regular);
  EXPECT_TRUE(r.is_impulse_free);
  EXPECT_EQ(r.num_infinite, 0);
  const auto ev = sorted_real(r);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(ev[0], -2.0, 1e-14);
  EXPECT_NEAR(ev[1], -1.0, 1e-14);
}

TEST(Spectrum, OneInfiniteEigenvalue) {
  const SpectrumReport r = spectrum(MatrixPair(diag2(1, 0), Mat::Identity(2, 2)));
  EXPECT_TRUE(r.is_regular);
  EXPECT_EQ(r.rank_E, 1);
  EXPECT_EQ(r.num_infinite, 1);
  ASSERT_EQ(r.num_finite(), 1);
  EXPECT_NEAR(r.finite_eigenvalues[0].lambda.real(), 1.0, 1e-14);
  EXPECT_TRUE(r.is_impulse_free);
}

TEST(Spectrum, SingularPencilIsDetected) {
  const MatrixPair p(diag2(1, 0), diag2(1, 0));
  EXPECT_FALSE(regularity_check(p).regular);
  const SpectrumReport r = spectrum(p);
  EXPECT_FALSE(r.is_regular);
  EXPECT_FALSE(r.is_impulse_free);
}

TEST(Spectrum, ZeroEIsRegularAndImpulseFree) {
  const MatrixPair p(Mat::Zero(3, 3), Mat::Identity(3, 3));
  EXPECT_TRUE(regularity_check(p).regular);
  const SpectrumReport r = spectrum(p);
  EXPECT_EQ(r.rank_E, 0);
  EXPECT_EQ(r.num_finite(), 0);
  EXPECT_TRUE(r.is_impulse_free);
}

TEST(Spectrum, IdentityEIsAlwaysRegular) {
  std::mt19937_64 rng(9);
  const MatrixPair p(Mat::Identity(4, 4), oracle::random_matrix(4, rng));
  const RegularityResult rr = regularity_check(p);
  EXPECT_TRUE(rr.regular);
  EXPECT_GT(rr.best_sigma, 1e-6);
}

TEST(Spectrum, AgreesWithIndependentQzAndHasSmallResiduals) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    const MatrixPair p(oracle::random_matrix(n, rng), oracle::random_matrix(n, rng));
    const SpectrumReport r = spectrum(p);
    const oracle::QzSpectrum q = oracle::qz_spectrum(p.E, p.A);
    ASSERT_EQ(r.num_finite(), static_cast<int>(q.finite.size()));
    EXPECT_EQ(r.num_finite() + r.num_infinite, n);
    for (const auto& fe : r.finite_eigenvalues) {
      double best = 1e300;
      for (const auto& z : q.finite) best = std::min(best, std::abs(z - fe.lambda));
      EXPECT_LE(best, 1e-8 * (1.0 + std::abs(fe.lambda)));
      EXPECT_LE(fe.right_residual, 1e-10);
      EXPECT_LE(fe.left_residual, 1e-10);
    }
  }
}

TEST(Spectrum, ComplexEigenvaluesComeInConjugatePairs) {
  std::mt19937_64 rng(22);
  const MatrixPair p(Mat::Identity(7, 7), oracle::random_matrix(7, rng));
  const SpectrumReport r = spectrum(p);
  for (const auto& fe : r.finite_eigenvalues) {
    double best = 1e300;
    for (const auto& g : r.finite_eigenvalues) best = std::min(best, std::abs(g.lambda - std::conj(fe.lambda)));
    EXPECT_LE(best, 1e-12);
  }
}

TEST(Spectrum, DhPairsWithPositiveDissipationAreHurwitz) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixPair p = random_dh_pair(2 + trial % 8, rng);
    const SpectrumReport r = spectrum(p);
    EXPECT_TRUE(r.is_regular);
    EXPECT_TRUE(r.is_impulse_free);
    for (const auto& fe : r.finite_eigenvalues) EXPECT_LT(fe.lambda.real(), 0.0);
  }
}

TEST(Admissibility, BasicVerdicts) {
  const LmiRegion h = hurwitz_region();
  const int n = 3;
  EXPECT_TRUE(admissibility_check(MatrixPair(Mat::Identity(n, n), -Mat::Identity(n, n)), h).admissible);

  const auto bad = admissibility_check(MatrixPair(Mat::Identity(n, n), Mat::Identity(n, n)), h);
  EXPECT_FALSE(bad.admissible);
  ASSERT_FALSE(bad.reasons.empty());
  EXPECT_NE(bad.reasons[0].find("outside"), std::string::npos);
  EXPECT_NEAR(bad.worst_margin, -2.0, 1e-12);

  const auto desc = admissibility_check(MatrixPair(diag2(1, 0), Mat::Identity(2, 2)), h);
  EXPECT_FALSE(desc.admissible);
  EXPECT_TRUE(desc.report.is_impulse_free);

  const auto sing = admissibility_check(MatrixPair(diag2(1, 0), diag2(1, 0)), h);
  EXPECT_FALSE(sing.admissible);
  ASSERT_FALSE(sing.reasons.empty());
  EXPECT_EQ(sing.reasons[0], "not regular");
}

TEST(Admissibility, ImpulsiveDescriptorFails) {
  // Nilpotent E of index two: no finite eigenvalues, rank(E) = 1.
  Mat E = Mat::Zero(2, 2);
  E(0, 1) = 1.0;
  const auto v = admissibility_check(MatrixPair(E, Mat::Identity(2, 2)), hurwitz_region());
  EXPECT_TRUE(v.report.is_regular);
  EXPECT_FALSE(v.report.is_impulse_free);
  EXPECT_FALSE(v.admissible);
}

TEST(Admissibility, NearlySingularEIsNotCertified) {
  const Mat I = Mat::Identity(2, 2);
  auto with_small = [&](double s) {
    Mat E = I;
    E(1, 1) = s;
    return admissibility_check(MatrixPair(E, -I), hurwitz_region());
  };
  // exactly singular: one infinite eigenvalue, index one
  EXPECT_TRUE(with_small(0.0).admissible);
  EXPECT_EQ(with_small(0.0).report.ambiguous_sigma, 0.0);
  // clearly invertible: eigenvalue -1e3 is finite under any threshold
  EXPECT_TRUE(with_small(1e-3).admissible);
  // between the rank and infinite-eigenvalue thresholds
  const auto gray = with_small(1e-12);
  EXPECT_FALSE(gray.admissible);
  EXPECT_DOUBLE_EQ(gray.report.ambiguous_sigma, 1e-12);
  ASSERT_FALSE(gray.reasons.empty());
  EXPECT_NE(gray.reasons.back().find("ambiguous"), std::string::npos);
}

TEST(Admissibility, RepairResolvesNearlySingularT) {
  // T with a negligible eigenvalue realizes an E in the ambiguous band; the final
  // repair zeroes it and certifies the index-one pair instead.
  const Mat I = Mat::Identity(3, 3);
  Mat T = I;
  T(2, 2) = 1e-13;
  SolveResult res;
  res.param = DhParam(T, Mat::Zero(3, 3), I, I);
  EXPECT_FALSE(admissibility_check(realize(res.param), hurwitz_region()).admissible);
  detail::finalize_result(res, MatrixPair(I, -I), hurwitz_region(), 1.0);
  EXPECT_TRUE(res.admissible);
  EXPECT_EQ(res.verdict.report.rank_E, 2);
  EXPECT_EQ(res.verdict.report.num_infinite, 1);
}

TEST(Lemma, RatiosForRotationDamping) {
  Mat J(2, 2);
  J << 0, 1, -1, 0;
  const Mat I = Mat::Identity(2, 2);
  const SpectrumReport r = spectrum(MatrixPair(I, J - I));
  ASSERT_EQ(r.num_finite(), 2);
  for (const auto& fe : r.finite_eigenvalues) {
    const EigenRatios er = lemma2_ratios(I, J, I, I, fe.left);
    EXPECT_NEAR(er.re, -1.0, 1e-12);
    EXPECT_NEAR(er.im, fe.lambda.imag(), 1e-12);
    EXPECT_NEAR(std::abs(er.im), 1.0, 1e-12);
    const EigenRatios scaled = lemma2_ratios(I, J, I, I, CVec(5.0 * fe.left));
    EXPECT_NEAR(scaled.re, er.re, 1e-12);
    EXPECT_NEAR(scaled.im, er.im, 1e-12);
  }
}

TEST(Lemma, PureDissipation) {
  const Mat I = Mat::Identity(3, 3);
  CVec x(3);
  x << Complex(0.6, 0.0), Complex(0.0, 0.8), 0.0;
  const EigenRatios er = lemma2_ratios(I, Mat::Zero(3, 3), 2.5 * I, I, x);
  EXPECT_NEAR(er.re, -2.5, 1e-14);
  EXPECT_NEAR(er.im, 0.0, 1e-14);
}

TEST(Lemma, RatiosReproduceEigenvaluesOfRandomDhPairs) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 19;
    const Mat T = oracle::random_spd(n, rng);
    const Mat J = oracle::random_skew(n, rng);
    const Mat R = oracle::random_spd(n, rng);
    const Mat Q = oracle::random_matrix(n, rng) + n * Mat::Identity(n, n);
    const Mat E = T * Q;
    const SpectrumReport r = spectrum(MatrixPair(E, (J - R) * Q));
    for (const auto& fe : r.finite_eigenvalues) {
      const EigenRatios er = lemma2_ratios(E, J, R, Q, fe.left);
      const double s = 1.0 + std::abs(fe.lambda);
      EXPECT_NEAR(er.re, fe.lambda.real(), 1e-8 * s);
      EXPECT_NEAR(er.im, fe.lambda.imag(), 1e-8 * s);
      EXPECT_LE(er.im_residual, 1e-8 * s);
    }
  }
}

TEST(Lemma, Errors) {
  const Mat I = Mat::Identity(2, 2);
  CVec x = CVec::Zero(2);
  EXPECT_THROW(lemma2_ratios(I, Mat::Zero(2, 2), I, I, x), LemmaError);
  x(0) = 1.0;
  EXPECT_THROW(lemma2_ratios(I, Mat::Zero(2, 2), I, Mat::Zero(2, 2), x), LemmaError);
  EXPECT_THROW(lemma2_ratios(diag2(0, 1), Mat::Zero(2, 2), I, I, x), LemmaError);
  EXPECT_THROW(lemma2_ratios(I, Mat::Zero(2, 2), I, I, CVec::Ones(3)), DimensionError);
}

TEST(Pair, DimensionMismatchThrows) {
  EXPECT_THROW(MatrixPair(Mat::Identity(2, 2), Mat::Identity(3, 3)), DimensionError);
  EXPECT_THROW(MatrixPair(Mat(2, 3), Mat(2, 3)), DimensionError);
}
