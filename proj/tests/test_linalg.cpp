#include <gtest/gtest.h>

#include <random>

#include "dhpair/linalg.hpp"
#include "oracles.hpp"

using namespace dhpair;

TEST(Linalg, SymSkewSplit) {
  std::mt19937_64 rng(1);
  const Mat x = oracle::random_matrix(5, rng);
  EXPECT_LE((sym(x) + skew(x) - x).norm(), 1e-14);
  EXPECT_LE((sym(x) - sym(x).transpose()).norm(), 0.0);
  EXPECT_LE((skew(x) + skew(x).transpose()).norm(), 0.0);
}

TEST(Linalg, KronMatchesEntrywiseDefinition) {
  std::mt19937_64 rng(2);
  Mat a(2, 3), b(3, 2);
  a = oracle::random_matrix(3, rng).topRows(2);
  b = oracle::random_matrix(3, rng).leftCols(2);
  const Mat k = kron(a, b);
  ASSERT_EQ(k.rows(), 6);
  ASSERT_EQ(k.cols(), 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 2; ++q) EXPECT_DOUBLE_EQ(k(3 * i + p, 2 * j + q), a(i, j) * b(p, q));
}

TEST(Linalg, PsdProjectionAgainstMinimizerProperties) {
  // The projection P of symmetric X onto the PSD cone satisfies P >= 0,
  // X - P <= 0 and <P, X - P> = 0.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat x = sym(oracle::random_matrix(6, rng));
    const Mat p = project_psd(x);
    const Mat d = x - p;
    EXPECT_GE(lambda_min(p), -1e-12);
    EXPECT_LE(lambda_max(d), 1e-12);
    EXPECT_NEAR((p.array() * d.array()).sum(), 0.0, 1e-10);
    // no random PSD matrix is closer
    for (int k = 0; k < 10; ++k) {
      const Mat y = oracle::random_spd(6, rng, 0.0);
      EXPECT_LE((x - p).norm(), (x - y).norm() + 1e-12);
    }
  }
}

TEST(Linalg, PsdProjectionOfDiagonal) {
  Mat x = Mat::Zero(3, 3);
  x.diagonal() << 2.0, -1.0, 0.5;
  Mat want = Mat::Zero(3, 3);
  want.diagonal() << 2.0, 0.0, 0.5;
  EXPECT_LE((project_psd(x) - want).norm(), 1e-14);
}

TEST(Linalg, NormsAndDefiniteness) {
  Mat x = Mat::Zero(2, 2);
  x.diagonal() << 3.0, -0.5;
  EXPECT_NEAR(spectral_norm(x), 3.0, 1e-14);
  EXPECT_NEAR(condition_number(x), 6.0, 1e-12);
  EXPECT_TRUE(std::isinf(condition_number(Mat::Zero(2, 2))));
  EXPECT_TRUE(negative_definite(-Mat::Identity(3, 3), 1e-9));
  EXPECT_FALSE(negative_definite(Mat::Zero(3, 3), 1e-9));
  EXPECT_TRUE(positive_definite(Mat::Identity(3, 3), 1e-9));
  EXPECT_THROW(require_square(Mat(2, 3), 2, "X"), DimensionError);
}

TEST(Linalg, BlockDiag) {
  const Mat b = block_diag(Mat::Ones(1, 1), 2.0 * Mat::Ones(2, 2));
  EXPECT_EQ(b.rows(), 3);
  EXPECT_DOUBLE_EQ(b(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(b(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(b(2, 1), 2.0);
}
