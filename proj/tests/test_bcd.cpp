#include <gtest/gtest.h>

#include <random>

#include "dhpair/bcd.hpp"
#include "dhpair/bench.hpp"
#include "dhpair/fgm.hpp"
#include "oracles.hpp"

using namespace dhpair;

TEST(UpdateQ, ExactFit) {
  const Mat I = Mat::Identity(3, 3), Z = Mat::Zero(3, 3);
  const QUpdate u = update_Q(I, -I, I, Z, I, 1.0);
  EXPECT_FALSE(u.regularized);
  EXPECT_LE((u.Q - I).norm(), 1e-14);
}

TEST(UpdateQ, DegenerateOperatorFallsBackToZero) {
  const Mat Z = Mat::Zero(3, 3);
  std::mt19937_64 rng(1);
  const QUpdate u = update_Q(oracle::random_matrix(3, rng), oracle::random_matrix(3, rng), Z, Z, Z, 1.0);
  EXPECT_TRUE(u.regularized);
  EXPECT_LE(u.Q.norm(), 1e-14);
}

TEST(UpdateQ, NormalEquationsHoldAndObjectiveDecreases) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const int n = 3 + t;
    const double mu = 0.5 + 0.25 * t;
    const Mat E = oracle::random_matrix(n, rng), A = oracle::random_matrix(n, rng);
    const Mat T = oracle::random_spd(n, rng), J = oracle::random_skew(n, rng), R = oracle::random_spd(n, rng);
    const QUpdate u = update_Q(E, A, T, J, R, mu);
    ASSERT_FALSE(u.regularized);
    const Mat N = J - R;
    const Mat resid = N.transpose() * (A - N * u.Q) + mu * T.transpose() * (E - T * u.Q);
    const double scale = 1.0 + A.squaredNorm() + mu * E.squaredNorm();
    EXPECT_LE(resid.norm(), 1e-8 * scale);
    const Mat Q0 = oracle::random_matrix(n, rng);
    const double before = objective(E, A, DhParam(T, J, R, Q0), mu);
    const double after = objective(E, A, DhParam(T, J, R, u.Q), mu);
    EXPECT_LE(after, before + 1e-10 * scale);
  }
}

TEST(Bcd, AdmissibleInputIsRecovered) {
  std::mt19937_64 rng(3);
  const int n = 5;
  // eigenvalues of modulus at most 0.6
  const Mat U = oracle::random_orthogonal(n, rng);
  Mat D = Mat::Zero(n, n);
  D.diagonal() << 0.5, -0.3, 0.1, 0.6, -0.55;
  const Mat A = U * D * U.transpose();
  BcdOptions o;
  o.max_time_s = 20.0;
  const SolveResult r = solve_general(Mat::Identity(n, n), A, schur_region(), o);
  EXPECT_TRUE(r.admissible);
  EXPECT_LE(r.relative_error, 1e-6);
}

TEST(Bcd, ShortSchurGrcarRun) {
  const MatrixPair g = grcar(10, 1);
  BcdOptions o;
  o.max_time_s = 5.0;
  const SolveResult r = solve_general(g.E, g.A, schur_region(), o);
  EXPECT_TRUE(r.admissible);
  EXPECT_TRUE(trace_non_increasing(r.trace));
  ASSERT_FALSE(r.trace.empty());
  EXPECT_LE(r.objective, r.trace.front().objective * (1.0 + 1e-9));
  // every finite eigenvalue inside the unit disk, checked independently
  const auto q = oracle::qz_spectrum(r.realized.E, r.realized.A);
  EXPECT_EQ(static_cast<int>(q.finite.size()), oracle::svd_rank(r.realized.E, 1e-10 * r.realized.E.norm()));
  for (const auto& z : q.finite) EXPECT_LE(std::abs(z), 1.0 + 1e-6);
  EXPECT_LT(r.relative_error, 0.35);
}

TEST(Bcd, FrozenEBaselineKeepsE) {
  std::mt19937_64 rng(4);
  const int n = 4;
  const Mat A = oracle::random_matrix(n, rng) + 2.0 * Mat::Identity(n, n);
  const SolveResult r = solve_frozen_E(Mat::Identity(n, n), A, hurwitz_region());
  EXPECT_LE((r.realized.E - Mat::Identity(n, n)).norm(), 1e-12);
  EXPECT_EQ(r.param.Q(), Mat::Identity(n, n));
  EXPECT_TRUE(r.admissible);
}

TEST(Bcd, AgreesWithFgmOnMassSpringDamper) {
  const auto m = msd(10, 0.05);
  FgmOptions fo;
  fo.max_time_s = 20.0;
  const SolveResult f = solve_hurwitz(m.pair.E, m.pair.A, fo);
  BcdOptions bo;
  bo.max_time_s = 60.0;
  const SolveResult b = solve_general(m.pair.E, m.pair.A, hurwitz_region(), bo);
  EXPECT_TRUE(f.admissible);
  EXPECT_TRUE(b.admissible);
  EXPECT_TRUE(trace_non_increasing(b.trace));
  EXPECT_LE(std::abs(b.objective - f.objective), 0.05 * std::min(b.objective, f.objective))
      << "bcd " << b.objective << " fgm " << f.objective;
}

TEST(Bcd, RejectsBadInput) {
  const Mat I = Mat::Identity(2, 2);
  BcdOptions o;
  o.mu = 0.0;
  EXPECT_THROW(solve_general(I, -I, schur_region(), o), Error);
  const LmiRegion empty = intersect(LmiRegion::from_primitive(RegionPrimitive::left_half_plane(-1.0)),
                                    LmiRegion::from_primitive(RegionPrimitive::right_half_plane(1.0)));
  EXPECT_THROW(solve_general(I, -I, empty), InfeasibleRegionError);
}
