#include <gtest/gtest.h>

#include <random>

#include "dhpair/dh.hpp"
#include "dhpair/sdp.hpp"
#include "oracles.hpp"

using namespace dhpair;

namespace {

// Eigenvalue clipping computed independently of the library's projection.
Mat clip_oracle(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()));
  Mat out = Mat::Zero(g.rows(), g.cols());
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l > 0.0) out += l * es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
  }
  return out;
}

ConvexSubproblem make(const Mat& E, const Mat& A, std::optional<LmiRegion> region, bool r_psd) {
  ConvexSubproblem sp;
  sp.E = E;
  sp.A = A;
  sp.Q = Mat::Identity(E.rows(), E.rows());
  sp.region = std::move(region);
  sp.require_R_psd = r_psd;
  return sp;
}

}  // namespace

TEST(Subproblem, AlreadyRealizedHurwitzPair) {
  const Mat I = Mat::Identity(2, 2);
  const SubproblemSolution s = solve_subproblem(make(I, -I, hurwitz_region(), true));
  EXPECT_TRUE(s.converged);
  EXPECT_LE(s.objective, 1e-6);
  EXPECT_LE((s.T - I).norm(), 1e-3);
  EXPECT_LE(s.J.norm(), 1e-3);
  EXPECT_LE((s.R - I).norm(), 1e-3);
}

TEST(Subproblem, ProjectionOfSymmetricMatrix) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 3 + trial;
    const Mat G = sym(oracle::random_matrix(n, rng));
    const SubproblemSolution s = solve_subproblem(make(G, Mat::Zero(n, n), std::nullopt, false));
    EXPECT_LE((s.T - clip_oracle(G)).norm(), 1e-6) << "n = " << n;
    EXPECT_LE(s.J.norm(), 1e-6);
    EXPECT_LE(s.R.norm(), 1e-6);
  }
}

TEST(Subproblem, ClosedFormWithoutRegion) {
  std::mt19937_64 rng(2);
  const int n = 4;
  const Mat E = oracle::random_matrix(n, rng), A = oracle::random_matrix(n, rng);
  const SubproblemSolution s = solve_subproblem(make(E, A, std::nullopt, true));
  EXPECT_LE((s.T - clip_oracle(E)).norm(), 1e-6);
  EXPECT_LE((s.J - 0.5 * (A - A.transpose())).norm(), 1e-6);
  EXPECT_LE((s.R - clip_oracle(-A)).norm(), 1e-6);
}

TEST(Subproblem, MarginsKktAndMonotoneOuterObjectives) {
  std::mt19937_64 rng(3);
  const int n = 4;
  const Mat E = oracle::random_matrix(n, rng), A = oracle::random_matrix(n, rng);
  const LmiRegion disk = LmiRegion::from_primitive(RegionPrimitive::disk(-0.5, 1.0));
  const ConvexSubproblem sp = make(E, A, disk, true);
  const SubproblemSolution s = solve_subproblem(sp);
  EXPECT_TRUE(s.converged);
  ASSERT_EQ(s.margins.size(), 3u);
  for (double m : s.margins) EXPECT_GE(m, 0.0);
  // default accuracy is relative to the objective at the default start
  const TJR x0 = initial_point(sp);
  const double scale = 1.0 + subproblem_objective(sp, x0.T, x0.J, x0.R);
  EXPECT_LE(s.kkt_residual, 1e-8 * scale);
  EXPECT_LE(s.gap, 1e-8 * scale);
  for (std::size_t i = 1; i < s.outer_objectives.size(); ++i)
    EXPECT_LE(s.outer_objectives[i], s.outer_objectives[i - 1] * (1.0 + 1e-9) + 1e-12);
  // the returned point satisfies the region LMI with the strictness margin
  EXPECT_LE(lambda_max(assemble_M_hat(disk, s.T, s.J, s.R)), -sp.effective_delta() + 1e-12);
  EXPECT_NEAR(s.objective, subproblem_objective(sp, s.T, s.J, s.R), 1e-12 * scale);
}

TEST(Subproblem, NoWorseThanGridOnTwoByTwoDisk) {
  std::mt19937_64 rng(4);
  const Mat E = oracle::random_matrix(2, rng), A = oracle::random_matrix(2, rng);
  const LmiRegion disk = schur_region();
  const ConvexSubproblem sp = make(E, A, disk, false);
  const SubproblemSolution s = solve_subproblem(sp);
  const Mat I = Mat::Identity(2, 2);
  Mat Jb(2, 2);
  Jb << 0, 1, -1, 0;
  double best = 1e300;
  const int N = 60;
  for (int a = 0; a <= N; ++a)
    for (int b = 0; b <= N; ++b)
      for (int c = 0; c <= N; ++c) {
        const double t = 3.0 * a / N, j = -3.0 + 6.0 * b / N, r = -3.0 + 6.0 * c / N;
        const Mat T = t * I, J = j * Jb, R = r * I;
        if (lambda_max(assemble_M_hat(disk, T, J, R)) > -sp.effective_delta()) continue;
        best = std::min(best, subproblem_objective(sp, T, J, R));
      }
  ASSERT_LT(best, 1e300);
  EXPECT_LE(s.objective, best + 1e-4);
}

TEST(Subproblem, OrthogonalInvariance) {
  std::mt19937_64 rng(5);
  const int n = 4;
  const Mat E = oracle::random_matrix(n, rng), A = oracle::random_matrix(n, rng);
  const Mat Q = oracle::random_matrix(n, rng) + 3.0 * Mat::Identity(n, n);
  const Mat U = oracle::random_orthogonal(n, rng);
  const LmiRegion reg = LmiRegion::from_primitive(RegionPrimitive::left_conic_sector(-0.2, 0.8));
  ConvexSubproblem sp = make(E, A, reg, true);
  sp.Q = Q;
  sp.delta_lmi = 1e-6;
  ConvexSubproblem rot = sp;
  rot.E = U * E * U.transpose();
  rot.A = U * A * U.transpose();
  rot.Q = U * Q * U.transpose();
  const SubproblemSolution s = solve_subproblem(sp), r = solve_subproblem(rot);
  EXPECT_NEAR(s.objective, r.objective, 1e-6 * (1.0 + s.objective));
  EXPECT_LE((U * s.T * U.transpose() - r.T).norm(), 1e-4);
  EXPECT_LE((U * s.R * U.transpose() - r.R).norm(), 1e-4);
}

TEST(InitialPoint, Examples) {
  const int n = 3;
  const Mat I = Mat::Identity(n, n), Z = Mat::Zero(n, n);
  const TJR h = initial_point(make(I, Z, hurwitz_region(), true));
  EXPECT_LE((h.T - I).norm(), 0.0);
  EXPECT_LE((h.R - I).norm(), 0.0);
  EXPECT_GE(-lambda_max(assemble_M_hat(hurwitz_region(), h.T, h.J, h.R)), 1.0);

  const TJR d = initial_point(make(I, Z, schur_region(), false));
  EXPECT_LE(d.R.norm(), 1e-12);
  EXPECT_GT(lambda_min(stability_lmi_blocks(RegionPrimitive::disk(0.0, 1.0), d.T, d.J, d.R)), 0.5);

  const auto strip = RegionPrimitive::vertical_strip(-3.0, -1.0);
  const TJR v = initial_point(make(I, Z, LmiRegion::from_primitive(strip), true));
  EXPECT_LE((v.R - 2.0 * I).norm(), 1e-12);
  EXPECT_GT(lambda_min(stability_lmi_blocks(strip, v.T, v.J, v.R)), 0.5);
}

TEST(InitialPoint, EmptyRegionIsInfeasible) {
  const LmiRegion empty = intersect(LmiRegion::from_primitive(RegionPrimitive::left_half_plane(-1.0)),
                                    LmiRegion::from_primitive(RegionPrimitive::right_half_plane(1.0)));
  const Mat I = Mat::Identity(2, 2);
  try {
    solve_subproblem(make(I, -I, empty, true));
    FAIL() << "expected an infeasibility error";
  } catch (const InfeasibleRegionError& e) {
    EXPECT_NE(std::string(e.what()).find("infeasible region"), std::string::npos);
  }
  // R >= 0 cannot hold in a right half-plane region
  EXPECT_THROW(initial_point(make(I, I, LmiRegion::from_primitive(RegionPrimitive::right_half_plane(1.0)), true)),
               InfeasibleRegionError);
}

TEST(Subproblem, FixedTIsRespected) {
  std::mt19937_64 rng(6);
  const int n = 3;
  const Mat E = oracle::random_matrix(n, rng), A = oracle::random_matrix(n, rng);
  ConvexSubproblem sp = make(E, A, hurwitz_region(), true);
  sp.fixed_T = Mat::Identity(n, n);
  const SubproblemSolution s = solve_subproblem(sp);
  EXPECT_EQ(s.T, Mat::Identity(n, n));
  EXPECT_EQ(s.margins.size(), 2u);  // no T block
  EXPECT_LE((s.J - 0.5 * (A - A.transpose())).norm(), 1e-5);
}

TEST(Subproblem, WarmStartReachesSameOptimum) {
  std::mt19937_64 rng(7);
  const int n = 4;
  const Mat E = oracle::random_matrix(n, rng), A = oracle::random_matrix(n, rng);
  const ConvexSubproblem sp = make(E, A, schur_region(), false);
  const SubproblemSolution cold = solve_subproblem(sp);
  const SubproblemSolution warm = solve_subproblem(sp, TJR{cold.T, cold.J, cold.R});
  EXPECT_NEAR(cold.objective, warm.objective, 1e-6 * (1.0 + cold.objective));
  // an infeasible warm start falls back to the default start
  const Mat big = 10.0 * Mat::Identity(n, n);
  const SubproblemSolution fallback = solve_subproblem(sp, TJR{big, Mat::Zero(n, n), -big});
  EXPECT_NEAR(cold.objective, fallback.objective, 1e-6 * (1.0 + cold.objective));
}
