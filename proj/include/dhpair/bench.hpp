#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "dhpair/bcd.hpp"
#include "dhpair/dh.hpp"
#include "dhpair/fgm.hpp"
#include "dhpair/pencil.hpp"
#include "dhpair/region.hpp"
#include "dhpair/result.hpp"

namespace dhpair {

// Tridiagonal Toeplitz with -1 on the subdiagonal and 1 on the main and the
// first k superdiagonals; E = I.
inline MatrixPair grcar(int n, int k) {
  if (n < 1 || k < 1 || k >= n) throw Error("grcar requires 1 <= k < n");
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) A(i, i - 1) = -1.0;
    for (int j = i; j <= std::min(n - 1, i + k); ++j) A(i, j) = 1.0;
  }
  return {Mat::Identity(n, n), A};
}

struct MsdInstance {
  MatrixPair pair;
  DhParam structure;  // (T, J, R, Q) with E = TQ, A = (J - R)Q
};

// Mass-spring-damper pair of size 2n with M = I, K = tridiag(-1, 2, -1),
// D = 0.02 (I + K), and the dissipation block of the positions replaced by -eps I.
inline MsdInstance msd(int n, double eps) {
  if (n < 1 || eps < 0.0) throw Error("msd requires n >= 1 and eps >= 0");
  const Mat I = Mat::Identity(n, n), Z = Mat::Zero(n, n);
  Mat K = 2.0 * I;
  for (int i = 0; i + 1 < n; ++i) K(i, i + 1) = K(i + 1, i) = -1.0;
  const Mat M = I;
  const Mat D = 0.02 * (I + K);
  Mat E(2 * n, 2 * n), J(2 * n, 2 * n), R(2 * n, 2 * n), Q(2 * n, 2 * n);
  E << M, Z, Z, I;
  J << Z, -I, I, Z;
  R << D, Z, Z, -eps * I;
  Q << I, Z, Z, K;
  // E = TQ with T = E Q^{-1}
  const Mat T = E * Q.inverse();
  return {MatrixPair(E, (J - R) * Q), DhParam(T, J, R, Q)};
}

inline Mat gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

inline Mat random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  const Mat g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  // fix signs so the factor is a deterministic function of g
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  return q;
}

struct NearSchurInstance {
  MatrixPair pair;
  Mat U;  // orthogonal part
};

// A = U + eps N sqrt(n) / ||N||_F with U orthogonal and N Gaussian; E = I.
inline NearSchurInstance near_schur(int n, double eps, std::uint64_t seed) {
  if (n < 1) throw Error("near_schur requires n >= 1");
  std::mt19937_64 rng(seed);
  const Mat U = random_orthogonal(n, rng);
  const Mat N = gaussian_matrix(n, n, rng);
  const Mat A = U + eps * N * std::sqrt(static_cast<double>(n)) / N.norm();
  return {MatrixPair(Mat::Identity(n, n), A), U};
}

// Sample a point uniformly from the part of the region inside a bounding box
// by rejection, with a margin so that it lies strictly inside.
inline Complex sample_region_point(const LmiRegion& region, double box_re_lo, double box_re_hi,
                                   double box_im, std::mt19937_64& rng, bool real_only,
                                   double margin = 1e-3) {
  std::uniform_real_distribution<double> ur(box_re_lo, box_re_hi), ui(-box_im, box_im);
  for (int t = 0; t < 100000; ++t) {
    const Complex z(ur(rng), real_only ? 0.0 : ui(rng));
    if (region.membership(z).margin > margin) return z;
  }
  throw Error("could not sample a point in the region");
}

// E = I and A = U D U^T + eps G with D real block diagonal carrying eigenvalues
// sampled in the region (conjugate pairs as 2x2 blocks), U orthogonal, G Gaussian.
inline MatrixPair noisy_region_instance(const LmiRegion& region, int n, double eps,
                                        std::uint64_t seed, double box = 10.0) {
  std::mt19937_64 rng(seed);
  const RealSlice slice = region.real_slice();
  if (slice.empty) throw InfeasibleRegionError("infeasible region: empty");
  const double lo = std::max(slice.lo, -box), hi = std::min(slice.hi, box);
  Mat D = Mat::Zero(n, n);
  int i = 0;
  while (i < n) {
    const bool real = (i == n - 1) || std::bernoulli_distribution(0.3)(rng);
    const Complex z = sample_region_point(region, lo, hi, box, rng, real);
    if (real || std::abs(z.imag()) < 1e-12) {
      D(i, i) = z.real();
      ++i;
    } else {
      D(i, i) = D(i + 1, i + 1) = z.real();
      D(i, i + 1) = z.imag();
      D(i + 1, i) = -z.imag();
      i += 2;
    }
  }
  const Mat U = random_orthogonal(n, rng);
  const Mat G = gaussian_matrix(n, n, rng);
  return {Mat::Identity(n, n), U * D * U.transpose() + eps * G};
}

// Intersection of the strips |Re z| < 5, |Im z| < 3 with the parabolas
// Re z < 6 - y^2/2 and Re z > -6 + y^2/2.
inline LmiRegion composite_example_region() {
  return intersect_all({RegionPrimitive::vertical_strip(-5.0, 5.0),
                        RegionPrimitive::horizontal_strip(3.0),
                        RegionPrimitive::left_parabola(6.0, 1.0),
                        RegionPrimitive::right_parabola(-6.0, 1.0)});
}

enum class Algorithm { fgm, bcd, bcd_frozen_E, automatic };

inline std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::fgm: return "fgm";
    case Algorithm::bcd: return "bcd";
    case Algorithm::bcd_frozen_E: return "bcd-frozen-E";
    case Algorithm::automatic: return "auto";
  }
  return "?";
}

inline Algorithm algorithm_from_name(const std::string& s) {
  if (s == "fgm") return Algorithm::fgm;
  if (s == "bcd") return Algorithm::bcd;
  if (s == "bcd-frozen-E") return Algorithm::bcd_frozen_E;
  if (s == "auto") return Algorithm::automatic;
  throw Error("unknown algorithm '" + s + "'");
}

inline Algorithm resolve_algorithm(Algorithm a, const LmiRegion& region) {
  if (a != Algorithm::automatic) return a;
  return region.is_hurwitz() ? Algorithm::fgm : Algorithm::bcd;
}

// Runs one solve; fgm requires the Hurwitz region.
inline SolveResult run_solver(const MatrixPair& p, const LmiRegion& region, Algorithm algo,
                              double mu, double time_s) {
  switch (resolve_algorithm(algo, region)) {
    case Algorithm::fgm: {
      if (!region.is_hurwitz()) throw Error("fgm requires the Hurwitz region");
      FgmOptions o;
      o.mu = mu;
      o.max_time_s = time_s;
      return solve_hurwitz(p.E, p.A, o);
    }
    case Algorithm::bcd_frozen_E: {
      BcdOptions o;
      o.mu = mu;
      o.max_time_s = time_s;
      return solve_frozen_E(p.E, p.A, region, o);
    }
    default: {
      BcdOptions o;
      o.mu = mu;
      o.max_time_s = time_s;
      return solve_general(p.E, p.A, region, o);
    }
  }
}

struct BenchInstance {
  std::string name;
  std::string generator;  // grcar, msd, near_schur, noisy_composite
  std::vector<double> params;
  std::uint64_t seed = 0;
  MatrixPair pair;
  LmiRegion region;
  std::string region_name;
  Algorithm algorithm = Algorithm::automatic;
  double time_budget_s = 30.0;
  double mu = 1.0;
};

inline BenchInstance grcar_instance(int n, int k, const LmiRegion& region, std::string region_name,
                                    Algorithm algo, double budget) {
  return {"Grcar(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")",
          "grcar", {double(n), double(k)}, 0, grcar(n, k), region, std::move(region_name),
          algo, budget, 1.0};
}

inline BenchInstance msd_instance(int n, double eps, Algorithm algo, double budget) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "MSD(n=%d,eps=%g)", n, eps);
  return {buf, "msd", {double(n), eps}, 0, msd(n, eps).pair, hurwitz_region(), "hurwitz",
          algo, budget, 1.0};
}

inline BenchInstance near_schur_instance(int n, double eps, std::uint64_t seed, Algorithm algo,
                                         double budget) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "NearSchur(n=%d,eps=%g)", n, eps);
  return {buf, "near_schur", {double(n), eps}, seed, near_schur(n, eps, seed).pair,
          schur_region(), "schur", algo, budget, 1.0};
}

struct BenchRow {
  std::string instance;
  std::string region;
  std::string algorithm;
  std::uint64_t seed = 0;
  double relative_error_pct = 0.0;
  double objective = 0.0;
  double time_s = 0.0;
  int iterations = 0;
  bool admissible = false;
  bool trace_monotone = false;
  std::string error;  // non-empty if the run failed
  std::vector<TracePoint> trace;
};

struct RunTableOptions {
  unsigned workers = 0;  // 0: hardware concurrency
  // Called with each finished row (from the worker thread, serialized).
  std::function<void(const BenchRow&)> on_row;
};

// Runs every instance under its budget on a worker pool; rows keep input order.
inline std::vector<BenchRow> run_table(const std::vector<BenchInstance>& spec,
                                       const RunTableOptions& opts = {}) {
  std::vector<BenchRow> rows(spec.size());
  if (spec.empty()) return rows;
  unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(spec.size()));
  std::atomic<std::size_t> next{0};
  std::mutex cb_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < spec.size(); i = next++) {
      const BenchInstance& in = spec[i];
      BenchRow row;
      row.instance = in.name;
      row.region = in.region_name;
      row.algorithm = algorithm_name(resolve_algorithm(in.algorithm, in.region));
      row.seed = in.seed;
      try {
        const SolveResult r = run_solver(in.pair, in.region, in.algorithm, in.mu, in.time_budget_s);
        row.relative_error_pct = 100.0 * r.relative_error;
        row.objective = r.objective;
        row.time_s = r.elapsed_s;
        row.iterations = r.iterations;
        row.admissible = r.admissible;
        row.trace = r.trace;
        row.trace_monotone = trace_non_increasing(r.trace);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows[i] = row;
      if (opts.on_row) {
        std::lock_guard<std::mutex> lock(cb_mutex);
        opts.on_row(rows[i]);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

inline void write_table_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "instance,region,algorithm,seed,relative_error_pct,objective,time_s,iterations,admissible,"
        "trace_monotone,error\n";
  os.precision(12);
  for (const auto& r : rows)
    os << '"' << r.instance << "\"," << r.region << ',' << r.algorithm << ',' << r.seed << ','
       << r.relative_error_pct << ',' << r.objective << ',' << r.time_s << ',' << r.iterations
       << ',' << (r.admissible ? 1 : 0) << ',' << (r.trace_monotone ? 1 : 0) << ",\"" << r.error
       << "\"\n";
}

struct PlotPoint {
  double re;
  double im;
};

struct RegionPlotData {
  std::vector<PlotPoint> boundary;
  std::vector<std::vector<PlotPoint>> eigenvalues;  // one list per pair
};

struct PlotGrid {
  double re_lo = -6.0, re_hi = 6.0;
  double im_lo = -4.0, im_hi = 4.0;
  int n_re = 121, n_im = 81;
};

// Boundary points: sign changes of lambda_max(f(z)) between neighbouring grid
// nodes, refined by bisection to 1e-6. Eigenvalues: finite spectrum per pair.
inline RegionPlotData region_plot_data(const LmiRegion& region, const std::vector<MatrixPair>& pairs,
                                       const PlotGrid& grid = {}) {
  RegionPlotData out;
  auto g = [&](double x, double y) { return region.lambda_max_at(Complex(x, y)); };
  auto refine = [&](double x0, double y0, double x1, double y1) {
    double a = 0.0, b = 1.0;
    const double ga = g(x0, y0);
    while ((b - a) * std::hypot(x1 - x0, y1 - y0) > 1e-7) {
      const double m = 0.5 * (a + b);
      const double gm = g(x0 + m * (x1 - x0), y0 + m * (y1 - y0));
      if ((gm < 0.0) == (ga < 0.0))
        a = m;
      else
        b = m;
    }
    const double m = 0.5 * (a + b);
    out.boundary.push_back({x0 + m * (x1 - x0), y0 + m * (y1 - y0)});
  };
  const double dx = (grid.re_hi - grid.re_lo) / std::max(grid.n_re - 1, 1);
  const double dy = (grid.im_hi - grid.im_lo) / std::max(grid.n_im - 1, 1);
  std::vector<double> vals(static_cast<std::size_t>(grid.n_re) * grid.n_im);
  auto at = [&](int i, int j) -> double& { return vals[static_cast<std::size_t>(i) * grid.n_im + j]; };
  for (int i = 0; i < grid.n_re; ++i)
    for (int j = 0; j < grid.n_im; ++j) at(i, j) = g(grid.re_lo + i * dx, grid.im_lo + j * dy);
  for (int i = 0; i < grid.n_re; ++i)
    for (int j = 0; j < grid.n_im; ++j) {
      const double x = grid.re_lo + i * dx, y = grid.im_lo + j * dy;
      if (i + 1 < grid.n_re && (at(i, j) < 0.0) != (at(i + 1, j) < 0.0)) refine(x, y, x + dx, y);
      if (j + 1 < grid.n_im && (at(i, j) < 0.0) != (at(i, j + 1) < 0.0)) refine(x, y, x, y + dy);
    }
  for (const auto& p : pairs) {
    std::vector<PlotPoint> ev;
    for (const auto& fe : spectrum(p).finite_eigenvalues) ev.push_back({fe.lambda.real(), fe.lambda.imag()});
    out.eigenvalues.push_back(std::move(ev));
  }
  return out;
}

inline void write_points_csv(std::ostream& os, const std::vector<PlotPoint>& pts) {
  os << "re,im\n";
  os.precision(12);
  for (const auto& p : pts) os << p.re << ',' << p.im << '\n';
}

}  // namespace dhpair
