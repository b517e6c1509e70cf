#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dhpair/dhpair.hpp"

namespace fs = std::filesystem;
using namespace dhpair;

namespace {

enum Exit { kOk = 0, kUsage = 1, kFlagged = 2, kCheckFailed = 3 };

std::string g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string g12(Complex z) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.12g%+.12gi", z.real(), z.imag());
  return buf;
}

struct Common {
  std::string pair_path;
  std::string region_path;
  std::string out;
  double tol_margin = LmiRegion::kDefaultMarginTol;
  double tol_beta = 1e-8;
  double tol_rank = -1.0;
  int verbosity = 0;
};

void print_report(const AdmissibilityVerdict& v, const LmiRegion& region, double tol_margin) {
  const SpectrumReport& r = v.report;
  std::cout << "regular: " << (r.is_regular ? "yes" : "no") << "\n"
            << "rank(E): " << r.rank_E << " (rank_tol " << g12(r.rank_tol) << ")\n"
            << "finite eigenvalues: " << r.num_finite() << ", infinite: " << r.num_infinite
            << " (beta_tol " << g12(r.beta_tol) << ")\n"
            << "impulse-free: " << (r.is_impulse_free ? "yes" : "no") << "\n";
  for (const auto& fe : r.finite_eigenvalues) {
    const MembershipResult m = region.membership(fe.lambda, tol_margin);
    const char* st = m.status == Membership::inside    ? "inside"
                     : m.status == Membership::outside ? "outside"
                                                       : "boundary";
    std::cout << "  lambda " << g12(fe.lambda) << "  margin " << g12(m.margin) << "  " << st
              << "\n";
  }
  std::cout << "admissible: " << (v.admissible ? "yes" : "no") << "\n";
  for (const auto& reason : v.reasons) std::cout << "  reason: " << reason << "\n";
}

int cmd_check(const Common& c) {
  const MatrixPair p = io::load_pair(c.pair_path);
  const LmiRegion region = io::load_region(c.region_path);
  SpectrumOptions so;
  so.beta_tol = c.tol_beta;
  so.rank_tol = c.tol_rank;
  const AdmissibilityVerdict v = admissibility_check(p, region, c.tol_margin, so);
  std::cout << "region: " << region.describe() << "\n";
  print_report(v, region, c.tol_margin);
  return v.admissible ? kOk : kCheckFailed;
}

int cmd_solve(const Common& c, const std::string& algo_name, double mu, double time_s,
              const std::string& trace_path) {
  const MatrixPair p = io::load_pair(c.pair_path);
  const LmiRegion region = io::load_region(c.region_path);
  const Algorithm algo = resolve_algorithm(algorithm_from_name(algo_name), region);
  if (algo == Algorithm::fgm && !region.is_hurwitz())
    throw io::IoError("--algo fgm requires the Hurwitz region");
  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!trace_path.empty()) {
    const fs::path parent = fs::path(trace_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    trace_file.open(trace_path);
    if (!trace_file) throw io::IoError("cannot write '" + trace_path + "'");
    trace_file.precision(12);
    trace = &trace_file;
  }
  SolveResult r;
  if (algo == Algorithm::fgm) {
    FgmOptions o;
    o.mu = mu;
    o.max_time_s = time_s;
    o.trace = trace;
    r = solve_hurwitz(p.E, p.A, o);
  } else {
    BcdOptions o;
    o.mu = mu;
    o.max_time_s = time_s;
    o.trace = trace;
    o.freeze_E = algo == Algorithm::bcd_frozen_E;
    r = solve_general(p.E, p.A, region, o);
  }
  std::cout << "algorithm: " << r.algorithm << "\n"
            << "relative error: " << g12(r.relative_error) << "\n"
            << "objective: " << g12(r.objective) << "\n"
            << "iterations: " << r.iterations << "\n"
            << "time_s: " << g12(r.elapsed_s) << "\n"
            << "admissible: " << (r.admissible ? "yes" : "no") << "\n";
  if (r.delta_shift > 0.0) std::cout << "dissipation shift: " << g12(r.delta_shift) << "\n";
  for (const auto& d : r.diagnostics) std::cout << "  note: " << d << "\n";
  if (!c.out.empty()) {
    const fs::path out(c.out);
    fs::create_directories(out);
    io::write_file((out / "result.json").string(), io::result_to_json(r, trace_path).dump(2) + "\n");
    io::write_file((out / "pair.json").string(), io::pair_to_json(r.realized).dump(2) + "\n");
    io::write_file((out / "dh.json").string(), io::dh_to_json(r.param).dump(2) + "\n");
    std::cout << "wrote " << (out / "result.json").string() << "\n";
  }
  return r.admissible ? kOk : kFlagged;
}

int cmd_region_info(const Common& c, const std::vector<double>& point) {
  const LmiRegion region = io::load_region(c.region_path);
  std::cout << "region: " << region.describe() << "\n"
            << "LMI size: " << region.size() << "\n";
  const RealSlice s = region.real_slice();
  if (s.empty) {
    std::cout << "empty: yes (infeasible region)\n";
    return kOk;
  }
  std::cout << "empty: no\n"
            << "real-axis slice: (" << g12(s.lo) << ", " << g12(s.hi) << ")\n"
            << "closed left half-plane: " << (region.in_closed_left_half_plane() ? "yes" : "no")
            << "\n"
            << "uniform part nonempty: " << (region.uniform_part_nonempty() ? "yes" : "no") << "\n";
  if (c.verbosity > 0) {
    std::cout << "B =\n" << region.B() << "\nC =\n" << region.C() << "\n";
  }
  if (point.size() == 2) {
    const MembershipResult m = region.membership(Complex(point[0], point[1]), c.tol_margin);
    std::cout << "point " << g12(Complex(point[0], point[1])) << ": margin " << g12(m.margin)
              << (m.status == Membership::inside ? " inside" : m.status == Membership::outside ? " outside" : " boundary")
              << "\n";
  }
  return kOk;
}

int cmd_plot_data(const Common& c, const std::vector<std::string>& pairs, const std::vector<double>& box,
                  int resolution) {
  const LmiRegion region = io::load_region(c.region_path);
  std::vector<MatrixPair> ps;
  for (const auto& path : pairs) ps.push_back(io::load_pair(path));
  PlotGrid grid;
  if (box.size() == 4) {
    grid.re_lo = box[0];
    grid.re_hi = box[1];
    grid.im_lo = box[2];
    grid.im_hi = box[3];
  }
  grid.n_re = grid.n_im = resolution;
  const RegionPlotData data = region_plot_data(region, ps, grid);
  const fs::path out(c.out.empty() ? "plot" : c.out);
  fs::create_directories(out);
  {
    std::ofstream f(out / "boundary.csv");
    write_points_csv(f, data.boundary);
  }
  for (std::size_t i = 0; i < data.eigenvalues.size(); ++i) {
    std::ofstream f(out / ("eigenvalues_" + std::to_string(i) + ".csv"));
    write_points_csv(f, data.eigenvalues[i]);
  }
  std::cout << "boundary points: " << data.boundary.size() << "\n"
            << "wrote " << out.string() << "\n";
  return kOk;
}

std::vector<BenchInstance> bench_suite(const std::string& suite, double time_s, int n,
                                       std::uint64_t seed) {
  std::vector<BenchInstance> spec;
  const bool all = suite == "all";
  if (all || suite == "hurwitz")
    for (int k = 1; k <= 3; ++k)
      spec.push_back(grcar_instance(n, k, hurwitz_region(), "hurwitz", Algorithm::fgm, time_s));
  if (all || suite == "msd")
    for (double eps : {0.01, 0.05, 0.1}) spec.push_back(msd_instance(n, eps, Algorithm::fgm, time_s));
  if (all || suite == "schur") {
    for (int k = 1; k <= 3; ++k)
      spec.push_back(grcar_instance(n, k, schur_region(), "schur", Algorithm::bcd, time_s));
    for (double eps : {0.01, 0.1, 1.0})
      spec.push_back(near_schur_instance(n, eps, seed, Algorithm::bcd, time_s));
  }
  if (all || suite == "composite") {
    const LmiRegion reg = composite_example_region();
    const MatrixPair p = noisy_region_instance(reg, n, 1.0, seed);
    for (Algorithm a : {Algorithm::bcd, Algorithm::bcd_frozen_E})
      spec.push_back({"Noisy(n=" + std::to_string(n) + ",eps=1)", "noisy_composite",
                      {double(n), 1.0}, seed, p, reg, "composite", a, time_s, 1.0});
  }
  if (spec.empty() && suite != "none") throw io::IoError("unknown suite '" + suite + "'");
  return spec;
}

std::string file_stem(const BenchRow& r) {
  std::string s = r.instance + "_" + r.region + "_" + r.algorithm;
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  return s;
}

int cmd_bench(const std::string& suite, double time_s, int n, std::uint64_t seed, unsigned workers,
              const std::string& out_dir) {
  const auto spec = bench_suite(suite, time_s, n, seed);
  RunTableOptions opts;
  opts.workers = workers;
  opts.on_row = [](const BenchRow& r) {
    std::cout << r.instance << " [" << r.region << ", " << r.algorithm << "] ";
    if (!r.error.empty())
      std::cout << "failed: " << r.error << "\n";
    else
      std::cout << "rel.err " << g12(r.relative_error_pct) << "%  time " << g12(r.time_s) << " s"
                << (r.admissible ? "" : "  NOT ADMISSIBLE") << "\n";
    std::cout.flush();
  };
  const auto rows = run_table(spec, opts);
  const fs::path out(out_dir.empty() ? "bench_out" : out_dir);
  fs::create_directories(out / "traces");
  {
    std::ofstream f(out / "results.csv");
    write_table_csv(f, rows);
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"instance", r.instance},
                   {"region", r.region},
                   {"algorithm", r.algorithm},
                   {"seed", r.seed},
                   {"relative_error_pct", r.relative_error_pct},
                   {"objective", r.objective},
                   {"time_s", r.time_s},
                   {"iterations", r.iterations},
                   {"admissible", r.admissible},
                   {"trace_monotone", r.trace_monotone},
                   {"error", r.error}});
    std::ofstream f(out / "traces" / (file_stem(r) + ".csv"));
    write_trace_csv(f, r.trace);
  }
  io::write_file((out / "results.json").string(), arr.dump(2) + "\n");
  std::cout << "wrote " << (out / "results.csv").string() << "\n";
  bool ok = true;
  for (const auto& r : rows) ok = ok && r.error.empty() && r.admissible;
  return ok ? kOk : kFlagged;
}

int cmd_generate(const std::string& kind, int n, int k, double eps, std::uint64_t seed,
                 const std::string& region_path, const std::string& out) {
  MatrixPair p;
  if (kind == "grcar")
    p = grcar(n, k);
  else if (kind == "msd")
    p = msd(n, eps).pair;
  else if (kind == "near_schur")
    p = near_schur(n, eps, seed).pair;
  else if (kind == "noisy") {
    const LmiRegion reg = region_path.empty() ? composite_example_region() : io::load_region(region_path);
    p = noisy_region_instance(reg, n, eps, seed);
  } else {
    throw io::IoError("unknown generator '" + kind + "'");
  }
  const std::string text = io::pair_to_json(p).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    io::write_file(out, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearest Omega-admissible matrix pairs via the DH parametrization"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool pair, bool region) {
    if (pair) sub->add_option("--pair", c.pair_path, "pair file (.json or .csv)")->required();
    if (region) sub->add_option("--region", c.region_path, "region JSON file")->required();
    sub->add_option("--tol-margin", c.tol_margin, "membership margin tolerance");
    sub->add_option("--tol-beta", c.tol_beta, "infinite-eigenvalue threshold on |beta|");
    sub->add_option("--tol-rank", c.tol_rank, "rank tolerance for E (negative: default)");
    sub->add_flag("-v,--verbose", c.verbosity, "more output");
  };

  std::string algo = "auto", trace_path;
  double mu = 1.0, time_s = 30.0;
  std::uint64_t seed = 2017;
  auto* solve = app.add_subcommand("solve", "find the nearest admissible pair");
  add_common(solve, true, true);
  solve->add_option("--algo", algo, "fgm, bcd, bcd-frozen-E or auto")
      ->check(CLI::IsMember({"fgm", "bcd", "bcd-frozen-E", "auto"}));
  solve->add_option("--mu", mu, "weight of the E residual")->check(CLI::PositiveNumber);
  solve->add_option("--time", time_s, "time budget in seconds")->check(CLI::PositiveNumber);
  solve->add_option("--seed", seed, "seed (recorded; solvers are deterministic)");
  solve->add_option("--out", c.out, "output directory");
  solve->add_option("--trace", trace_path, "trace CSV path");

  auto* check = app.add_subcommand("check", "admissibility report for a pair");
  add_common(check, true, true);

  std::string suite = "hurwitz", bench_out;
  int bench_n = 10;
  unsigned workers = 0;
  double bench_time = 30.0;
  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  bench->add_option("--suite", suite, "hurwitz, msd, schur, composite, all or none")
      ->check(CLI::IsMember({"hurwitz", "msd", "schur", "composite", "all", "none"}));
  bench->add_option("--time", bench_time, "budget per instance in seconds")->check(CLI::PositiveNumber);
  bench->add_option("--n", bench_n, "instance size")->check(CLI::Range(2, 200));
  bench->add_option("--seed", seed, "seed for random instances");
  bench->add_option("--workers", workers, "concurrent solves (0: all cores)");
  bench->add_option("--out", bench_out, "output directory");

  std::vector<double> point;
  auto* info = app.add_subcommand("region-info", "describe a region");
  add_common(info, false, true);
  info->add_option("--point", point, "membership of re im")->expected(2);

  std::vector<std::string> plot_pairs;
  std::vector<double> box;
  int resolution = 161;
  auto* plot = app.add_subcommand("plot-data", "boundary and eigenvalue CSVs");
  add_common(plot, false, true);
  plot->add_option("--pair", plot_pairs, "pair files (repeatable)");
  plot->add_option("--box", box, "re_lo re_hi im_lo im_hi")->expected(4);
  plot->add_option("--resolution", resolution, "grid nodes per axis")->check(CLI::Range(3, 4001));
  plot->add_option("--out", c.out, "output directory");

  std::string gen_kind = "grcar", gen_region, gen_out;
  int gen_n = 10, gen_k = 1;
  double gen_eps = 0.0;
  auto* gen = app.add_subcommand("generate", "write a benchmark pair as JSON");
  gen->add_option("kind", gen_kind, "grcar, msd, near_schur or noisy")
      ->check(CLI::IsMember({"grcar", "msd", "near_schur", "noisy"}));
  gen->add_option("--n", gen_n, "size")->check(CLI::Range(1, 10000));
  gen->add_option("--k", gen_k, "Grcar superdiagonals");
  gen->add_option("--eps", gen_eps, "perturbation size");
  gen->add_option("--seed", seed, "seed");
  gen->add_option("--region", gen_region, "region for the noisy generator");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return cmd_solve(c, algo, mu, time_s, trace_path);
    if (*check) return cmd_check(c);
    if (*bench) return cmd_bench(suite, bench_time, bench_n, seed, workers, bench_out);
    if (*info) return cmd_region_info(c, point);
    if (*plot) return cmd_plot_data(c, plot_pairs, box, resolution);
    if (*gen) return cmd_generate(gen_kind, gen_n, gen_k, gen_eps, seed, gen_region, gen_out);
  } catch (const InfeasibleRegionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
