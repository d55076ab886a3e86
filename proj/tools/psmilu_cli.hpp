#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "psmilu/psmilu.hpp"

namespace psmilu::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_factor_failure = 3;
inline constexpr int exit_no_convergence = 4;
inline constexpr int stats_schema_version = 1;

using json = nlohmann::ordered_json;

struct UsageError : Error {
  using Error::Error;
};

/// Companion file names derived from a system path "dir/name.mtx".
struct SystemFiles {
  std::string matrix, rhs, exact, meta;

  explicit SystemFiles(const std::string& matrix_path) : matrix(matrix_path) {
    std::string stem = matrix_path;
    if (stem.size() > 4 && stem.ends_with(".mtx")) stem.resize(stem.size() - 4);
    rhs = stem + ".rhs.mtx";
    exact = stem + ".exact.mtx";
    meta = stem + ".json";
  }
};

inline std::uint64_t effective_seed(std::uint64_t flag_seed) {
  if (const char* env = std::getenv("PSMILU_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("PSMILU_SEED is not an unsigned integer: ") + env);
    }
  }
  return flag_seed;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline std::optional<json> read_sidecar(const std::string& matrix_path) {
  SystemFiles files(matrix_path);
  std::ifstream in(files.meta);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed metadata file " + files.meta + ": " + e.what());
  }
}

/// Factorization options shared by factor, solve and bench.
struct FactorFlags {
  Options opts;
  std::optional<Index> sym_block;

  void attach(CLI::App* app) {
    app->add_option("--tau-l", opts.tau_L, "drop tolerance for L")->capture_default_str();
    app->add_option("--tau-u", opts.tau_U, "drop tolerance for U")->capture_default_str();
    app->add_option("--tau-d", opts.tau_d, "bound on |1/d_k|")->capture_default_str();
    app->add_option("--tau-kappa", opts.tau_kappa, "bound on the inverse-norm estimates")
        ->capture_default_str();
    app->add_option("--alpha-l", opts.alpha_L, "fill factor for L columns")->capture_default_str();
    app->add_option("--alpha-u", opts.alpha_U, "fill factor for U rows")->capture_default_str();
    app->add_option("--rho", opts.rho, "density threshold of the dense switch")->capture_default_str();
    app->add_option("--c-d", opts.c_d, "size factor of the dense switch")->capture_default_str();
    app->add_option("--c-h", opts.c_h, "size limit of the hybrid Schur complement")
        ->capture_default_str();
    app->add_option("--sym-block", sym_block,
                    "size of the symmetric leading block (default: from metadata, else 0)");
  }

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0)) throw UsageError(std::string(name) + " must be nonnegative");
    };
    nonneg(opts.tau_L, "--tau-l");
    nonneg(opts.tau_U, "--tau-u");
    nonneg(opts.tau_d, "--tau-d");
    nonneg(opts.tau_kappa, "--tau-kappa");
    nonneg(opts.c_d, "--c-d");
    nonneg(opts.c_h, "--c-h");
    if (!(opts.alpha_L >= 1) || !(opts.alpha_U >= 1)) throw UsageError("alpha must be at least 1");
    if (!(opts.rho > 0 && opts.rho <= 1)) throw UsageError("--rho must lie in (0, 1]");
  }

  Index resolve_m0(const std::string& matrix_path, Index n) const {
    Index m0 = 0;
    if (sym_block) {
      m0 = *sym_block;
    } else if (auto meta = read_sidecar(matrix_path); meta && meta->contains("m")) {
      m0 = (*meta)["m"].get<Index>();
    }
    if (m0 < 0 || m0 > n) throw UsageError("--sym-block must lie in [0, n]");
    return m0;
  }
};

inline CRS<double> load_matrix(const std::string& path) {
  return crs_from_triplets(mm_read(path));
}

inline json options_json(const Options& o) {
  return json{{"tau_L", o.tau_L},     {"tau_U", o.tau_U},     {"tau_d", o.tau_d},
              {"tau_kappa", o.tau_kappa}, {"alpha_L", o.alpha_L}, {"alpha_U", o.alpha_U},
              {"rho", o.rho},         {"c_d", o.c_d},         {"c_h", o.c_h},
              {"N", o.N}};
}

inline Index level1_update_flops(const MultilevelPrec<double>& prec) {
  return prec.levels.empty() ? 0 : prec.levels.front().stats.counters.update_total();
}

inline Index total_update_flops(const MultilevelPrec<double>& prec) {
  Index k = 0;
  for (const auto& l : prec.levels) k += l.stats.counters.update_total();
  return k;
}

inline json stats_json(const MultilevelPrec<double>& prec, const CRS<double>& a, Index m0,
                       const Options& opts, std::optional<Index> sym_flops,
                       std::optional<Index> nonsym_flops) {
  json j;
  j["schema_version"] = stats_schema_version;
  j["n"] = a.n_rows;
  j["nnz"] = a.nnz();
  j["sym_block"] = m0;
  j["levels"] = prec.levels.size();
  j["fill_ratio"] = prec.fill_ratio();
  json piv = json::array();
  for (const auto& l : prec.levels) piv.push_back(l.stats.pivots);
  j["pivots_per_level"] = piv;
  j["total_pivots"] = prec.total_pivots();
  j["dense_size"] = prec.dense_size();
  j["update_flops_sym_path"] = sym_flops ? json(*sym_flops) : json(nullptr);
  j["update_flops_nonsym_path"] = nonsym_flops ? json(*nonsym_flops) : json(nullptr);
  j["level1_update_flops"] = level1_update_flops(prec);
  j["total_update_flops"] = total_update_flops(prec);
  json lv = json::array();
  for (const auto& l : prec.levels) {
    const auto& c = l.stats.counters;
    lv.push_back(json{{"n", l.n},
                      {"m", l.m},
                      {"symmetric", l.stats.symmetric},
                      {"pivots", l.stats.pivots},
                      {"deferred_weak", l.stats.deferred_weak},
                      {"deferred_dense", l.stats.deferred_dense},
                      {"nnz_L", l.L_B.nnz()},
                      {"nnz_U", l.U_B.nnz()},
                      {"nnz_E", l.E.nnz()},
                      {"nnz_F", l.F.nnz()},
                      {"schur_nnz", l.stats.schur_nnz},
                      {"hybrid_schur", l.stats.hybrid_schur},
                      {"dense_size", l.dense ? l.dense->size() : 0},
                      {"update_flops_l", c.update_l},
                      {"update_flops_u_leading", c.update_u_leading},
                      {"update_flops_u_trailing", c.update_u_trailing},
                      {"update_flops_d", c.update_d}});
  }
  j["level_details"] = lv;
  j["options"] = options_json(opts);
  return j;
}

/// Level-1 update flops of both Crout variants on the same preprocessing.
inline std::pair<Index, Index> compare_paths(const CRS<double>& a, Index m0, const Options& opts) {
  if (m0 == 0) {
    Index f = level1_update_flops(psmilu_factor(a, 0, opts));
    return {f, f};
  }
  PreprocessResult<double> pre = preprocess(a, m0, opts.preprocess);
  CRS<double> sc = scale(a, std::span<const double>(pre.s), std::span<const double>(pre.t));
  auto sym = iludp_factor(sc, pre.p, pre.q, pre.m, true, opts);
  auto gen = iludp_factor(sc, pre.p, pre.q, pre.m, false, opts);
  return {sym.counters.update_total(), gen.counters.update_total()};
}

inline int cmd_gen(const std::string& kind, Index nx, Index ny, Index nz, const std::string& boundary,
                   Index n, double density, const std::string& random_kind, std::uint64_t seed,
                   const std::string& out_path, std::ostream& out) {
  SystemFiles files(out_path);
  json meta;
  meta["kind"] = kind;
  if (kind == "fdm2d" || kind == "fdm3d") {
    BoundaryMode mode;
    if (boundary == "neumann-top")
      mode = BoundaryMode::neumann_top;
    else if (boundary == "dirichlet")
      mode = BoundaryMode::all_dirichlet;
    else
      throw UsageError("--boundary must be neumann-top or dirichlet");
    if (nx < 3 || ny < 3 || (kind == "fdm3d" && nz < 3))
      throw UsageError("grid sides must be at least 3");
    PoissonSystem<double> sys =
        kind == "fdm2d" ? fdm_poisson_2d(nx, ny, mode) : fdm_poisson_3d(nx, ny, nz, mode);
    mm_write(files.matrix, sys.a);
    mm_write_vector(files.rhs, sys.b);
    mm_write_vector(files.exact, sys.exact);
    meta["boundary"] = boundary;
    meta["n"] = sys.a.n_rows;
    meta["nnz"] = sys.a.nnz();
    meta["m"] = sys.m;
    meta["dims"] = sys.dims;
    meta["h"] = sys.h;
    meta["exact"] = std::filesystem::path(files.exact).filename().string();
  } else if (kind == "random") {
    if (n < 1) throw UsageError("--n must be positive");
    if (!(density > 0 && density <= 1)) throw UsageError("--density must lie in (0, 1]");
    RandomKind rk;
    try {
      rk = parse_random_kind(random_kind);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    CRS<double> a = random_test_matrix(n, density, rk, seed);
    std::vector<double> ones(n, 1.0);
    std::vector<double> b = multiply(a, std::span<const double>(ones));
    mm_write(files.matrix, a);
    mm_write_vector(files.rhs, b);
    meta["random_kind"] = random_kind;
    meta["seed"] = seed;
    meta["density"] = density;
    meta["n"] = a.n_rows;
    meta["nnz"] = a.nnz();
    meta["m"] = rk == RandomKind::nonsymmetric ? Index{0} : n;
  } else {
    throw UsageError("--kind must be fdm2d, fdm3d or random");
  }
  meta["matrix"] = std::filesystem::path(files.matrix).filename().string();
  meta["rhs"] = std::filesystem::path(files.rhs).filename().string();
  write_json(files.meta, meta);
  out << "wrote " << files.matrix << " (" << meta["n"].get<Index>() << " rows)\n";
  return exit_ok;
}

inline int cmd_factor(const std::string& matrix_path, FactorFlags& ff, const std::string& prec_out,
                      const std::string& stats_out, bool both_paths, std::ostream& out) {
  ff.validate();
  CRS<double> a = load_matrix(matrix_path);
  Index m0 = ff.resolve_m0(matrix_path, a.n_rows);
  MultilevelPrec<double> prec = psmilu_factor(a, m0, ff.opts);
  std::optional<Index> sym_flops, nonsym_flops;
  if (both_paths) {
    auto [s, g] = compare_paths(a, m0, ff.opts);
    sym_flops = s;
    nonsym_flops = g;
  } else if (!prec.levels.empty() && prec.levels.front().stats.symmetric) {
    sym_flops = level1_update_flops(prec);
  } else {
    nonsym_flops = level1_update_flops(prec);
  }
  if (!prec_out.empty()) write_preconditioner(prec_out, prec);
  json stats = stats_json(prec, a, m0, ff.opts, sym_flops, nonsym_flops);
  if (!stats_out.empty()) write_json(stats_out, stats);
  out << "levels " << prec.levels.size() << ", fill ratio " << std::setprecision(4)
      << prec.fill_ratio() << ", pivots " << prec.total_pivots() << '\n';
  return exit_ok;
}

inline int cmd_solve(const std::string& matrix_path, std::string rhs_path, const std::string& prec_path,
                     FactorFlags& ff, const GmresOptions& gopt, const std::string& x_out,
                     const std::string& report_out, std::ostream& out) {
  if (gopt.restart < 1) throw UsageError("--restart must be at least 1");
  if (gopt.maxit < 1) throw UsageError("--maxit must be at least 1");
  if (!(gopt.rtol > 0)) throw UsageError("--rtol must be positive");
  CRS<double> a = load_matrix(matrix_path);
  if (a.n_rows != a.n_cols) throw UsageError("matrix must be square");
  if (rhs_path.empty()) rhs_path = SystemFiles(matrix_path).rhs;
  std::vector<double> b = mm_read_vector(rhs_path);
  if (static_cast<Index>(b.size()) != a.n_rows)
    throw UsageError("right-hand side has " + std::to_string(b.size()) + " entries, matrix has " +
                     std::to_string(a.n_rows) + " rows");
  MultilevelPrec<double> prec;
  if (!prec_path.empty()) {
    prec = read_preconditioner(prec_path);
    if (prec.size() != a.n_rows) throw UsageError("preconditioner size does not match the matrix");
  } else {
    ff.validate();
    prec = psmilu_factor(a, ff.resolve_m0(matrix_path, a.n_rows), ff.opts);
  }
  LinearOperator<double> m_inv = [&prec](std::span<const double> x, std::span<double> y) {
    psmilu_solve(prec, x, y);
  };
  SolveReport<double> rep = gmres_right(a, std::span<const double>(b), m_inv, gopt);
  json r;
  r["schema_version"] = stats_schema_version;
  r["converged"] = rep.converged;
  r["iterations"] = rep.iterations;
  r["restarts"] = rep.restarts;
  r["iters_1e-6"] = rep.iterations_to(1e-6);
  r["iters_1e-12"] = rep.iterations_to(1e-12);
  r["final_relres"] = rep.final_relres;
  r["breakdown"] = rep.breakdown;
  r["restart"] = gopt.restart;
  r["rtol"] = gopt.rtol;
  r["maxit"] = gopt.maxit;
  r["residual_history"] = rep.residual_history;
  if (!report_out.empty()) write_json(report_out, r);
  if (!x_out.empty()) mm_write_vector(x_out, rep.x);
  out << (rep.converged ? "converged" : "not converged") << " after " << rep.iterations
      << " iterations, relative residual " << std::setprecision(3) << rep.final_relres << '\n';
  return rep.converged ? exit_ok : exit_no_convergence;
}

inline const char* bench_header =
    "kind,side,n,nnz,levels,level1_update_flops,total_update_flops,fill_ratio,pivots,gmres_iters";

inline int cmd_bench(const std::string& kind, const std::vector<Index>& sides, FactorFlags& ff,
                     bool solve, const GmresOptions& gopt, const std::string& csv_out,
                     std::ostream& out) {
  ff.validate();
  if (kind != "fdm2d" && kind != "fdm3d") throw UsageError("--kind must be fdm2d or fdm3d");
  if (sides.empty()) throw UsageError("--sides needs at least one value");
  for (Index s : sides)
    if (s < 3) throw UsageError("grid sides must be at least 3");
  std::ostringstream csv;
  csv << bench_header << '\n';
  for (Index side : sides) {
    PoissonSystem<double> sys =
        kind == "fdm2d" ? fdm_poisson_2d(side, side) : fdm_poisson_3d(side, side, side);
    Index m0 = ff.sym_block ? std::min(*ff.sym_block, sys.m) : sys.m;
    MultilevelPrec<double> prec = psmilu_factor(sys.a, m0, ff.opts);
    Index iters = -1;
    if (solve) {
      LinearOperator<double> m_inv = [&prec](std::span<const double> x, std::span<double> y) {
        psmilu_solve(prec, x, y);
      };
      auto rep = gmres_right(sys.a, std::span<const double>(sys.b), m_inv, gopt);
      iters = rep.converged ? rep.iterations : -1;
    }
    char ratio[32];
    std::snprintf(ratio, sizeof ratio, "%.6f", prec.fill_ratio());
    csv << kind << ',' << side << ',' << sys.a.n_rows << ',' << sys.a.nnz() << ','
        << prec.levels.size() << ',' << level1_update_flops(prec) << ','
        << total_update_flops(prec) << ',' << ratio << ',' << prec.total_pivots() << ',' << iters
        << '\n';
  }
  if (csv_out.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(csv_out);
    if (!f) throw Error("cannot write " + csv_out);
    f << csv.str();
  }
  return exit_ok;
}

/// Runs the command line given without the program name. Returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilevel incomplete LDU preconditioner toolkit", "psmilu"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a test system");
  std::string gen_kind = "fdm2d", boundary = "neumann-top", random_kind = "spd", gen_out;
  Index nx = 0, ny = 0, nz = 0, gen_n = 0;
  double density = 0.1;
  std::uint64_t seed = 0;
  gen->add_option("--kind", gen_kind, "fdm2d, fdm3d or random")->capture_default_str();
  gen->add_option("--nx", nx, "grid nodes along x");
  gen->add_option("--ny", ny, "grid nodes along y");
  gen->add_option("--nz", nz, "grid nodes along z");
  gen->add_option("--boundary", boundary, "neumann-top or dirichlet")->capture_default_str();
  gen->add_option("--n", gen_n, "size of a random matrix");
  gen->add_option("--density", density, "density of a random matrix")->capture_default_str();
  gen->add_option("--random-kind", random_kind,
                  "spd, symmetric-indefinite, nonsymmetric or zero-diag-sym")
      ->capture_default_str();
  gen->add_option("--seed", seed, "random seed (PSMILU_SEED overrides)")->capture_default_str();
  gen->add_option("--out", gen_out, "matrix file to write (.mtx)")->required();

  // factor
  auto* factor = app.add_subcommand("factor", "compute the multilevel preconditioner");
  std::string f_matrix, f_out, f_stats;
  bool f_both = false;
  FactorFlags f_flags;
  factor->add_option("matrix", f_matrix, "Matrix Market file")->required();
  f_flags.attach(factor);
  factor->add_option("--out", f_out, "preconditioner file to write");
  factor->add_option("--stats", f_stats, "statistics JSON to write");
  factor->add_flag("--compare-paths", f_both,
                   "also measure level-1 update flops with the general row update");

  // solve
  auto* solve = app.add_subcommand("solve", "solve with GMRES and the preconditioner");
  std::string s_matrix, s_rhs, s_prec, s_out, s_report;
  FactorFlags s_flags;
  GmresOptions gopt;
  solve->add_option("matrix", s_matrix, "Matrix Market file")->required();
  solve->add_option("--rhs", s_rhs, "right-hand side (default: <matrix>.rhs.mtx)");
  solve->add_option("--prec", s_prec, "preconditioner file (default: factor now)");
  s_flags.attach(solve);
  solve->add_option("--restart", gopt.restart, "GMRES restart length")->capture_default_str();
  solve->add_option("--rtol", gopt.rtol, "relative residual tolerance")->capture_default_str();
  solve->add_option("--maxit", gopt.maxit, "maximum inner iterations")->capture_default_str();
  solve->add_option("--out", s_out, "solution vector to write");
  solve->add_option("--report", s_report, "report JSON to write");

  // bench
  auto* bench = app.add_subcommand("bench", "factorize a series of grid sizes");
  std::string b_kind = "fdm2d", b_csv;
  std::vector<Index> sides{33, 65, 129, 257};
  bool b_no_solve = false;
  FactorFlags b_flags;
  GmresOptions b_gopt;
  b_gopt.rtol = 1e-6;
  bench->add_option("--kind", b_kind, "fdm2d or fdm3d")->capture_default_str();
  bench->add_option("--sides", sides, "grid sides")->delimiter(',')->capture_default_str();
  b_flags.attach(bench);
  bench->add_option("--rtol", b_gopt.rtol, "GMRES tolerance")->capture_default_str();
  bench->add_flag("--no-solve", b_no_solve, "skip the GMRES solve");
  bench->add_option("--csv", b_csv, "CSV file to write (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_kind, nx, ny, nz, boundary, gen_n, density, random_kind,
                     effective_seed(seed), gen_out, out);
    if (factor->parsed()) return cmd_factor(f_matrix, f_flags, f_out, f_stats, f_both, out);
    if (solve->parsed())
      return cmd_solve(s_matrix, s_rhs, s_prec, s_flags, gopt, s_out, s_report, out);
    if (bench->parsed()) return cmd_bench(b_kind, sides, b_flags, !b_no_solve, b_gopt, b_csv, out);
  } catch (const SingularError& e) {
    err << "factorization failed at level " << e.level() << ": " << e.what() << '\n';
    return exit_factor_failure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace psmilu::cli
