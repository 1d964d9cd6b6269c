// SPDX-License-Identifier: Apache-2.0

#include "dlp/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlp/basis_pursuit.hpp"
#include "dlp/bench.hpp"
#include "dlp/dantzig.hpp"
#include "dlp/errors.hpp"
#include "dlp/fused_dantzig.hpp"
#include "dlp/instance.hpp"
#include "dlp/io.hpp"
#include "json.hpp"

namespace dlp {

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitIterationLimit = 2;

ordered_json result_to_json(const RunResult& r) {
  return ordered_json{{"kind", to_string(r.spec.kind)},
                      {"n", r.spec.n},
                      {"p", r.spec.p},
                      {"rho", r.spec.rho},
                      {"pi", r.spec.pi},
                      {"snr", r.spec.snr},
                      {"knots", r.spec.knot_count},
                      {"seed", r.spec.seed},
                      {"solver", r.solver},
                      {"variant", r.variant},
                      {"lambda", r.lambda},
                      {"objective", r.objective},
                      {"support_size", r.support_size},
                      {"max_constraint_violation", r.max_constraint_violation},
                      {"max_column_violation", r.max_column_violation},
                      {"outer_iterations", r.outer_iterations},
                      {"set_i_size", r.set_i_size},
                      {"set_j_size", r.set_j_size},
                      {"pivots", r.pivots},
                      {"wall_time_sec", r.wall_time_sec},
                      {"status", r.status}};
}

int emit_results(const std::vector<RunResult>& results,
                 const std::string& out_path) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["results"] = ordered_json::array();
  for (const auto& r : results) doc["results"].push_back(result_to_json(r));
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    out << text;
  }
  for (const auto& r : results) {
    if (r.status != "optimal") return kExitIterationLimit;
  }
  return kExitOk;
}

// ---- shared option bundles -------------------------------------------------

struct InstanceArgs {
  int n = 0;
  int p = 0;
  double rho = 0.0;
  double pi = 0.0;
  double snr = 10.0;
  int knots = 0;
  std::uint64_t seed = 0;
  std::string in_x;
  std::string in_y;

  void attach(CLI::App* cmd, bool with_design) {
    cmd->add_option("--n", n, "observations");
    if (with_design) cmd->add_option("--p", p, "features");
    cmd->add_option("--rho", rho, "equicorrelation in [0,1)");
    cmd->add_option("--pi", pi, "entry zeroing probability in [0,1)");
    cmd->add_option("--snr", snr, "signal-to-noise ratio Var(X beta)/sigma^2");
    cmd->add_option("--knots", knots, "knot count for fused kinds");
    cmd->add_option("--seed", seed, "instance seed");
    cmd->add_option("--in-x", in_x, "load design matrix (MatrixMarket)");
    cmd->add_option("--in-y", in_y, "load response vector (CSV)");
  }

  bool loads_data() const { return !in_x.empty() || !in_y.empty(); }
};

struct LambdaArgs {
  double lambda = -1.0;
  std::string grid_spec;
  double tau = -1.0;

  void attach(CLI::App* cmd) {
    auto* l = cmd->add_option("--lambda", lambda, "single regularization value");
    auto* g = cmd->add_option("--lambda-grid", grid_spec,
                              "descending log grid: COUNT:MIN:MAX (anchors "
                              "may be 'auto')");
    auto* t = cmd->add_option(
        "--tau", tau, "single value lambda = tau * ||X'e0||_inf");
    l->excludes(g)->excludes(t);
    g->excludes(t);
  }

  // Resolved against the instance anchors; noise-relative choices need a
  // generated instance.
  std::vector<double> resolve(const LambdaAnchors& anchors,
                              bool have_noise) const {
    if (lambda >= 0.0) return {lambda};
    if (tau >= 0.0) {
      if (!have_noise) {
        throw InvalidAnchor("--tau needs a generated instance (no e0 known)");
      }
      return {tau * anchors.noise_level};
    }
    if (!grid_spec.empty()) {
      std::istringstream ss(grid_spec);
      std::string count_s, min_s, max_s;
      if (!std::getline(ss, count_s, ':') || !std::getline(ss, min_s, ':') ||
          !std::getline(ss, max_s)) {
        throw InvalidAnchor("--lambda-grid expects COUNT:MIN:MAX");
      }
      const int count = std::stoi(count_s);
      double lo, hi;
      if (min_s == "auto") {
        if (!have_noise) throw InvalidAnchor("auto grid anchor needs e0");
        lo = 2.0 * anchors.noise_level;
      } else {
        lo = std::stod(min_s);
      }
      hi = max_s == "auto" ? anchors.lambda_max : std::stod(max_s);
      if (count == 1) return {hi};
      return lambda_grid(lo, hi, count);
    }
    // Default: the noise-level anchor.
    if (!have_noise) {
      throw InvalidAnchor("specify --lambda (loaded data has no e0 anchor)");
    }
    return {anchors.noise_level};
  }
};

Instance load_or_generate(const InstanceArgs& args, InstanceKind kind) {
  if (args.loads_data()) {
    if (args.in_y.empty()) {
      throw InvalidAnchor("--in-x requires --in-y");
    }
    Instance inst;
    inst.y = read_csv_vector(args.in_y);
    if (!args.in_x.empty()) {
      inst.x = read_matrix_market(args.in_x);
      if (inst.x.n_rows() != static_cast<int>(inst.y.size())) {
        throw DimensionMismatch("loaded X rows vs y length");
      }
      inst.spec.p = inst.x.n_cols();
    } else if (kind != InstanceKind::fused_signal) {
      throw InvalidAnchor("--in-y without --in-x is only valid for fused signals");
    }
    inst.spec.kind = kind;
    inst.spec.n = static_cast<int>(inst.y.size());
    return inst;
  }
  InstanceSpec spec;
  spec.kind = kind;
  spec.n = args.n;
  spec.p = args.p;
  spec.rho = args.rho;
  spec.pi = args.pi;
  spec.snr = args.snr;
  spec.knot_count = args.knots;
  spec.seed = args.seed;
  return generate_instance(spec);
}

// ---- subcommand drivers ------------------------------------------------------

int run_gen(const InstanceArgs& args, const std::string& kind_name,
            const std::string& out_dir) {
  InstanceKind kind;
  if (kind_name == "ds") kind = InstanceKind::ds;
  else if (kind_name == "bp") kind = InstanceKind::bp;
  else if (kind_name == "fused-signal") kind = InstanceKind::fused_signal;
  else if (kind_name == "fused-regression") kind = InstanceKind::fused_regression;
  else throw InvalidAnchor("unknown --kind " + kind_name);

  Instance inst = load_or_generate(args, kind);
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  if (inst.x.n_cols() > 0) write_matrix_market(dir / "X.mtx", inst.x);
  write_csv_vector(dir / "y.csv", inst.y);
  if (!inst.beta0.empty()) write_csv_vector(dir / "beta0.csv", inst.beta0);
  if (!inst.noise.empty()) write_csv_vector(dir / "e0.csv", inst.noise);
  return kExitOk;
}

int run_ds(const InstanceArgs& iargs, const LambdaArgs& largs,
           const DantzigOptions& opts, const std::string& out_path) {
  Instance inst = load_or_generate(iargs, InstanceKind::ds);
  LambdaAnchors anchors = instance_anchors(inst);
  std::vector<double> lambdas = largs.resolve(anchors, !inst.noise.empty());

  std::vector<RunResult> results;
  if (lambdas.size() == 1) {
    DantzigSolution sol = solve_ds(inst.x, inst.y, lambdas[0], opts);
    results.push_back(result_from_solution(inst, sol, "ds", "default",
                                           sol.solve_seconds));
  } else {
    auto path = solve_ds_path(inst.x, inst.y, lambdas, opts);
    for (const auto& sol : path) {
      results.push_back(result_from_solution(inst, sol, "ds", "default",
                                             sol.solve_seconds));
    }
  }
  return emit_results(results, out_path);
}

int run_bp(const InstanceArgs& iargs, const BpOptions& opts,
           const std::string& out_path) {
  Instance inst = load_or_generate(iargs, InstanceKind::bp);
  BpSolution sol = solve_bp(inst.x, inst.y, opts);

  RunResult r;
  r.spec = inst.spec;
  r.solver = "bp";
  r.variant = "default";
  r.objective = sol.objective;
  for (double b : sol.beta) {
    if (std::fabs(b) > 1e-9) ++r.support_size;
  }
  r.max_constraint_violation = sol.equality_residual;
  r.max_column_violation = sol.max_column_violation;
  r.outer_iterations = static_cast<int>(sol.trace.size());
  r.set_i_size = inst.x.n_rows();
  r.set_j_size = static_cast<int>(sol.columns.size());
  r.pivots = sol.pivots;
  r.wall_time_sec = sol.solve_seconds;
  r.status = sol.status == EstimatorStatus::optimal ? "optimal" : "iteration_limit";
  return emit_results({r}, out_path);
}

int run_fused(const InstanceArgs& iargs, const LambdaArgs& largs,
              bool regression, const DantzigOptions& opts,
              const std::string& out_path) {
  const InstanceKind kind =
      regression ? InstanceKind::fused_regression : InstanceKind::fused_signal;
  Instance inst = load_or_generate(iargs, kind);
  LambdaAnchors anchors = instance_anchors(inst);
  std::vector<double> lambdas = largs.resolve(anchors, !inst.noise.empty());

  std::vector<RunResult> results;
  for (double lambda : lambdas) {
    const auto start = std::chrono::steady_clock::now();
    DantzigSolution sol =
        regression ? solve_fused_regression(inst.x, inst.y, lambda, opts)
                   : solve_fused_signal(inst.y, lambda, opts);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    results.push_back(result_from_solution(
        inst, sol, regression ? "fused_regression" : "fused_signal", "default",
        secs));
  }
  return emit_results(results, out_path);
}

int run_bench_cmd(const InstanceArgs& iargs, const std::string& variant_name,
                  double tau, int seeds, std::uint64_t seed_base, int threads,
                  const std::string& out_path) {
  std::vector<AblationVariant> variants;
  if (variant_name == "all") {
    variants = {AblationVariant::full, AblationVariant::lasso_init_cg_cc,
                AblationVariant::random_init, AblationVariant::constraint_only,
                AblationVariant::column_only};
  } else {
    auto v = parse_variant(variant_name);
    if (!v) throw InvalidAnchor("unknown --variant " + variant_name);
    variants = {*v};
  }
  std::vector<BenchCell> cells;
  for (int s = 0; s < seeds; ++s) {
    for (AblationVariant v : variants) {
      BenchCell cell;
      cell.spec.kind = InstanceKind::ds;
      cell.spec.n = iargs.n;
      cell.spec.p = iargs.p;
      cell.spec.rho = iargs.rho;
      cell.spec.pi = iargs.pi;
      cell.spec.snr = iargs.snr;
      cell.spec.seed = seed_base + static_cast<std::uint64_t>(s);
      cell.variant = v;
      cell.tau = tau;
      cells.push_back(cell);
    }
  }
  std::vector<RunResult> results = run_bench(cells, threads);
  return emit_results(results, out_path);
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Column/constraint-generation solvers for Dantzig-selector-type "
               "estimators"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate an instance and write it out");
  InstanceArgs gen_args;
  gen_args.attach(gen, true);
  std::string gen_kind = "ds";
  std::string gen_out = ".";
  gen->add_option("--kind", gen_kind, "ds | bp | fused-signal | fused-regression");
  gen->add_option("--out", gen_out, "output directory")->required();

  // ds
  auto* ds = app.add_subcommand("ds", "l1 Dantzig selector");
  InstanceArgs ds_args;
  ds_args.attach(ds, true);
  LambdaArgs ds_lambda;
  ds_lambda.attach(ds);
  DantzigOptions ds_opts;
  std::string ds_out;
  ds->add_option("--eps", ds_opts.eps, "violation tolerance");
  ds->add_option("--col-batch", ds_opts.col_batch, "columns added per round");
  ds->add_option("--row-batch", ds_opts.row_batch, "constraints added per round");
  ds->add_option("--max-outer", ds_opts.max_outer_iter,
                 "outer generation iteration cap");
  ds->add_option("--out", ds_out, "results JSON path (default stdout)");
  ds->add_option("--dump-lp", ds_opts.dump_lp_path,
                 "write the final reduced LP as text");
  std::string ds_variant = "dantzig";
  ds->add_option("--variant", ds_variant,
                 "full | dantzig | random-init | constraint-only | column-only");

  // bp
  auto* bp = app.add_subcommand("bp", "basis pursuit");
  InstanceArgs bp_args;
  bp_args.attach(bp, true);
  BpOptions bp_opts;
  std::string bp_out;
  bp->add_option("--eps", bp_opts.eps, "violation tolerance");
  bp->add_option("--col-batch", bp_opts.col_batch, "columns added per round");
  bp->add_option("--out", bp_out, "results JSON path (default stdout)");

  // fused
  auto* fused = app.add_subcommand("fused", "fused Dantzig selector");
  InstanceArgs fused_args;
  fused_args.attach(fused, true);
  LambdaArgs fused_lambda;
  fused_lambda.attach(fused);
  DantzigOptions fused_opts;
  bool fused_regression = false;
  std::string fused_out;
  fused->add_flag("--regression", fused_regression,
                  "general design (default: signal estimation)");
  fused->add_option("--eps", fused_opts.eps, "violation tolerance");
  fused->add_option("--col-batch", fused_opts.col_batch, "columns per round");
  fused->add_option("--row-batch", fused_opts.row_batch, "constraints per round");
  fused->add_option("--max-outer", fused_opts.max_outer_iter,
                    "outer generation iteration cap");
  fused->add_option("--dump-lp", fused_opts.dump_lp_path,
                    "write the final reduced LP as text");
  fused->add_option("--out", fused_out, "results JSON path (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "ablation harness over seeds");
  InstanceArgs bench_args;
  bench_args.attach(bench, true);
  std::string bench_variant = "all";
  double bench_tau = 2.0;
  int bench_seeds = 20;
  std::uint64_t bench_seed_base = 1;
  int bench_threads = 0;
  std::string bench_out;
  bench->add_option("--variant", bench_variant,
                    "all | full | dantzig | random-init | constraint-only | "
                    "column-only");
  bench->add_option("--tau", bench_tau, "lambda = tau * ||X'e0||_inf");
  bench->add_option("--seeds", bench_seeds, "number of seeded replications");
  bench->add_option("--seed-base", bench_seed_base, "first seed");
  bench->add_option("--threads", bench_threads,
                    "worker cap (also bounded by DANTZIG_LP_THREADS)");
  bench->add_option("--out", bench_out, "results JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitError;
  }

  try {
    if (gen->parsed()) return run_gen(gen_args, gen_kind, gen_out);
    if (ds->parsed()) {
      if (ds_variant != "dantzig") {
        // Single-shot ablation run through the same options plumbing.
        auto v = parse_variant(ds_variant);
        if (!v) throw InvalidAnchor("unknown --variant " + ds_variant);
        Instance inst = load_or_generate(ds_args, InstanceKind::ds);
        LambdaAnchors anchors = instance_anchors(inst);
        std::vector<double> lambdas =
            ds_lambda.resolve(anchors, !inst.noise.empty());
        std::vector<RunResult> results;
        for (double lambda : lambdas) {
          results.push_back(run_ablation(inst, lambda, *v, ds_opts));
        }
        return emit_results(results, ds_out);
      }
      return run_ds(ds_args, ds_lambda, ds_opts, ds_out);
    }
    if (bp->parsed()) return run_bp(bp_args, bp_opts, bp_out);
    if (fused->parsed()) {
      return run_fused(fused_args, fused_lambda, fused_regression, fused_opts,
                       fused_out);
    }
    if (bench->parsed()) {
      return run_bench_cmd(bench_args, bench_variant, bench_tau, bench_seeds,
                           bench_seed_base, bench_threads, bench_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace dlp
