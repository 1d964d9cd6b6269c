// SPDX-License-Identifier: Apache-2.0

#include "dlp/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "dlp/rng.hpp"

namespace dlp {

namespace {

constexpr std::uint64_t kRandomInitStream = 0xab1a51ull << 32;

std::vector<int> random_subset(CounterRng& rng, int p, int size) {
  std::vector<std::uint8_t> used(p, 0);
  std::vector<int> out;
  while (static_cast<int>(out.size()) < size) {
    const int j = static_cast<int>(rng.next_below(p));
    if (!used[j]) {
      used[j] = 1;
      out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

const char* to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::full: return "full";
    case AblationVariant::lasso_init_cg_cc: return "lasso_init_cg_cc";
    case AblationVariant::random_init: return "random_init";
    case AblationVariant::constraint_only: return "constraint_only";
    case AblationVariant::column_only: return "column_only";
  }
  return "unknown";
}

std::optional<AblationVariant> parse_variant(std::string_view name) {
  if (name == "full") return AblationVariant::full;
  if (name == "dantzig" || name == "lasso_init_cg_cc") {
    return AblationVariant::lasso_init_cg_cc;
  }
  if (name == "random-init" || name == "random_init") {
    return AblationVariant::random_init;
  }
  if (name == "constraint-only" || name == "constraint_only") {
    return AblationVariant::constraint_only;
  }
  if (name == "column-only" || name == "column_only") {
    return AblationVariant::column_only;
  }
  return std::nullopt;
}

RunResult result_from_solution(const Instance& inst, const DantzigSolution& sol,
                               std::string solver, std::string variant,
                               double wall_time_sec) {
  RunResult r;
  r.spec = inst.spec;
  r.solver = std::move(solver);
  r.variant = std::move(variant);
  r.lambda = sol.lambda;
  r.objective = sol.objective;
  for (double b : sol.beta) {
    if (std::fabs(b) > 1e-9) ++r.support_size;
  }
  r.max_constraint_violation = sol.max_constraint_violation;
  r.max_column_violation = sol.max_column_violation;
  r.outer_iterations = static_cast<int>(sol.trace.size());
  r.set_i_size = static_cast<int>(sol.sets.constraints.size());
  r.set_j_size = static_cast<int>(sol.sets.columns.size());
  r.pivots = sol.pivots;
  r.wall_time_sec = wall_time_sec;
  r.status = sol.status == EstimatorStatus::optimal ? "optimal" : "iteration_limit";
  return r;
}

RunResult run_ablation(const Instance& inst, double lambda,
                       AblationVariant variant, const DantzigOptions& base) {
  DantzigOptions opts = base;
  switch (variant) {
    case AblationVariant::full:
      opts.generate_columns = false;
      opts.generate_constraints = false;
      break;
    case AblationVariant::lasso_init_cg_cc:
      break;
    case AblationVariant::random_init: {
      CounterRng rng(inst.spec.seed, kRandomInitStream);
      WorkingSets sets;
      const int size = std::max(1, inst.spec.support_size());
      sets.constraints = random_subset(rng, inst.x.n_cols(), size);
      sets.columns = random_subset(rng, inst.x.n_cols(), size);
      opts.initial_sets = std::move(sets);
      break;
    }
    case AblationVariant::constraint_only:
      opts.generate_columns = false;  // J = [p] throughout
      break;
    case AblationVariant::column_only:
      opts.generate_constraints = false;  // I = [p] throughout
      break;
  }
  const auto start = std::chrono::steady_clock::now();
  DantzigSolution sol = solve_ds(inst.x, inst.y, lambda, opts);
  return result_from_solution(inst, sol, "ds", to_string(variant),
                              seconds_since(start));
}

int bench_thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap <= 0) cap = 1;
  if (const char* env = std::getenv("DANTZIG_LP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) cap = std::min(cap, v);
  }
  return cap;
}

std::vector<RunResult> run_bench(const std::vector<BenchCell>& cells,
                                 int requested_threads) {
  std::vector<RunResult> results(cells.size());
  int workers = bench_thread_cap();
  if (requested_threads > 0) workers = std::min(workers, requested_threads);
  workers = std::min<int>(workers, static_cast<int>(cells.size()));
  workers = std::max(workers, 1);

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      const BenchCell& cell = cells[k];
      Instance inst = generate_instance(cell.spec);
      LambdaAnchors anchors = instance_anchors(inst);
      const double lambda = cell.tau * anchors.noise_level;
      results[k] = run_ablation(inst, lambda, cell.variant);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return results;
}

}  // namespace dlp
