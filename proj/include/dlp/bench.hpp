// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dlp/dantzig.hpp"
#include "dlp/instance.hpp"

namespace dlp {

// Solver configurations compared by the ablation harness: the complete
// generation scheme, a random working-set start, each generation direction
// alone, and the single full LP.
enum class AblationVariant {
  full,
  lasso_init_cg_cc,
  random_init,
  constraint_only,
  column_only,
};

const char* to_string(AblationVariant v);
std::optional<AblationVariant> parse_variant(std::string_view name);

struct RunResult {
  InstanceSpec spec;
  std::string solver;   // ds | bp | fused_signal | fused_regression
  std::string variant;  // ablation tag, or "default"
  double lambda = 0.0;
  double objective = 0.0;
  int support_size = 0;
  double max_constraint_violation = 0.0;
  double max_column_violation = 0.0;
  int outer_iterations = 0;
  int set_i_size = 0;
  int set_j_size = 0;
  std::int64_t pivots = 0;
  double wall_time_sec = 0.0;
  std::string status;
};

RunResult result_from_solution(const Instance& inst, const DantzigSolution& sol,
                               std::string solver, std::string variant,
                               double wall_time_sec);

// One ablation cell: configures the working sets per the variant and runs
// the generation driver on the instance at the given lambda.
RunResult run_ablation(const Instance& inst, double lambda,
                       AblationVariant variant,
                       const DantzigOptions& base = {});

struct BenchCell {
  InstanceSpec spec;
  AblationVariant variant = AblationVariant::lasso_init_cg_cc;
  double tau = 2.0;  // lambda = tau * ||X'e0||_inf
};

// Runs every cell, possibly in parallel (each cell owns its solver
// session); results come back in cell order regardless of scheduling. The
// worker count is min(requested, DANTZIG_LP_THREADS, hardware).
std::vector<RunResult> run_bench(const std::vector<BenchCell>& cells,
                                 int requested_threads = 0);

int bench_thread_cap();

}  // namespace dlp
