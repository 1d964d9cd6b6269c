// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dlp/dantzig.hpp"
#include "dlp/lasso.hpp"
#include "dlp/simplex.hpp"
#include "dlp/sparse_matrix.hpp"

namespace dlp {

struct BpSolution {
  std::vector<double> beta;  // length p
  std::vector<double> dual;  // v, length n
  double objective = 0.0;    // ||beta||_1
  double equality_residual = 0.0;      // ||y - X beta||_inf, recomputed
  double max_column_violation = 0.0;   // max(|X'v|_inf - 1, 0)
  double dual_objective = 0.0;         // v'y
  EstimatorStatus status = EstimatorStatus::iteration_limit;
  std::vector<int> columns;  // final J, sorted
  std::vector<GenerationRecord> trace;
  std::int64_t pivots = 0;
  double solve_seconds = 0.0;
};

struct BpOptions {
  double eps = 1e-4;  // dual-feasibility violation tolerance
  int col_batch = 30;
  int max_outer_iter = 500;
  double span_tol = 1e-8;       // relative least-squares residual for init
  int continuation_steps = 30;  // lambda_k = ||X'y||_inf * 2^-k
  SolverOptions lp;
  // Init-only fits: support identification does not need tight coordinate
  // precision, and the small-lambda end of the schedule converges slowly
  // under tight tolerances. Residual updates beat gradient caching here
  // because supports approach n while p is large.
  LassoOptions lasso{1e-6, 1e-5, 2000, false};
};

// Feasibility-seeding column set: lasso continuation over a halving lambda
// schedule, stopping at the first support whose least-squares residual on
// X_J meets the span tolerance; greedy correlation augmentation as the
// fallback. Throws InitInfeasible when y is outside the span of X entirely.
std::vector<int> bp_init_columns(const SparseMatrix& x, std::span<const double> y,
                                 const BpOptions& opts = {});

// Restricted primal: minimize sum(b+ + b-) s.t. X_J (b+ - b-) = y.
LpModel build_reduced_bp(const SparseMatrix& x, std::span<const double> y,
                         std::span<const int> column_set);

BpSolution solve_bp(const SparseMatrix& x, std::span<const double> y,
                    const BpOptions& opts = {});

}  // namespace dlp
