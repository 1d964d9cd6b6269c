// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dlp/lasso.hpp"
#include "dlp/simplex.hpp"
#include "dlp/sparse_matrix.hpp"

namespace dlp {

// Index sets driving generation: I = enforced correlation constraints,
// J = included coefficient columns. Both sorted and duplicate-free.
struct WorkingSets {
  std::vector<int> constraints;
  std::vector<int> columns;
};

enum class EstimatorStatus { optimal, iteration_limit };

struct GenerationRecord {
  int iteration = 0;
  int n_constraints = 0;  // |I| after this iteration
  int n_columns = 0;      // |J| after this iteration
  int added_constraints = 0;
  int added_columns = 0;
  double reduced_objective = 0.0;
  double max_constraint_violation = 0.0;
  double max_column_violation = 0.0;
  std::int64_t pivots = 0;  // cumulative simplex pivots
};

struct DantzigSolution {
  std::vector<double> beta;      // length p, zeros off J
  std::vector<double> residual;  // y - X beta (LP r variables)
  std::vector<double> alpha;     // dual of the residual equalities
  double lambda = 0.0;
  double objective = 0.0;  // ||beta||_1
  double dual_objective = 0.0;
  double max_constraint_violation = 0.0;  // max(|X'r|_inf - lambda, 0)
  double max_column_violation = 0.0;      // max(|X'alpha|_inf - 1, 0)
  EstimatorStatus status = EstimatorStatus::iteration_limit;
  WorkingSets sets;
  std::vector<GenerationRecord> trace;
  std::int64_t pivots = 0;
  double solve_seconds = 0.0;  // generation loop time; lasso timing lands on
                               // the first path entry
};

struct DantzigOptions {
  double eps = 1e-4;  // violation tolerance for both scans
  int col_batch = 30;
  int row_batch = 50;
  int max_outer_iter = 500;
  SolverOptions lp;
  LassoOptions lasso;
  // Ablation switches: disabling a generation direction enforces the full
  // index set on that side from the start.
  bool generate_columns = true;
  bool generate_constraints = true;
  // Overrides the lasso-seeded working sets (e.g. random initialization).
  std::optional<WorkingSets> initial_sets;
  // When set, the final reduced model is dumped in a one-constraint-per-line
  // text form to this path.
  std::string dump_lp_path;
};

// Reduced LP over r (free) plus column pairs for j in J:
//   minimize sum_J (b+ + b-)
//   s.t.     r + X_J (b+ - b-) = y          (n equality rows)
//            -lambda <= X_I' r <= lambda    (|I| range rows)
// Columns are ordered r_0..r_{n-1}, then (b+_j, b-_j) per j in J order.
LpModel build_reduced_ds(const SparseMatrix& x, std::span<const double> y,
                         double lambda, std::span<const int> constraint_set,
                         std::span<const int> column_set);

// Indices outside `exclude` with |X_i' r| > lambda + eps, ranked by violation
// descending (ties toward lower index), truncated to `limit`.
std::vector<int> violation_scan_constraints(const SparseMatrix& x,
                                            std::span<const double> r,
                                            double lambda, double eps, int limit,
                                            std::span<const int> exclude = {});

// Indices outside `exclude` with |X_j' alpha| > 1 + eps, ranked descending.
std::vector<int> violation_scan_columns(const SparseMatrix& x,
                                        std::span<const double> alpha, double eps,
                                        int limit,
                                        std::span<const int> exclude = {});

DantzigSolution solve_ds(const SparseMatrix& x, std::span<const double> y,
                         double lambda, const DantzigOptions& opts = {});

// Descending-grid path: the lasso is solved once at the smallest grid value
// to seed the working sets for the largest one; sets and basis carry across
// grid points.
std::vector<DantzigSolution> solve_ds_path(const SparseMatrix& x,
                                           std::span<const double> y,
                                           std::span<const double> lambda_grid,
                                           const DantzigOptions& opts = {});

}  // namespace dlp
