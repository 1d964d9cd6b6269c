// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "dlp/sparse_matrix.hpp"

namespace dlp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct RowBound {
  double lo = -kInf;
  double hi = kInf;
};

struct VarBound {
  double lo = -kInf;
  double hi = kInf;
};

// Computational form:
//   minimize    c'x
//   subject to  lo_i <= (A x)_i <= hi_i   (lo == hi encodes equality)
//               var_lo_j <= x_j <= var_hi_j
// Internally each row activity gets a bounded slack, so the engine works on
// [A -I] (x; s) = 0 with all right-hand-side data carried in bounds.
struct LpModel {
  std::vector<double> c;
  SparseMatrix a;
  std::vector<RowBound> row_bounds;
  std::vector<VarBound> var_bounds;

  int n_rows() const { return a.n_rows(); }
  int n_cols() const { return a.n_cols(); }
};

LpModel build_model(std::vector<double> c, SparseMatrix a,
                    std::vector<RowBound> row_bounds,
                    std::vector<VarBound> var_bounds);

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, free_zero };

// Variables are addressed with a signed id: j >= 0 is structural column j,
// j < 0 is the slack of row (-j - 1). The encoding stays stable when
// columns or rows are appended.
struct Basis {
  std::vector<int> basic;                  // one variable id per row
  std::vector<VarStatus> struct_status;    // per structural column
  std::vector<VarStatus> slack_status;     // per row

  bool empty() const { return basic.empty(); }
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(SolveStatus s);

struct LpSolution {
  SolveStatus status = SolveStatus::iteration_limit;
  std::vector<double> x;              // structural values
  std::vector<double> duals;          // one per row
  std::vector<double> reduced_costs;  // per structural column
  double objective = 0.0;
  std::int64_t pivots = 0;
  double max_primal_violation = 0.0;
  double max_dual_violation = 0.0;
  // Row-space infeasibility certificate, set when status == infeasible: the
  // dual ray along which the present columns stay dual feasible. A column
  // outside the model with ray'A_j > 0 (demanded from below) blocks the ray
  // and is a candidate to restore feasibility.
  std::vector<double> farkas;
};

struct SolverOptions {
  double feas_tol = 1e-9;       // primal and dual feasibility
  double pivot_tol = 1e-10;     // ratio-test pivot threshold
  int refactor_interval = 100;  // pivots between refactorizations
  std::int64_t max_pivots = 200000;
  int bland_trigger = 500;  // consecutive degenerate pivots before Bland's rule
  std::ostream* log = nullptr;
  // Invoked with the basic-variable ids after every basis change.
  std::function<void(std::span<const int>)> pivot_observer;
};

struct NewColumn {
  double cost = 0.0;
  std::vector<std::pair<int, double>> entries;  // (row, value), sorted by row
  double lo = 0.0;
  double hi = kInf;
};

struct NewRow {
  std::vector<std::pair<int, double>> entries;  // (col, value)
  double lo = -kInf;
  double hi = kInf;
};

namespace detail {
class LuFactors;
}

// Bounded-variable revised simplex with dense LU factorization of the basis
// and an eta file between refactorizations. One instance is a single-owner
// solve session: the model, current basis, and factorization move together.
//
// Cold solves start from the all-slack basis. After add_columns the previous
// basis stays primal feasible and the next solve runs primal simplex; after
// add_rows the new slacks enter the basis, the previous duals stay feasible,
// and the next solve runs dual simplex.
class SimplexSolver {
 public:
  explicit SimplexSolver(LpModel model, SolverOptions opts = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;
  SimplexSolver(const SimplexSolver&) = delete;
  SimplexSolver& operator=(const SimplexSolver&) = delete;

  LpSolution solve();

  void set_basis(const Basis& basis);
  const Basis& basis() const { return basis_; }
  const LpModel& model() const { return model_; }

  void add_columns(std::span<const NewColumn> cols);
  void add_rows(std::span<const NewRow> rows);
  void set_row_bounds(int row, double lo, double hi);
  void set_var_bounds(int col, double lo, double hi);

  std::int64_t total_pivots() const { return total_pivots_; }

  // Pricing selection, exposed for anti-cycling tests.
  enum class Pricing { dantzig, bland };
  void set_pricing(Pricing p) { forced_pricing_ = p; }

  // One-line-per-constraint text dump for debugging.
  void dump(std::ostream& os) const;

 private:
  // ---- variable addressing -------------------------------------------------
  int n_struct() const { return model_.n_cols(); }
  int n_rows() const { return model_.n_rows(); }
  bool is_slack(int id) const { return id < 0; }
  static int slack_id(int row) { return -row - 1; }
  static int slack_row(int id) { return -id - 1; }
  double cost_of(int id) const { return id >= 0 ? model_.c[id] : 0.0; }
  double lo_of(int id) const;
  double hi_of(int id) const;
  VarStatus& status_of(int id);
  VarStatus status_of(int id) const;
  double nonbasic_value(int id) const;
  void column_of(int id, std::vector<double>& dense) const;  // column of [A -I]
  double column_dot(int id, std::span<const double> v) const;

  // ---- factorization and iterative state ------------------------------------
  bool refactorize();  // returns false if basis repair changed the basis
  void repair_basis(std::vector<int>& dependent_rows);
  void compute_basic_values();
  void compute_duals_and_reduced_costs();
  void ftran(std::vector<double>& rhs) const;
  void btran(std::vector<double>& rhs) const;
  void normalize_statuses();

  double primal_violation(int id, double value) const;
  double max_primal_infeasibility() const;
  double dual_infeasibility(int id, double d) const;
  double max_dual_infeasibility() const;

  // ---- simplex iterations ----------------------------------------------------
  enum class StepResult { pivoted, optimal, unbounded, infeasible, refactor };
  StepResult primal_step(bool phase_one);
  StepResult dual_step();
  void apply_pivot(int entering, int leaving_pos, double step,
                   const std::vector<double>& fcol, VarStatus leaving_status);
  void phase_one_costs(std::vector<double>& w) const;

  LpSolution assemble_solution(SolveStatus status);

  LpModel model_;
  SolverOptions opts_;
  Basis basis_;

  std::unique_ptr<detail::LuFactors> lu_;
  std::vector<std::vector<double>> etas_;  // dense eta columns
  std::vector<int> eta_rows_;
  bool factor_valid_ = false;
  int pivots_since_refactor_ = 0;

  std::vector<double> x_basic_;          // values of basic variables by row
  mutable std::vector<double> work_pos_;  // scratch, size m
  std::int64_t total_pivots_ = 0;
  std::int64_t solve_pivots_ = 0;
  int degenerate_run_ = 0;
  bool bland_mode_ = false;
  std::optional<Pricing> forced_pricing_;
  std::vector<double> farkas_ray_;
};

// Convenience wrapper matching (model [, warm basis]) -> (solution, basis).
std::pair<LpSolution, Basis> solve(const LpModel& model,
                                   const Basis* warm = nullptr,
                                   SolverOptions opts = {});

}  // namespace dlp
