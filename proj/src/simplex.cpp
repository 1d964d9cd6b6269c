// SPDX-License-Identifier: Apache-2.0

#include "dlp/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string>

#include "dlp/errors.hpp"
#include "dlp/kernels.hpp"

namespace dlp {

namespace {
constexpr double kSingularTol = 1e-11;
constexpr double kDegenTol = 1e-11;
constexpr double kPivotConsistencyTol = 1e-7;
}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

LpModel build_model(std::vector<double> c, SparseMatrix a,
                    std::vector<RowBound> row_bounds,
                    std::vector<VarBound> var_bounds) {
  if (static_cast<int>(c.size()) != a.n_cols()) {
    throw DimensionMismatch("objective length " + std::to_string(c.size()) +
                            " vs " + std::to_string(a.n_cols()) + " columns");
  }
  if (static_cast<int>(row_bounds.size()) != a.n_rows()) {
    throw DimensionMismatch("row bound count vs matrix rows");
  }
  if (static_cast<int>(var_bounds.size()) != a.n_cols()) {
    throw DimensionMismatch("variable bound count vs matrix columns");
  }
  a.validate();
  for (std::size_t i = 0; i < row_bounds.size(); ++i) {
    if (!(row_bounds[i].lo <= row_bounds[i].hi)) {
      throw InvalidBound("row " + std::to_string(i));
    }
  }
  for (std::size_t j = 0; j < var_bounds.size(); ++j) {
    if (!(var_bounds[j].lo <= var_bounds[j].hi)) {
      throw InvalidBound("variable " + std::to_string(j));
    }
    if (!std::isfinite(c[j])) throw NonFiniteInput("objective coefficient");
  }
  return LpModel{std::move(c), std::move(a), std::move(row_bounds),
                 std::move(var_bounds)};
}

// ---------------------------------------------------------------------------
// Dense LU of the basis matrix, partial pivoting with physical row swaps.
// ---------------------------------------------------------------------------

namespace detail {

class LuFactors {
 public:
  template <typename ColFiller>
  std::vector<int> factorize(int m, ColFiller&& fill_col) {
    m_ = m;
    f_.assign(static_cast<std::size_t>(m) * m, 0.0);
    rowperm_.resize(m);
    for (int i = 0; i < m; ++i) rowperm_[i] = i;
    std::vector<int> dependent;
    if (m == 0) return dependent;

    std::vector<double> col(m);
    for (int k = 0; k < m; ++k) {
      col.assign(m, 0.0);
      fill_col(k, col);
      // scatter through the current row permutation
      double* fk = &f_[static_cast<std::size_t>(k) * m];
      for (int i = 0; i < m; ++i) fk[i] = col[rowperm_[i]];
    }
    for (int k = 0; k < m; ++k) {
      double* fk = &f_[static_cast<std::size_t>(k) * m];
      int p = k;
      double best = std::fabs(fk[k]);
      for (int i = k + 1; i < m; ++i) {
        const double v = std::fabs(fk[i]);
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best < kSingularTol) {
        dependent.push_back(k);
        for (int i = k + 1; i < m; ++i) fk[i] = 0.0;
        fk[k] = 1.0;
        continue;
      }
      if (p != k) {
        for (int j = 0; j < m; ++j) {
          std::swap(f_[static_cast<std::size_t>(j) * m + p],
                    f_[static_cast<std::size_t>(j) * m + k]);
        }
        std::swap(rowperm_[p], rowperm_[k]);
      }
      const double inv = 1.0 / fk[k];
      for (int i = k + 1; i < m; ++i) fk[i] *= inv;
      for (int j = k + 1; j < m; ++j) {
        double* fj = &f_[static_cast<std::size_t>(j) * m];
        const double ukj = fj[k];
        if (ukj != 0.0) {
          kernels::axpy(-ukj, fk + k + 1, fj + k + 1,
                        static_cast<std::size_t>(m - k - 1));
        }
      }
    }
    return dependent;
  }

  // Solve B z = b (z indexed by basis position).
  void ftran(std::vector<double>& b, std::vector<double>& scratch) const {
    scratch.resize(m_);
    for (int k = 0; k < m_; ++k) scratch[k] = b[rowperm_[k]];
    for (int j = 0; j < m_; ++j) {
      const double v = scratch[j];
      if (v != 0.0) {
        kernels::axpy(-v, &f_[static_cast<std::size_t>(j) * m_ + j + 1],
                      scratch.data() + j + 1, static_cast<std::size_t>(m_ - j - 1));
      }
    }
    for (int j = m_ - 1; j >= 0; --j) {
      const double* fj = &f_[static_cast<std::size_t>(j) * m_];
      scratch[j] /= fj[j];
      const double v = scratch[j];
      if (v != 0.0) kernels::axpy(-v, fj, scratch.data(), static_cast<std::size_t>(j));
    }
    b = scratch;
  }

  // Solve B^T y = c (c indexed by basis position, y by original row).
  void btran(std::vector<double>& c, std::vector<double>& scratch) const {
    scratch.resize(m_);
    for (int j = 0; j < m_; ++j) {
      const double* fj = &f_[static_cast<std::size_t>(j) * m_];
      const double s = kernels::dot(fj, scratch.data(), static_cast<std::size_t>(j));
      scratch[j] = (c[j] - s) / fj[j];
    }
    for (int j = m_ - 1; j >= 0; --j) {
      const double* fj = &f_[static_cast<std::size_t>(j) * m_];
      scratch[j] -= kernels::dot(fj + j + 1, scratch.data() + j + 1,
                                 static_cast<std::size_t>(m_ - j - 1));
    }
    c.resize(m_);
    for (int k = 0; k < m_; ++k) c[rowperm_[k]] = scratch[k];
  }

  const std::vector<int>& rowperm() const { return rowperm_; }

 private:
  int m_ = 0;
  std::vector<double> f_;  // column-major, unit L below diagonal, U on/above
  std::vector<int> rowperm_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// SimplexSolver
// ---------------------------------------------------------------------------

SimplexSolver::SimplexSolver(LpModel model, SolverOptions opts)
    : model_(std::move(model)), opts_(opts), lu_(new detail::LuFactors) {}

SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

double SimplexSolver::lo_of(int id) const {
  return id >= 0 ? model_.var_bounds[id].lo : model_.row_bounds[slack_row(id)].lo;
}

double SimplexSolver::hi_of(int id) const {
  return id >= 0 ? model_.var_bounds[id].hi : model_.row_bounds[slack_row(id)].hi;
}

VarStatus& SimplexSolver::status_of(int id) {
  return id >= 0 ? basis_.struct_status[id] : basis_.slack_status[slack_row(id)];
}

VarStatus SimplexSolver::status_of(int id) const {
  return id >= 0 ? basis_.struct_status[id] : basis_.slack_status[slack_row(id)];
}

double SimplexSolver::nonbasic_value(int id) const {
  switch (status_of(id)) {
    case VarStatus::at_lower: return lo_of(id);
    case VarStatus::at_upper: return hi_of(id);
    case VarStatus::free_zero: return 0.0;
    case VarStatus::basic: break;
  }
  assert(false && "nonbasic_value on basic variable");
  return 0.0;
}

void SimplexSolver::column_of(int id, std::vector<double>& dense) const {
  dense.assign(n_rows(), 0.0);
  if (id >= 0) {
    auto rows = model_.a.col_rows(id);
    auto vals = model_.a.col_values(id);
    for (std::size_t k = 0; k < rows.size(); ++k) dense[rows[k]] = vals[k];
  } else {
    dense[slack_row(id)] = -1.0;
  }
}

double SimplexSolver::column_dot(int id, std::span<const double> v) const {
  if (id >= 0) return model_.a.col_dot(id, v);
  return -v[slack_row(id)];
}

void SimplexSolver::set_basis(const Basis& basis) {
  if (static_cast<int>(basis.basic.size()) != n_rows() ||
      static_cast<int>(basis.struct_status.size()) != n_struct() ||
      static_cast<int>(basis.slack_status.size()) != n_rows()) {
    throw DimensionMismatch("basis does not match model shape");
  }
  for (int id : basis.basic) {
    if (id >= n_struct() || -id - 1 >= n_rows()) {
      throw DimensionMismatch("basic variable id out of range");
    }
  }
  basis_ = basis;
  factor_valid_ = false;
}

void SimplexSolver::normalize_statuses() {
  if (basis_.empty()) {
    basis_.basic.resize(n_rows());
    for (int i = 0; i < n_rows(); ++i) basis_.basic[i] = slack_id(i);
    basis_.struct_status.assign(n_struct(), VarStatus::at_lower);
    basis_.slack_status.assign(n_rows(), VarStatus::basic);
    factor_valid_ = false;
  }
  auto snap = [&](int id) {
    VarStatus& st = status_of(id);
    if (st == VarStatus::basic) return;
    const double lo = lo_of(id), hi = hi_of(id);
    if (st == VarStatus::at_lower && lo == -kInf) {
      st = hi < kInf ? VarStatus::at_upper : VarStatus::free_zero;
    } else if (st == VarStatus::at_upper && hi == kInf) {
      st = lo > -kInf ? VarStatus::at_lower : VarStatus::free_zero;
    }
    if (st == VarStatus::free_zero) {
      if (lo > 0.0) st = VarStatus::at_lower;
      else if (hi < 0.0) st = VarStatus::at_upper;
    }
  };
  for (int j = 0; j < n_struct(); ++j) snap(j);
  for (int i = 0; i < n_rows(); ++i) snap(slack_id(i));
}

bool SimplexSolver::refactorize() {
  for (int attempt = 0; attempt <= 10; ++attempt) {
    std::vector<int> deps = lu_->factorize(
        n_rows(), [&](int pos, std::vector<double>& col) {
          const int id = basis_.basic[pos];
          if (id >= 0) {
            auto rows = model_.a.col_rows(id);
            auto vals = model_.a.col_values(id);
            for (std::size_t k = 0; k < rows.size(); ++k) col[rows[k]] = vals[k];
          } else {
            col[slack_row(id)] = -1.0;
          }
        });
    if (deps.empty()) {
      etas_.clear();
      eta_rows_.clear();
      factor_valid_ = true;
      pivots_since_refactor_ = 0;
      return attempt == 0;
    }
    repair_basis(deps);
  }
  throw NumericalFailure("basis matrix singular after repeated repair");
}

void SimplexSolver::repair_basis(std::vector<int>& dependent_rows) {
  // Swap each dependent basic variable for the slack of the row left
  // without a pivot; that slack column is independent of the others.
  const auto& perm = lu_->rowperm();
  for (int pos : dependent_rows) {
    const int displaced = basis_.basic[pos];
    const int row = perm[pos];
    const double lo = lo_of(displaced), hi = hi_of(displaced);
    status_of(displaced) = lo > -kInf  ? VarStatus::at_lower
                           : hi < kInf ? VarStatus::at_upper
                                       : VarStatus::free_zero;
    basis_.basic[pos] = slack_id(row);
    basis_.slack_status[row] = VarStatus::basic;
  }
}

void SimplexSolver::compute_basic_values() {
  std::vector<double> rhs(n_rows(), 0.0);
  for (int j = 0; j < n_struct(); ++j) {
    if (basis_.struct_status[j] == VarStatus::basic) continue;
    const double v = nonbasic_value(j);
    if (v != 0.0) {
      auto rows = model_.a.col_rows(j);
      auto vals = model_.a.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) rhs[rows[k]] -= vals[k] * v;
    }
  }
  for (int i = 0; i < n_rows(); ++i) {
    if (basis_.slack_status[i] == VarStatus::basic) continue;
    const double v = nonbasic_value(slack_id(i));
    if (v != 0.0) rhs[i] += v;  // slack column is -e_i
  }
  ftran(rhs);
  x_basic_ = std::move(rhs);
}

void SimplexSolver::ftran(std::vector<double>& rhs) const {
  lu_->ftran(rhs, work_pos_);
  for (std::size_t e = 0; e < etas_.size(); ++e) {
    const auto& w = etas_[e];
    const int r = eta_rows_[e];
    const double t = rhs[r] / w[r];
    rhs[r] = 0.0;
    kernels::axpy(-t, w.data(), rhs.data(), w.size());
    rhs[r] = t;
  }
}

void SimplexSolver::btran(std::vector<double>& rhs) const {
  for (std::size_t e = etas_.size(); e-- > 0;) {
    const auto& w = etas_[e];
    const int r = eta_rows_[e];
    const double s = kernels::dot(w.data(), rhs.data(), w.size());
    rhs[r] = (rhs[r] - (s - w[r] * rhs[r])) / w[r];
  }
  lu_->btran(rhs, work_pos_);
}

double SimplexSolver::primal_violation(int id, double value) const {
  const double lo = lo_of(id), hi = hi_of(id);
  double v = 0.0;
  if (value < lo) v = lo - value;
  if (value > hi) v = std::max(v, value - hi);
  return v;
}

double SimplexSolver::max_primal_infeasibility() const {
  double worst = 0.0;
  for (int pos = 0; pos < n_rows(); ++pos) {
    const int id = basis_.basic[pos];
    const double tol = opts_.feas_tol * (1.0 + std::fabs(x_basic_[pos]));
    const double v = primal_violation(id, x_basic_[pos]);
    if (v > tol) worst = std::max(worst, v);
  }
  return worst;
}

double SimplexSolver::dual_infeasibility(int id, double d) const {
  const double lo = lo_of(id), hi = hi_of(id);
  if (lo == hi) return 0.0;  // fixed variables carry no dual condition
  switch (status_of(id)) {
    case VarStatus::at_lower: return d < 0.0 ? -d : 0.0;
    case VarStatus::at_upper: return d > 0.0 ? d : 0.0;
    case VarStatus::free_zero: {
      // movable both ways unless a bound pins one direction
      double viol = 0.0;
      if (hi > 0.0 && d < 0.0) viol = -d;
      if (lo < 0.0 && d > 0.0) viol = std::max(viol, d);
      return viol;
    }
    case VarStatus::basic: return 0.0;
  }
  return 0.0;
}

double SimplexSolver::max_dual_infeasibility() const {
  // Reduced costs under the true objective at the current basis.
  std::vector<double> v(n_rows());
  for (int pos = 0; pos < n_rows(); ++pos) v[pos] = cost_of(basis_.basic[pos]);
  btran(v);
  double worst = 0.0;
  for (int j = 0; j < n_struct(); ++j) {
    if (basis_.struct_status[j] == VarStatus::basic) continue;
    const double d = model_.c[j] - model_.a.col_dot(j, v);
    worst = std::max(worst, dual_infeasibility(j, d));
  }
  for (int i = 0; i < n_rows(); ++i) {
    if (basis_.slack_status[i] == VarStatus::basic) continue;
    worst = std::max(worst, dual_infeasibility(slack_id(i), v[i]));
  }
  return worst;
}

void SimplexSolver::phase_one_costs(std::vector<double>& w) const {
  w.assign(n_rows(), 0.0);
  for (int pos = 0; pos < n_rows(); ++pos) {
    const int id = basis_.basic[pos];
    const double x = x_basic_[pos];
    const double tol = opts_.feas_tol * (1.0 + std::fabs(x));
    if (x < lo_of(id) - tol) w[pos] = -1.0;
    else if (x > hi_of(id) + tol) w[pos] = 1.0;
  }
}

// One primal iteration: price, ratio test, pivot.
SimplexSolver::StepResult SimplexSolver::primal_step(bool phase_one) {
  // Duals for the active objective.
  std::vector<double> v(n_rows());
  if (phase_one) {
    phase_one_costs(v);
  } else {
    for (int pos = 0; pos < n_rows(); ++pos) v[pos] = cost_of(basis_.basic[pos]);
  }
  btran(v);

  const bool bland = bland_mode_ || forced_pricing_ == Pricing::bland;
  int entering = 0;
  bool have_entering = false;
  int enter_dir = 0;
  double best_score = opts_.feas_tol;

  auto consider = [&](int id) {
    if (status_of(id) == VarStatus::basic) return;
    const double lo = lo_of(id), hi = hi_of(id);
    if (lo == hi) return;
    const double cost = phase_one ? 0.0 : cost_of(id);
    const double d = cost - column_dot(id, v);
    const VarStatus st = status_of(id);
    int dir = 0;
    if (st == VarStatus::at_lower && d < -opts_.feas_tol) dir = 1;
    else if (st == VarStatus::at_upper && d > opts_.feas_tol) dir = -1;
    else if (st == VarStatus::free_zero) {
      if (d < -opts_.feas_tol && hi > 0.0) dir = 1;
      else if (d > opts_.feas_tol && lo < 0.0) dir = -1;
    }
    if (dir == 0) return;
    if (bland) {
      if (!have_entering) {
        entering = id;
        enter_dir = dir;
        have_entering = true;
      }
      return;
    }
    const double score = std::fabs(d);
    if (score > best_score) {
      best_score = score;
      entering = id;
      enter_dir = dir;
      have_entering = true;
    }
  };
  // Structural columns first, then slacks: ids ascend within each group and
  // Bland's rule takes the first eligible id in this fixed order.
  for (int j = 0; j < n_struct() && !(bland && have_entering); ++j) consider(j);
  for (int i = 0; i < n_rows() && !(bland && have_entering); ++i) consider(slack_id(i));

  if (!have_entering) return StepResult::optimal;

  std::vector<double> w;
  column_of(entering, w);
  ftran(w);

  // Ratio test: x_basic(step) = x_basic - step*dir*w, step >= 0. A basic
  // variable already outside a bound (phase 1 only) blocks when it reaches
  // the violated bound and never blocks at the bound behind it.
  const double enter_val = nonbasic_value(entering);
  double best = kInf;
  int block_pos = -1;
  VarStatus block_status = VarStatus::at_lower;
  double block_weight = 0.0;
  for (int pos = 0; pos < n_rows(); ++pos) {
    const double g = -enter_dir * w[pos];
    if (std::fabs(g) <= opts_.pivot_tol) continue;
    const int id = basis_.basic[pos];
    const double x = x_basic_[pos];
    const double lo = lo_of(id), hi = hi_of(id);
    const double tol = opts_.feas_tol * (1.0 + std::fabs(x));
    double bound;
    VarStatus leave_st;
    if (g > 0.0) {
      if (x < lo - tol) {
        bound = lo;
        leave_st = VarStatus::at_lower;
      } else if (x > hi + tol) {
        continue;  // moving further above; accounted by phase-1 costs
      } else if (hi < kInf) {
        bound = hi;
        leave_st = VarStatus::at_upper;
      } else {
        continue;
      }
    } else {
      if (x > hi + tol) {
        bound = hi;
        leave_st = VarStatus::at_upper;
      } else if (x < lo - tol) {
        continue;
      } else if (lo > -kInf) {
        bound = lo;
        leave_st = VarStatus::at_lower;
      } else {
        continue;
      }
    }
    const double ratio = std::max((bound - x) / g, 0.0);
    bool take;
    if (block_pos < 0 || ratio < best - kDegenTol) {
      take = true;
    } else if (ratio <= best + kDegenTol) {
      take = bland ? id < basis_.basic[block_pos] : std::fabs(g) > block_weight;
    } else {
      take = false;
    }
    if (take) {
      best = block_pos < 0 ? ratio : std::min(best, ratio);
      block_pos = pos;
      block_status = leave_st;
      block_weight = std::fabs(g);
    }
  }
  const double own = enter_dir > 0 ? hi_of(entering) - enter_val
                                   : enter_val - lo_of(entering);

  if (block_pos < 0 && own == kInf) {
    if (phase_one) throw NumericalFailure("phase-1 objective unbounded");
    return StepResult::unbounded;
  }

  const bool flip = block_pos < 0 || own < best;
  const double step = flip ? own : best;
  if (step <= kDegenTol) {
    if (++degenerate_run_ >= opts_.bland_trigger) bland_mode_ = true;
  } else {
    degenerate_run_ = 0;
    bland_mode_ = false;
  }

  if (flip) {
    // Bound flip: the entering variable crosses to its opposite bound.
    for (int pos = 0; pos < n_rows(); ++pos) {
      x_basic_[pos] -= step * enter_dir * w[pos];
    }
    status_of(entering) =
        enter_dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
  } else {
    apply_pivot(entering, block_pos, enter_val + enter_dir * step, w,
                block_status);
  }
  ++total_pivots_;
  ++solve_pivots_;
  ++pivots_since_refactor_;
  return StepResult::pivoted;
}

SimplexSolver::StepResult SimplexSolver::dual_step() {
  // Leaving row: worst primal violation (Dantzig) or lowest id (Bland).
  const bool bland = bland_mode_ || forced_pricing_ == Pricing::bland;
  int row = -1;
  bool below = false;
  double worst = 0.0;
  for (int pos = 0; pos < n_rows(); ++pos) {
    const int id = basis_.basic[pos];
    const double x = x_basic_[pos];
    const double tol = opts_.feas_tol * (1.0 + std::fabs(x));
    double viol = 0.0;
    bool b = false;
    if (x < lo_of(id) - tol) {
      viol = lo_of(id) - x;
      b = true;
    } else if (x > hi_of(id) + tol) {
      viol = x - hi_of(id);
    }
    if (viol <= 0.0) continue;
    if (bland) {
      if (row < 0 || basis_.basic[pos] < basis_.basic[row]) {
        row = pos;
        below = b;
        worst = viol;
      }
    } else if (viol > worst) {
      row = pos;
      below = b;
      worst = viol;
    }
  }
  if (row < 0) return StepResult::optimal;

  // Row of B^{-1}N and current duals.
  std::vector<double> psi(n_rows(), 0.0);
  psi[row] = 1.0;
  btran(psi);
  std::vector<double> v(n_rows());
  for (int pos = 0; pos < n_rows(); ++pos) v[pos] = cost_of(basis_.basic[pos]);
  btran(v);

  int entering = 0;
  bool have_entering = false;
  double best_ratio = kInf;
  double best_alpha = 0.0;

  auto consider = [&](int id) {
    if (status_of(id) == VarStatus::basic) return;
    const double lo = lo_of(id), hi = hi_of(id);
    if (lo == hi) return;
    const double alpha = column_dot(id, psi);
    if (std::fabs(alpha) <= opts_.pivot_tol) return;
    const VarStatus st = status_of(id);
    // Entering movement direction demanded by the leaving row.
    // below: x_row must increase => delta_t = (x_row - lo_row)/alpha with
    // x_row - lo_row < 0, so alpha < 0 means delta_t > 0 (entering rises).
    int dir;
    if (below) dir = alpha < 0.0 ? 1 : -1;
    else dir = alpha > 0.0 ? 1 : -1;
    if (dir > 0) {
      if (st == VarStatus::at_upper) return;
      if (st == VarStatus::free_zero && hi <= 0.0) return;
    } else {
      if (st == VarStatus::at_lower) return;
      if (st == VarStatus::free_zero && lo >= 0.0) return;
    }
    const double d = cost_of(id) - column_dot(id, v);
    const double ratio = std::fabs(d) / std::fabs(alpha);
    const bool better =
        !have_entering || ratio < best_ratio - kDegenTol ||
        (ratio < best_ratio + kDegenTol &&
         (bland ? id < entering : std::fabs(alpha) > std::fabs(best_alpha)));
    if (better) {
      entering = id;
      have_entering = true;
      best_ratio = ratio;
      best_alpha = alpha;
    }
  };
  for (int j = 0; j < n_struct(); ++j) consider(j);
  for (int i = 0; i < n_rows(); ++i) consider(slack_id(i));

  if (!have_entering) {
    // Dual ray certifying primal infeasibility: v + t*ray stays dual
    // feasible for every present column as t grows.
    farkas_ray_.assign(n_rows(), 0.0);
    for (int i = 0; i < n_rows(); ++i) {
      farkas_ray_[i] = below ? -psi[i] : psi[i];
    }
    return StepResult::infeasible;
  }

  std::vector<double> w;
  column_of(entering, w);
  ftran(w);
  if (std::fabs(w[row] - best_alpha) >
      kPivotConsistencyTol * (1.0 + std::fabs(best_alpha))) {
    if (pivots_since_refactor_ > 0) return StepResult::refactor;
    throw NumericalFailure("pivot row/column disagreement after refactorization");
  }

  const int leave_id = basis_.basic[row];
  const double target = below ? lo_of(leave_id) : hi_of(leave_id);
  const double delta = (x_basic_[row] - target) / w[row];
  const VarStatus leave_status = below ? VarStatus::at_lower : VarStatus::at_upper;

  if (best_ratio <= kDegenTol) {
    if (++degenerate_run_ >= opts_.bland_trigger) bland_mode_ = true;
  } else {
    degenerate_run_ = 0;
    bland_mode_ = false;
  }

  apply_pivot(entering, row, nonbasic_value(entering) + delta, w, leave_status);
  ++total_pivots_;
  ++solve_pivots_;
  ++pivots_since_refactor_;
  return StepResult::pivoted;
}

void SimplexSolver::apply_pivot(int entering, int leaving_pos, double enter_value,
                                const std::vector<double>& fcol,
                                VarStatus leaving_status) {
  const int leaving = basis_.basic[leaving_pos];
  const double delta = enter_value - nonbasic_value(entering);
  if (delta != 0.0) {
    for (int pos = 0; pos < n_rows(); ++pos) {
      x_basic_[pos] -= delta * fcol[pos];
    }
  }
  basis_.basic[leaving_pos] = entering;
  status_of(entering) = VarStatus::basic;
  status_of(leaving) = leaving_status;
  x_basic_[leaving_pos] = enter_value;
  etas_.push_back(fcol);
  eta_rows_.push_back(leaving_pos);
  if (opts_.pivot_observer) opts_.pivot_observer(basis_.basic);
}

LpSolution SimplexSolver::assemble_solution(SolveStatus status) {
  LpSolution sol;
  sol.status = status;
  sol.pivots = solve_pivots_;
  sol.x.assign(n_struct(), 0.0);
  for (int j = 0; j < n_struct(); ++j) {
    if (basis_.struct_status[j] != VarStatus::basic) sol.x[j] = nonbasic_value(j);
  }
  for (int pos = 0; pos < n_rows(); ++pos) {
    const int id = basis_.basic[pos];
    if (id >= 0) sol.x[id] = x_basic_[pos];
  }
  std::vector<double> v(n_rows());
  for (int pos = 0; pos < n_rows(); ++pos) v[pos] = cost_of(basis_.basic[pos]);
  if (n_rows() > 0) btran(v);
  sol.duals = v;
  sol.reduced_costs.assign(n_struct(), 0.0);
  double obj = 0.0;
  for (int j = 0; j < n_struct(); ++j) {
    obj += model_.c[j] * sol.x[j];
    sol.reduced_costs[j] = basis_.struct_status[j] == VarStatus::basic
                               ? 0.0
                               : model_.c[j] - model_.a.col_dot(j, v);
  }
  sol.objective = obj;
  sol.max_primal_violation = 0.0;
  for (int pos = 0; pos < n_rows(); ++pos) {
    sol.max_primal_violation = std::max(
        sol.max_primal_violation,
        primal_violation(basis_.basic[pos], x_basic_[pos]));
  }
  sol.max_dual_violation = 0.0;
  for (int j = 0; j < n_struct(); ++j) {
    if (basis_.struct_status[j] == VarStatus::basic) continue;
    sol.max_dual_violation =
        std::max(sol.max_dual_violation, dual_infeasibility(j, sol.reduced_costs[j]));
  }
  for (int i = 0; i < n_rows(); ++i) {
    if (basis_.slack_status[i] == VarStatus::basic) continue;
    sol.max_dual_violation =
        std::max(sol.max_dual_violation, dual_infeasibility(slack_id(i), v[i]));
  }
  if (status == SolveStatus::infeasible) sol.farkas = farkas_ray_;
  return sol;
}

LpSolution SimplexSolver::solve() {
  normalize_statuses();
  if (!factor_valid_) {
    refactorize();
  }
  compute_basic_values();
  solve_pivots_ = 0;
  degenerate_run_ = 0;
  bland_mode_ = false;

  for (;;) {
    if (solve_pivots_ >= opts_.max_pivots) {
      return assemble_solution(SolveStatus::iteration_limit);
    }
    if (pivots_since_refactor_ >= opts_.refactor_interval) {
      refactorize();
      compute_basic_values();
    }
    StepResult res;
    const double pinf = max_primal_infeasibility();
    if (pinf <= opts_.feas_tol) {
      res = primal_step(false);
      if (res == StepResult::optimal) {
        return assemble_solution(SolveStatus::optimal);
      }
      if (res == StepResult::unbounded) {
        return assemble_solution(SolveStatus::unbounded);
      }
    } else if (max_dual_infeasibility() <= opts_.feas_tol) {
      res = dual_step();
      if (res == StepResult::infeasible) {
        return assemble_solution(SolveStatus::infeasible);
      }
      if (res == StepResult::optimal) continue;  // re-dispatch
    } else {
      res = primal_step(true);
      if (res == StepResult::optimal) {
        // No eligible entering column for the infeasibility objective.
        if (max_primal_infeasibility() > opts_.feas_tol) {
          // Phase-1 duals certify infeasibility.
          farkas_ray_.assign(n_rows(), 0.0);
          phase_one_costs(farkas_ray_);
          btran(farkas_ray_);
          return assemble_solution(SolveStatus::infeasible);
        }
        continue;
      }
    }
    if (res == StepResult::refactor) {
      refactorize();
      compute_basic_values();
    }
  }
}

void SimplexSolver::add_columns(std::span<const NewColumn> cols) {
  const bool with_basis = !basis_.empty();
  for (const auto& col : cols) {
    if (!(col.lo <= col.hi)) throw InvalidBound("new column bounds");
    model_.a.append_column(col.entries);  // validates row range and order
    model_.c.push_back(col.cost);
    model_.var_bounds.push_back({col.lo, col.hi});
    if (with_basis) {
      basis_.struct_status.push_back(col.lo > -kInf  ? VarStatus::at_lower
                                     : col.hi < kInf ? VarStatus::at_upper
                                                     : VarStatus::free_zero);
    }
  }
  // Basis matrix untouched: factorization stays valid.
}

void SimplexSolver::add_rows(std::span<const NewRow> rows) {
  const bool with_basis = !basis_.empty();
  const int base = n_rows();
  std::vector<std::vector<std::pair<int, double>>> entries;
  entries.reserve(rows.size());
  for (const auto& row : rows) {
    if (!(row.lo <= row.hi)) throw InvalidBound("new row bounds");
    entries.push_back(row.entries);
  }
  model_.a.append_rows(entries);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    model_.row_bounds.push_back({rows[k].lo, rows[k].hi});
    if (with_basis) {
      basis_.slack_status.push_back(VarStatus::basic);
      basis_.basic.push_back(slack_id(base + static_cast<int>(k)));
    }
  }
  factor_valid_ = false;
}

void SimplexSolver::set_row_bounds(int row, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidBound("row " + std::to_string(row));
  model_.row_bounds[row] = {lo, hi};
}

void SimplexSolver::set_var_bounds(int col, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidBound("variable " + std::to_string(col));
  model_.var_bounds[col] = {lo, hi};
}

void SimplexSolver::dump(std::ostream& os) const {
  os << "min";
  for (int j = 0; j < n_struct(); ++j) {
    if (model_.c[j] != 0.0) os << " + " << model_.c[j] << " x" << j;
  }
  os << "\n";
  std::vector<double> dense = model_.a.to_dense();
  for (int i = 0; i < n_rows(); ++i) {
    os << model_.row_bounds[i].lo << " <=";
    for (int j = 0; j < n_struct(); ++j) {
      const double v = dense[static_cast<std::size_t>(j) * n_rows() + i];
      if (v != 0.0) os << " + " << v << " x" << j;
    }
    os << " <= " << model_.row_bounds[i].hi << "\n";
  }
  for (int j = 0; j < n_struct(); ++j) {
    os << model_.var_bounds[j].lo << " <= x" << j << " <= "
       << model_.var_bounds[j].hi << "\n";
  }
}

std::pair<LpSolution, Basis> solve(const LpModel& model, const Basis* warm,
                                   SolverOptions opts) {
  SimplexSolver solver(model, opts);
  if (warm != nullptr) solver.set_basis(*warm);
  LpSolution sol = solver.solve();
  return {std::move(sol), solver.basis()};
}

}  // namespace dlp
