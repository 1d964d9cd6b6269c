// SPDX-License-Identifier: Apache-2.0

#include "dlp/dantzig.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dlp/errors.hpp"
#include "dlp/kernels.hpp"

namespace dlp {

namespace {

std::vector<std::uint8_t> make_mask(int p, std::span<const int> idx) {
  std::vector<std::uint8_t> mask(p, 0);
  for (int i : idx) mask[i] = 1;
  return mask;
}

// Full scan with an exclusion mask; returns (excess, index) ranked by excess
// descending, ties toward the lower index.
std::vector<int> ranked_scan(const SparseMatrix& x, std::span<const double> vec,
                             double threshold, double eps, int limit,
                             const std::vector<std::uint8_t>& excluded) {
  std::vector<std::pair<double, int>> hits;
  for (int j = 0; j < x.n_cols(); ++j) {
    if (excluded[j]) continue;
    const double v = std::fabs(x.col_dot(j, vec));
    if (v > threshold + eps) hits.emplace_back(v - threshold, j);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (limit >= 0 && static_cast<int>(hits.size()) > limit) hits.resize(limit);
  std::vector<int> out;
  out.reserve(hits.size());
  for (const auto& [excess, j] : hits) out.push_back(j);
  return out;
}

std::vector<int> full_range(int p) {
  std::vector<int> all(p);
  std::iota(all.begin(), all.end(), 0);
  return all;
}

// Generation state around one warm-started solver session.
class DsSession {
 public:
  DsSession(const SparseMatrix& x, std::span<const double> y, double lambda,
            std::vector<int> constraint_set, std::vector<int> column_set,
            const DantzigOptions& opts)
      : x_(x),
        y_(y),
        lambda_(lambda),
        opts_(opts),
        in_constraints_(make_mask(x.n_cols(), constraint_set)),
        in_columns_(make_mask(x.n_cols(), column_set)),
        constraint_rows_(std::move(constraint_set)),
        column_order_(std::move(column_set)),
        solver_(build_reduced_ds(x, y, lambda, constraint_rows_, column_order_),
                opts.lp) {}

  // Retarget the session to a smaller lambda: range-row bounds move, the
  // basis stays.
  void set_lambda(double lambda) {
    lambda_ = lambda;
    for (std::size_t t = 0; t < constraint_rows_.size(); ++t) {
      solver_.set_row_bounds(n() + static_cast<int>(t), -lambda, lambda);
    }
  }

  DantzigSolution run() {
    const auto start = std::chrono::steady_clock::now();
    const std::int64_t pivots_at_entry = solver_.total_pivots();
    DantzigSolution out;
    out.lambda = lambda_;
    LpSolution lp = solver_.solve();
    int outer = 0;
    for (; outer < opts_.max_outer_iter; ++outer) {
      if (lp.status == SolveStatus::iteration_limit) break;
      if (lp.status == SolveStatus::infeasible) {
        const int restored = add_farkas_columns(lp);
        if (restored == 0) {
          throw InitInfeasible("reduced model infeasible and no column prices the ray");
        }
        lp = solver_.solve();
        record(lp, 0, restored);
        continue;
      }
      if (lp.status != SolveStatus::optimal) {
        throw NumericalFailure("unexpected LP status in generation loop");
      }

      std::span<const double> r(lp.x.data(), n());
      std::vector<int> violated_rows = ranked_scan(
          x_, r, lambda_, opts_.eps, opts_.row_batch, in_constraints_);
      if (!violated_rows.empty()) {
        add_constraint_rows(violated_rows);
        lp = solver_.solve();
        record(lp, static_cast<int>(violated_rows.size()), 0);
        continue;
      }

      std::vector<double> alpha = dual_alpha(lp);
      std::vector<int> violated_cols =
          ranked_scan(x_, alpha, 1.0, opts_.eps, opts_.col_batch, in_columns_);
      if (!violated_cols.empty()) {
        add_column_pairs(violated_cols);
        lp = solver_.solve();
        record(lp, 0, static_cast<int>(violated_cols.size()));
        continue;
      }
      break;
    }
    out = finalize(lp, outer, std::move(out));
    out.pivots -= pivots_at_entry;
    if (!opts_.dump_lp_path.empty()) {
      std::ofstream dump_out(opts_.dump_lp_path);
      solver_.dump(dump_out);
    }
    out.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return out;
  }

  std::int64_t total_pivots() const { return solver_.total_pivots(); }

 private:
  int n() const { return x_.n_rows(); }
  int p() const { return x_.n_cols(); }

  std::vector<double> dual_alpha(const LpSolution& lp) const {
    // Sign convention: alpha enters the dual objective as -alpha'y, the
    // engine's duals enter as +v'y on the equality rows.
    std::vector<double> alpha(n());
    for (int i = 0; i < n(); ++i) alpha[i] = -lp.duals[i];
    return alpha;
  }

  void add_constraint_rows(const std::vector<int>& rows) {
    std::vector<NewRow> new_rows;
    new_rows.reserve(rows.size());
    for (int i : rows) {
      NewRow row;
      auto r_rows = x_.col_rows(i);
      auto r_vals = x_.col_values(i);
      row.entries.reserve(r_rows.size());
      for (std::size_t k = 0; k < r_rows.size(); ++k) {
        row.entries.emplace_back(r_rows[k], r_vals[k]);  // hits r columns
      }
      row.lo = -lambda_;
      row.hi = lambda_;
      new_rows.push_back(std::move(row));
      in_constraints_[i] = 1;
      constraint_rows_.push_back(i);
    }
    solver_.add_rows(new_rows);
  }

  void add_column_pairs(const std::vector<int>& cols) {
    std::vector<NewColumn> new_cols;
    new_cols.reserve(2 * cols.size());
    for (int j : cols) {
      auto rows = x_.col_rows(j);
      auto vals = x_.col_values(j);
      NewColumn plus{1.0, {}, 0.0, kInf};
      NewColumn minus{1.0, {}, 0.0, kInf};
      plus.entries.reserve(rows.size());
      minus.entries.reserve(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        plus.entries.emplace_back(rows[k], vals[k]);
        minus.entries.emplace_back(rows[k], -vals[k]);
      }
      new_cols.push_back(std::move(plus));
      new_cols.push_back(std::move(minus));
      in_columns_[j] = 1;
      column_order_.push_back(j);
    }
    solver_.add_columns(new_cols);
  }

  int add_farkas_columns(const LpSolution& lp) {
    if (lp.farkas.empty()) return 0;
    std::span<const double> ray(lp.farkas.data(), n());
    std::vector<int> blockers =
        ranked_scan(x_, ray, 0.0, 1e-9, opts_.col_batch, in_columns_);
    add_column_pairs(blockers);
    return static_cast<int>(blockers.size());
  }

  void record(const LpSolution& lp, int added_rows, int added_cols) {
    GenerationRecord rec;
    rec.iteration = static_cast<int>(trace_.size()) + 1;
    rec.n_constraints = static_cast<int>(constraint_rows_.size());
    rec.n_columns = static_cast<int>(column_order_.size());
    rec.added_constraints = added_rows;
    rec.added_columns = added_cols;
    rec.reduced_objective = lp.objective;
    rec.pivots = solver_.total_pivots();
    trace_.push_back(rec);
  }

  DantzigSolution finalize(const LpSolution& lp, int outer, DantzigSolution out) {
    out.beta.assign(p(), 0.0);
    for (std::size_t t = 0; t < column_order_.size(); ++t) {
      const int j = column_order_[t];
      out.beta[j] = lp.x[n() + 2 * t] - lp.x[n() + 2 * t + 1];
    }
    out.residual.assign(lp.x.begin(), lp.x.begin() + n());
    out.alpha = dual_alpha(lp);
    out.objective = lp.objective;
    out.pivots = solver_.total_pivots();
    out.trace = trace_;

    // Certification scan over the full index range, always performed once.
    std::vector<double> corr(p(), 0.0);
    x_.tmul(out.residual, corr);
    double cviol = 0.0;
    for (double v : corr) cviol = std::max(cviol, std::fabs(v) - lambda_);
    out.max_constraint_violation = std::max(cviol, 0.0);
    std::vector<double> col_corr(p(), 0.0);
    x_.tmul(out.alpha, col_corr);
    double dviol = 0.0;
    for (double v : col_corr) dviol = std::max(dviol, std::fabs(v) - 1.0);
    out.max_column_violation = std::max(dviol, 0.0);

    // Dual bound -lambda*sum(nu+ + nu-) - alpha'y, with nu the range-row
    // duals.
    double nu_sum = 0.0;
    for (std::size_t t = 0; t < constraint_rows_.size(); ++t) {
      nu_sum += std::fabs(lp.duals[n() + t]);
    }
    out.dual_objective =
        -lambda_ * nu_sum -
        kernels::dot(out.alpha.data(), y_.data(), static_cast<std::size_t>(n()));

    out.sets.constraints = constraint_rows_;
    out.sets.columns = column_order_;
    std::sort(out.sets.constraints.begin(), out.sets.constraints.end());
    std::sort(out.sets.columns.begin(), out.sets.columns.end());

    const bool clean = lp.status == SolveStatus::optimal &&
                       out.max_constraint_violation <= opts_.eps &&
                       out.max_column_violation <= opts_.eps &&
                       outer < opts_.max_outer_iter;
    out.status = clean ? EstimatorStatus::optimal : EstimatorStatus::iteration_limit;
    return out;
  }

  const SparseMatrix& x_;
  std::span<const double> y_;
  double lambda_;
  DantzigOptions opts_;
  std::vector<std::uint8_t> in_constraints_;
  std::vector<std::uint8_t> in_columns_;
  std::vector<int> constraint_rows_;  // constraint index per range row
  std::vector<int> column_order_;     // coefficient index per column pair
  SimplexSolver solver_;
  std::vector<GenerationRecord> trace_;
};

// Working sets for one lambda: lasso fit unless overridden.
std::pair<std::vector<int>, std::vector<int>> initial_sets(
    const SparseMatrix& x, std::span<const double> y, double lambda,
    const DantzigOptions& opts, const LassoFit* fit) {
  std::vector<int> constraints, columns;
  if (opts.initial_sets) {
    constraints = opts.initial_sets->constraints;
    columns = opts.initial_sets->columns;
  } else if (fit != nullptr) {
    ActiveSets sets = active_sets(x, *fit, lambda, default_eps_act(lambda));
    constraints = std::move(sets.constraints);
    columns = std::move(sets.columns);
  }
  if (columns.empty()) {
    // Degenerate empty model guard: seed with the most correlated column.
    std::vector<double> corr(x.n_cols(), 0.0);
    x.tmul(y, corr);
    int best = 0;
    for (int j = 1; j < x.n_cols(); ++j) {
      if (std::fabs(corr[j]) > std::fabs(corr[best])) best = j;
    }
    columns.push_back(best);
  }
  if (!opts.generate_columns) columns = full_range(x.n_cols());
  if (!opts.generate_constraints) constraints = full_range(x.n_cols());
  return {std::move(constraints), std::move(columns)};
}

void validate_inputs(const SparseMatrix& x, std::span<const double> y,
                     double lambda) {
  if (static_cast<int>(y.size()) != x.n_rows()) {
    throw DimensionMismatch("response length vs design rows");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw NonFiniteInput("lambda");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw NonFiniteInput("response vector");
  }
}

}  // namespace

LpModel build_reduced_ds(const SparseMatrix& x, std::span<const double> y,
                         double lambda, std::span<const int> constraint_set,
                         std::span<const int> column_set) {
  const int n = x.n_rows();
  const int n_range = static_cast<int>(constraint_set.size());
  std::vector<std::vector<std::pair<int, double>>> cols;
  cols.resize(n + 2 * column_set.size());

  for (int k = 0; k < n; ++k) cols[k].emplace_back(k, 1.0);
  for (int t = 0; t < n_range; ++t) {
    const int i = constraint_set[t];
    auto rows = x.col_rows(i);
    auto vals = x.col_values(i);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      cols[rows[k]].emplace_back(n + t, vals[k]);
    }
  }
  for (std::size_t t = 0; t < column_set.size(); ++t) {
    const int j = column_set[t];
    auto rows = x.col_rows(j);
    auto vals = x.col_values(j);
    auto& plus = cols[n + 2 * t];
    auto& minus = cols[n + 2 * t + 1];
    for (std::size_t k = 0; k < rows.size(); ++k) {
      plus.emplace_back(rows[k], vals[k]);
      minus.emplace_back(rows[k], -vals[k]);
    }
  }

  std::vector<double> c(n + 2 * column_set.size(), 1.0);
  std::fill(c.begin(), c.begin() + n, 0.0);
  std::vector<RowBound> row_bounds(n + n_range);
  for (int i = 0; i < n; ++i) row_bounds[i] = {y[i], y[i]};
  for (int t = 0; t < n_range; ++t) row_bounds[n + t] = {-lambda, lambda};
  std::vector<VarBound> var_bounds(n + 2 * column_set.size(), {0.0, kInf});
  for (int i = 0; i < n; ++i) var_bounds[i] = {-kInf, kInf};

  return build_model(std::move(c),
                     SparseMatrix::from_columns(n + n_range, cols),
                     std::move(row_bounds), std::move(var_bounds));
}

std::vector<int> violation_scan_constraints(const SparseMatrix& x,
                                            std::span<const double> r,
                                            double lambda, double eps, int limit,
                                            std::span<const int> exclude) {
  for (double v : r) {
    if (!std::isfinite(v)) throw NonFiniteInput("residual");
  }
  return ranked_scan(x, r, lambda, eps, limit, make_mask(x.n_cols(), exclude));
}

std::vector<int> violation_scan_columns(const SparseMatrix& x,
                                        std::span<const double> alpha, double eps,
                                        int limit, std::span<const int> exclude) {
  return ranked_scan(x, alpha, 1.0, eps, limit, make_mask(x.n_cols(), exclude));
}

DantzigSolution solve_ds(const SparseMatrix& x, std::span<const double> y,
                         double lambda, const DantzigOptions& opts) {
  validate_inputs(x, y, lambda);
  const auto start = std::chrono::steady_clock::now();
  LassoFit fit;
  const LassoFit* fit_ptr = nullptr;
  if (!opts.initial_sets &&
      (opts.generate_columns || opts.generate_constraints)) {
    fit = lasso_fit(x, y, lambda, nullptr, opts.lasso);
    fit_ptr = &fit;
  }
  auto [constraints, columns] = initial_sets(x, y, lambda, opts, fit_ptr);
  DsSession session(x, y, lambda, std::move(constraints), std::move(columns),
                    opts);
  DantzigSolution sol = session.run();
  sol.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return sol;
}

std::vector<DantzigSolution> solve_ds_path(const SparseMatrix& x,
                                           std::span<const double> y,
                                           std::span<const double> lambda_grid,
                                           const DantzigOptions& opts) {
  if (lambda_grid.empty()) throw EmptyGrid("lambda grid");
  for (std::size_t k = 1; k < lambda_grid.size(); ++k) {
    if (lambda_grid[k] >= lambda_grid[k - 1]) {
      throw InvalidAnchor("lambda grid must be strictly decreasing");
    }
  }
  validate_inputs(x, y, lambda_grid.back());

  // Densest lasso solution (smallest lambda) seeds the first, largest one.
  const auto start = std::chrono::steady_clock::now();
  LassoFit fit = lasso_fit(x, y, lambda_grid.back(), nullptr, opts.lasso);
  auto [constraints, columns] =
      initial_sets(x, y, lambda_grid.back(), opts, &fit);
  const double init_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  DsSession session(x, y, lambda_grid.front(), std::move(constraints),
                    std::move(columns), opts);
  std::vector<DantzigSolution> path;
  path.reserve(lambda_grid.size());
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (k > 0) session.set_lambda(lambda_grid[k]);
    path.push_back(session.run());
  }
  path.front().solve_seconds += init_seconds;
  return path;
}

}  // namespace dlp
