// SPDX-License-Identifier: Apache-2.0

#include "dlp/fused_dantzig.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dlp/errors.hpp"
#include "dlp/fused_prox.hpp"
#include "dlp/kernels.hpp"

namespace dlp {

namespace {

// Suffix sums of the residual: g_i = sum_{k >= i} (y_k - beta_k).
std::vector<double> suffix_residual(std::span<const double> y,
                                    std::span<const double> beta) {
  const int n = static_cast<int>(y.size());
  std::vector<double> g(n, 0.0);
  double run = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    run += y[i] - beta[i];
    g[i] = run;
  }
  return g;
}

std::vector<std::uint8_t> index_mask(int n, std::span<const int> idx) {
  std::vector<std::uint8_t> mask(n, 0);
  for (int i : idx) mask[i] = 1;
  return mask;
}

class FusedSignalSession {
 public:
  FusedSignalSession(std::span<const double> y, double lambda,
                     std::vector<int> enforced, std::vector<int> columns,
                     const DantzigOptions& opts)
      : y_(y),
        opts_(opts),
        model_(build_fused_model(y, lambda, enforced, columns)),
        in_enforced_(index_mask(static_cast<int>(y.size()), enforced)),
        in_columns_(index_mask(static_cast<int>(y.size()), columns)),
        solver_(model_.lp, opts.lp) {}

  DantzigSolution run() {
    LpSolution lp = solver_.solve();
    int outer = 0;
    for (; outer < opts_.max_outer_iter; ++outer) {
      if (lp.status == SolveStatus::iteration_limit) break;
      if (lp.status == SolveStatus::infeasible) {
        const int restored = add_farkas_columns(lp);
        if (restored == 0) {
          throw InitInfeasible("reduced fused model infeasible beyond repair");
        }
        lp = solver_.solve();
        record(lp, 0, restored);
        continue;
      }

      std::vector<int> violated = scan_constraints(lp);
      if (!violated.empty()) {
        for (int i : violated) {
          solver_.set_var_bounds(model_.g_col(i), -model_.lambda, model_.lambda);
          in_enforced_[i] = 1;
          model_.enforced.push_back(i);
        }
        lp = solver_.solve();
        record(lp, static_cast<int>(violated.size()), 0);
        continue;
      }

      std::vector<double> link_duals(lp.duals.begin(), lp.duals.begin() + n());
      std::vector<int> priced =
          price_fused_columns(link_duals, model_.columns, opts_.eps,
                              opts_.col_batch);
      if (!priced.empty()) {
        add_column_pairs(priced);
        lp = solver_.solve();
        record(lp, 0, static_cast<int>(priced.size()));
        continue;
      }
      break;
    }
    if (!opts_.dump_lp_path.empty()) {
      std::ofstream dump_out(opts_.dump_lp_path);
      solver_.dump(dump_out);
    }
    return finalize(lp, outer);
  }

 private:
  int n() const { return model_.n; }

  std::vector<int> scan_constraints(const LpSolution& lp) const {
    std::vector<double> g(n());
    for (int i = 0; i < n(); ++i) g[i] = lp.x[model_.g_col(i)];
    std::vector<int> candidates = check_fused_constraints(
        g, model_.enforced, model_.lambda, opts_.eps, opts_.row_batch);
    return candidates;
  }

  void add_column_pairs(const std::vector<int>& idx) {
    std::vector<NewColumn> cols;
    cols.reserve(2 * idx.size());
    for (int j : idx) {
      NewColumn plus{1.0, {{model_.diff_row(j), 1.0}}, 0.0, kInf};
      NewColumn minus{1.0, {{model_.diff_row(j), -1.0}}, 0.0, kInf};
      cols.push_back(std::move(plus));
      cols.push_back(std::move(minus));
      in_columns_[j] = 1;
      model_.columns.push_back(j);
    }
    solver_.add_columns(cols);
  }

  int add_farkas_columns(const LpSolution& lp) {
    std::vector<std::pair<double, int>> blockers;
    for (int j = 1; j < n(); ++j) {
      if (in_columns_[j]) continue;
      const double s = std::fabs(lp.farkas[model_.diff_row(j)]);
      if (s > 1e-9) blockers.emplace_back(s, j);
    }
    std::sort(blockers.begin(), blockers.end(), [](auto a, auto b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    if (static_cast<int>(blockers.size()) > opts_.col_batch) {
      blockers.resize(opts_.col_batch);
    }
    std::vector<int> idx;
    for (auto [s, j] : blockers) idx.push_back(j);
    add_column_pairs(idx);
    return static_cast<int>(idx.size());
  }

  void record(const LpSolution& lp, int added_rows, int added_cols) {
    GenerationRecord rec;
    rec.iteration = static_cast<int>(trace_.size()) + 1;
    rec.n_constraints = static_cast<int>(model_.enforced.size());
    rec.n_columns = static_cast<int>(model_.columns.size());
    rec.added_constraints = added_rows;
    rec.added_columns = added_cols;
    rec.reduced_objective = lp.objective;
    rec.pivots = solver_.total_pivots();
    trace_.push_back(rec);
  }

  DantzigSolution finalize(const LpSolution& lp, int outer) {
    DantzigSolution out;
    out.lambda = model_.lambda;
    out.beta.assign(n(), 0.0);
    for (int k = 0; k < n(); ++k) out.beta[k] = lp.x[model_.beta_col(k)];
    out.residual.assign(n(), 0.0);
    for (int k = 0; k < n(); ++k) out.residual[k] = lp.x[model_.r_col(k)];
    out.alpha.assign(lp.duals.begin(), lp.duals.begin() + n());
    out.objective = lp.objective;
    out.pivots = solver_.total_pivots();
    out.trace = trace_;

    // Full certificate on the recomputed chain.
    std::vector<double> g = suffix_residual(y_, out.beta);
    double cviol = 0.0;
    for (int i = 1; i < n(); ++i) {
      cviol = std::max(cviol, std::fabs(g[i]) - model_.lambda);
    }
    cviol = std::max(cviol, std::fabs(g[0]));  // g_1 = 0 block
    out.max_constraint_violation = std::max(cviol, 0.0);
    double dviol = 0.0;
    for (int j = 1; j < n(); ++j) {
      dviol = std::max(dviol, std::fabs(out.alpha[j]) - 1.0);
    }
    out.max_column_violation = std::max(dviol, 0.0);

    // Dual bound: residual-row duals against y minus lambda-weighted
    // multipliers on the enforced g boxes.
    double dual_obj = 0.0;
    for (int k = 0; k < n(); ++k) dual_obj += lp.duals[model_.resid_row(k)] * y_[k];
    for (int i : model_.enforced) {
      dual_obj -= model_.lambda * std::fabs(lp.reduced_costs[model_.g_col(i)]);
    }
    out.dual_objective = dual_obj;

    out.sets.constraints = model_.enforced;
    out.sets.columns = model_.columns;
    std::sort(out.sets.constraints.begin(), out.sets.constraints.end());
    std::sort(out.sets.columns.begin(), out.sets.columns.end());

    const bool clean = lp.status == SolveStatus::optimal &&
                       out.max_constraint_violation <= opts_.eps &&
                       out.max_column_violation <= opts_.eps &&
                       outer < opts_.max_outer_iter;
    out.status =
        clean ? EstimatorStatus::optimal : EstimatorStatus::iteration_limit;
    return out;
  }

  std::span<const double> y_;
  DantzigOptions opts_;
  FusedDsModel model_;
  std::vector<std::uint8_t> in_enforced_;
  std::vector<std::uint8_t> in_columns_;
  SimplexSolver solver_;
  std::vector<GenerationRecord> trace_;
};

}  // namespace

FusedDsModel build_fused_model(std::span<const double> y, double lambda,
                               std::span<const int> enforced,
                               std::span<const int> columns) {
  const int n = static_cast<int>(y.size());
  FusedDsModel m;
  m.n = n;
  m.lambda = lambda;
  m.enforced.assign(enforced.begin(), enforced.end());
  m.columns.assign(columns.begin(), columns.end());

  const int n_cols = 1 + 3 * n + 2 * static_cast<int>(columns.size());
  std::vector<std::vector<std::pair<int, double>>> cols(n_cols);

  cols[m.alpha1_col()].emplace_back(m.diff_row(0), 1.0);
  for (int k = 0; k < n; ++k) {
    auto& bc = cols[m.beta_col(k)];
    bc.emplace_back(m.diff_row(k), -1.0);
    if (k + 1 < n) bc.emplace_back(m.diff_row(k + 1), 1.0);
    bc.emplace_back(m.resid_row(k), 1.0);

    auto& rc = cols[m.r_col(k)];
    rc.emplace_back(m.resid_row(k), 1.0);
    rc.emplace_back(m.glink_row(k), 1.0);

    auto& gc = cols[m.g_col(k)];
    if (k > 0) gc.emplace_back(m.glink_row(k - 1), 1.0);
    gc.emplace_back(m.glink_row(k), -1.0);
  }
  for (std::size_t t = 0; t < columns.size(); ++t) {
    const int j = columns[t];
    cols[m.pair_col(static_cast<int>(t))].emplace_back(m.diff_row(j), 1.0);
    cols[m.pair_col(static_cast<int>(t)) + 1].emplace_back(m.diff_row(j), -1.0);
  }

  std::vector<double> c(n_cols, 0.0);
  for (std::size_t t = 0; t < 2 * columns.size(); ++t) c[1 + 3 * n + t] = 1.0;

  std::vector<RowBound> rb(3 * n);
  for (int k = 0; k < n; ++k) {
    rb[m.diff_row(k)] = {0.0, 0.0};
    rb[m.resid_row(k)] = {y[k], y[k]};
    rb[m.glink_row(k)] = {0.0, 0.0};
  }
  std::vector<VarBound> vb(n_cols, {-kInf, kInf});
  vb[m.g_col(0)] = {0.0, 0.0};
  for (int i : enforced) {
    if (i > 0) vb[m.g_col(i)] = {-lambda, lambda};
  }
  for (std::size_t t = 0; t < 2 * columns.size(); ++t) {
    vb[1 + 3 * n + t] = {0.0, kInf};
  }

  m.lp = build_model(std::move(c), SparseMatrix::from_columns(3 * n, cols),
                     std::move(rb), std::move(vb));
  return m;
}

std::vector<int> price_fused_columns(std::span<const double> link_duals,
                                     std::span<const int> columns, double eps,
                                     int limit) {
  const int n = static_cast<int>(link_duals.size());
  std::vector<std::uint8_t> in_j = index_mask(n, columns);
  std::vector<std::pair<double, int>> hits;
  for (int j = 1; j < n; ++j) {
    if (in_j[j]) continue;
    const double reduced = 1.0 - std::fabs(link_duals[j]);
    if (reduced < -eps) hits.emplace_back(reduced, j);
  }
  std::sort(hits.begin(), hits.end(), [](auto a, auto b) {
    if (a.first != b.first) return a.first < b.first;  // most negative first
    return a.second < b.second;
  });
  if (limit >= 0 && static_cast<int>(hits.size()) > limit) hits.resize(limit);
  std::vector<int> out;
  for (auto [v, j] : hits) out.push_back(j);
  return out;
}

std::vector<int> check_fused_constraints(std::span<const double> g,
                                         std::span<const int> enforced,
                                         double lambda, double eps, int limit) {
  const int n = static_cast<int>(g.size());
  std::vector<std::uint8_t> in_i = index_mask(n, enforced);
  std::vector<std::pair<double, int>> hits;
  for (int i = 1; i < n; ++i) {
    if (in_i[i]) continue;
    const double excess = std::fabs(g[i]) - lambda;
    if (excess > eps) hits.emplace_back(excess, i);
  }
  std::sort(hits.begin(), hits.end(), [](auto a, auto b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (limit >= 0 && static_cast<int>(hits.size()) > limit) hits.resize(limit);
  std::vector<int> out;
  for (auto [v, i] : hits) out.push_back(i);
  return out;
}

DantzigSolution solve_fused_signal(std::span<const double> y, double lambda,
                                   const DantzigOptions& opts) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw NonFiniteInput("lambda");
  for (double v : y) {
    if (!std::isfinite(v)) throw NonFiniteInput("signal");
  }
  const int n = static_cast<int>(y.size());

  FusedFit fit = fused_dp(y, lambda);
  std::vector<double> g = suffix_residual(y, fit.beta);
  std::vector<int> enforced;
  const double act = lambda * (1.0 - 1e-6);
  for (int i = 1; i < n; ++i) {
    if (std::fabs(g[i]) >= act) enforced.push_back(i);
  }
  FusedSignalSession session(y, lambda, std::move(enforced), fit.knots, opts);
  return session.run();
}

ProjectedData project_fused_regression(const SparseMatrix& x,
                                       std::span<const double> y) {
  const int n = x.n_rows();
  const int p = x.n_cols();
  ProjectedData pd;

  // u = X * 1: the fitted direction of the unpenalized level variable.
  std::vector<double> u(n, 0.0);
  std::vector<double> ones(p, 1.0);
  x.mul(ones, u);
  const double u_norm_sq = kernels::dot(u.data(), u.data(), u.size());
  const bool project = u_norm_sq > 1e-24;
  if (project) pd.proj_dir = u;

  auto residualize = [&](std::vector<double>& v) {
    if (!project) return;
    const double coef = kernels::dot(u.data(), v.data(), v.size()) / u_norm_sq;
    kernels::axpy(-coef, u.data(), v.data(), v.size());
  };

  pd.y_tilde.assign(y.begin(), y.end());
  residualize(pd.y_tilde);

  // Suffix sums of the design columns, projected; built right-to-left so
  // each column costs one sparse accumulate.
  std::vector<double> dense(static_cast<std::size_t>(n) * (p - 1), 0.0);
  std::vector<double> acc(n, 0.0);
  for (int j = p - 1; j >= 1; --j) {
    kernels::sparse_axpy(1.0, x.col_rows(j).data(), x.col_values(j).data(),
                         x.col_rows(j).size(), acc.data());
    std::copy(acc.begin(), acc.end(),
              dense.begin() + static_cast<std::size_t>(j - 1) * n);
  }
  for (int t = 0; t < p - 1; ++t) {
    std::vector<double> col(dense.begin() + static_cast<std::size_t>(t) * n,
                            dense.begin() + static_cast<std::size_t>(t + 1) * n);
    residualize(col);
    std::copy(col.begin(), col.end(),
              dense.begin() + static_cast<std::size_t>(t) * n);
  }
  pd.x_tilde = SparseMatrix::from_dense(n, p - 1, dense, 1e-14);
  return pd;
}

DantzigSolution solve_fused_regression(const SparseMatrix& x,
                                       std::span<const double> y, double lambda,
                                       const DantzigOptions& opts) {
  const int n = x.n_rows();
  const int p = x.n_cols();
  if (static_cast<int>(y.size()) != n) {
    throw DimensionMismatch("response length vs design rows");
  }
  ProjectedData pd = project_fused_regression(x, y);

  // FISTA warm start on the original problem supplies both index sets.
  FusedFit init = fista_fused(x, y, lambda, {});
  std::vector<double> alpha_b(p - 1);
  for (int t = 0; t < p - 1; ++t) alpha_b[t] = init.alpha[t + 1];

  WorkingSets sets;
  for (int k : init.knots) sets.columns.push_back(k - 1);
  std::vector<double> resid = pd.y_tilde;
  pd.x_tilde.mul(alpha_b, resid, -1.0);
  const double act = lambda * (1.0 - 1e-6);
  for (int t = 0; t < p - 1; ++t) {
    if (std::fabs(pd.x_tilde.col_dot(t, resid)) >= act) {
      sets.constraints.push_back(t);
    }
  }

  DantzigOptions inner = opts;
  inner.initial_sets = std::move(sets);
  DantzigSolution proj = solve_ds(pd.x_tilde, pd.y_tilde, lambda, inner);

  // Recover the level: u'(y - X beta) = 0 fixes the first prefix term.
  std::vector<double> xh_alpha(n, 0.0);
  pd.x_tilde.mul(proj.beta, xh_alpha);
  // x_tilde is already projected; the level must be fit against the raw
  // suffix sums, so rebuild X H_B alpha from the original design.
  std::vector<double> beta_tail_prefix(p, 0.0);
  {
    double run = 0.0;
    for (int k = 0; k < p; ++k) {
      if (k >= 1) run += proj.beta[k - 1];
      beta_tail_prefix[k] = run;  // prefix sums of alpha_B
    }
  }
  std::vector<double> fit_tail(n, 0.0);
  x.mul(beta_tail_prefix, fit_tail);

  double level = 0.0;
  if (!pd.proj_dir.empty()) {
    const double u_norm_sq = kernels::dot(pd.proj_dir.data(), pd.proj_dir.data(),
                                          pd.proj_dir.size());
    double num = 0.0;
    for (int i = 0; i < n; ++i) num += pd.proj_dir[i] * (y[i] - fit_tail[i]);
    level = num / u_norm_sq;
  }

  DantzigSolution out = std::move(proj);
  out.lambda = lambda;
  std::vector<double> beta(p, 0.0);
  for (int k = 0; k < p; ++k) beta[k] = level + beta_tail_prefix[k];
  out.beta = std::move(beta);
  out.residual.assign(y.begin(), y.end());
  x.mul(out.beta, out.residual, -1.0);
  return out;
}

}  // namespace dlp
