// SPDX-License-Identifier: Apache-2.0

#include "dlp/basis_pursuit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dlp/errors.hpp"
#include "dlp/kernels.hpp"

namespace dlp {

namespace {

// Householder QR of the n x k column subset; returns the least-squares
// residual 2-norm of y against span(X_J). Rank deficiency is harmless: a
// dependent column simply contributes nothing.
double ls_residual_norm(const SparseMatrix& x, std::span<const int> cols,
                        std::span<const double> y) {
  const int n = x.n_rows();
  const int k = static_cast<int>(cols.size());
  if (k == 0) {
    return std::sqrt(kernels::dot(y.data(), y.data(), y.size()));
  }
  std::vector<double> a(static_cast<std::size_t>(n) * k, 0.0);
  for (int j = 0; j < k; ++j) {
    auto rows = x.col_rows(cols[j]);
    auto vals = x.col_values(cols[j]);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      a[static_cast<std::size_t>(j) * n + rows[t]] = vals[t];
    }
  }
  std::vector<double> rhs(y.begin(), y.end());
  std::vector<double> hh(n);
  const int steps = std::min(k, n);
  for (int j = 0; j < steps; ++j) {
    double* col = &a[static_cast<std::size_t>(j) * n];
    double norm = 0.0;
    for (int i = j; i < n; ++i) norm += col[i] * col[i];
    norm = std::sqrt(norm);
    if (norm < 1e-14) continue;
    const double alpha = col[j] >= 0 ? -norm : norm;
    double vnorm_sq = 0.0;
    hh[j] = col[j] - alpha;
    vnorm_sq += hh[j] * hh[j];
    for (int i = j + 1; i < n; ++i) {
      hh[i] = col[i];
      vnorm_sq += hh[i] * hh[i];
    }
    if (vnorm_sq < 1e-28) continue;
    for (int c = j; c < k; ++c) {
      double* target = &a[static_cast<std::size_t>(c) * n];
      double dot = 0.0;
      for (int i = j; i < n; ++i) dot += hh[i] * target[i];
      const double f = 2.0 * dot / vnorm_sq;
      for (int i = j; i < n; ++i) target[i] -= f * hh[i];
    }
    double dot = 0.0;
    for (int i = j; i < n; ++i) dot += hh[i] * rhs[i];
    const double f = 2.0 * dot / vnorm_sq;
    for (int i = j; i < n; ++i) rhs[i] -= f * hh[i];
  }
  double resid_sq = 0.0;
  for (int i = steps; i < n; ++i) resid_sq += rhs[i] * rhs[i];
  return std::sqrt(resid_sq);
}

std::vector<int> support_of(const std::vector<double>& beta) {
  std::vector<int> s;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) s.push_back(static_cast<int>(j));
  }
  return s;
}

// Residual of y against span(X_J) through the (ridge-jittered) Gram system.
std::vector<double> projection_residual(const SparseMatrix& x,
                                        std::span<const int> cols,
                                        std::span<const double> y) {
  std::vector<double> resid(y.begin(), y.end());
  const int k = static_cast<int>(cols.size());
  if (k == 0) return resid;

  std::vector<double> g(static_cast<std::size_t>(k) * k, 0.0);
  std::vector<double> w(k, 0.0);
  std::vector<double> dense(x.n_rows());
  for (int a = 0; a < k; ++a) {
    w[a] = x.col_dot(cols[a], y);
    dense.assign(x.n_rows(), 0.0);
    auto rows = x.col_rows(cols[a]);
    auto vals = x.col_values(cols[a]);
    for (std::size_t t = 0; t < rows.size(); ++t) dense[rows[t]] = vals[t];
    for (int b = 0; b < k; ++b) {
      g[static_cast<std::size_t>(b) * k + a] = x.col_dot(cols[b], dense);
    }
    g[static_cast<std::size_t>(a) * k + a] += 1e-12;
  }
  // Gaussian elimination with partial pivoting on the Gram system.
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::fabs(g[static_cast<std::size_t>(col) * k + r]) >
          std::fabs(g[static_cast<std::size_t>(col) * k + piv])) {
        piv = r;
      }
    }
    if (piv != col) {
      for (int c = 0; c < k; ++c) {
        std::swap(g[static_cast<std::size_t>(c) * k + piv],
                  g[static_cast<std::size_t>(c) * k + col]);
      }
      std::swap(w[piv], w[col]);
    }
    const double d = g[static_cast<std::size_t>(col) * k + col];
    if (std::fabs(d) < 1e-14) continue;
    for (int r = col + 1; r < k; ++r) {
      const double f = g[static_cast<std::size_t>(col) * k + r] / d;
      if (f == 0.0) continue;
      for (int c = col; c < k; ++c) {
        g[static_cast<std::size_t>(c) * k + r] -=
            f * g[static_cast<std::size_t>(c) * k + col];
      }
      w[r] -= f * w[col];
    }
  }
  for (int r = k - 1; r >= 0; --r) {
    double s = w[r];
    for (int c = r + 1; c < k; ++c) {
      s -= g[static_cast<std::size_t>(c) * k + r] * w[c];
    }
    const double d = g[static_cast<std::size_t>(r) * k + r];
    w[r] = std::fabs(d) < 1e-14 ? 0.0 : s / d;
  }
  for (int a = 0; a < k; ++a) {
    kernels::sparse_axpy(-w[a], x.col_rows(cols[a]).data(),
                         x.col_values(cols[a]).data(),
                         x.col_rows(cols[a]).size(), resid.data());
  }
  return resid;
}

}  // namespace

LpModel build_reduced_bp(const SparseMatrix& x, std::span<const double> y,
                         std::span<const int> column_set) {
  const int n = x.n_rows();
  std::vector<std::vector<std::pair<int, double>>> cols(2 * column_set.size());
  for (std::size_t t = 0; t < column_set.size(); ++t) {
    auto rows = x.col_rows(column_set[t]);
    auto vals = x.col_values(column_set[t]);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      cols[2 * t].emplace_back(rows[k], vals[k]);
      cols[2 * t + 1].emplace_back(rows[k], -vals[k]);
    }
  }
  std::vector<double> c(2 * column_set.size(), 1.0);
  std::vector<RowBound> rb(n);
  for (int i = 0; i < n; ++i) rb[i] = {y[i], y[i]};
  std::vector<VarBound> vb(2 * column_set.size(), {0.0, kInf});
  return build_model(std::move(c), SparseMatrix::from_columns(n, cols),
                     std::move(rb), std::move(vb));
}

std::vector<int> bp_init_columns(const SparseMatrix& x, std::span<const double> y,
                                 const BpOptions& opts) {
  const int n = x.n_rows();
  const int p = x.n_cols();
  const double y_norm = std::sqrt(kernels::dot(y.data(), y.data(), y.size()));
  if (y_norm == 0.0) return {};
  const double tol = opts.span_tol * y_norm;

  std::vector<double> corr(p, 0.0);
  x.tmul(y, corr);
  const double lambda_max = kernels::max_abs(corr.data(), corr.size());

  // Continuation over a halving schedule: the first support that spans y
  // (to tolerance) wins. Once the support reaches n the greedy completion
  // below finishes the job, so the remaining schedule is skipped.
  LassoFit fit;
  const LassoFit* warm = nullptr;
  std::vector<int> best;
  for (int k = 1; k <= opts.continuation_steps; ++k) {
    const double lambda = lambda_max * std::pow(2.0, -k);
    fit = lasso_fit(x, y, lambda, warm, opts.lasso);
    warm = &fit;
    std::vector<int> j = support_of(fit.beta);
    if (j.empty()) continue;
    if (ls_residual_norm(x, j, y) <= tol) return j;
    best = std::move(j);
    if (static_cast<int>(best.size()) >= n) break;
  }

  // Greedy augmentation toward |J| = n: most correlated column with the
  // projection residual, re-projecting after each addition.
  std::vector<std::uint8_t> in_j(p, 0);
  for (int j : best) in_j[j] = 1;
  while (static_cast<int>(best.size()) < std::min(n, p)) {
    if (ls_residual_norm(x, best, y) <= tol) return best;
    std::vector<double> resid = projection_residual(x, best, y);
    int pick = -1;
    double pick_score = 1e-10;
    for (int j = 0; j < p; ++j) {
      if (in_j[j]) continue;
      const double s = std::fabs(x.col_dot(j, resid));
      if (s > pick_score) {
        pick_score = s;
        pick = j;
      }
    }
    if (pick < 0) {
      throw InitInfeasible("response is outside the column span");
    }
    best.push_back(pick);
    in_j[pick] = 1;
  }
  if (ls_residual_norm(x, best, y) <= tol) return best;
  throw InitInfeasible("no spanning column subset found");
}

BpSolution solve_bp(const SparseMatrix& x, std::span<const double> y,
                    const BpOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const int n = x.n_rows();
  const int p = x.n_cols();
  if (static_cast<int>(y.size()) != n) {
    throw DimensionMismatch("response length vs design rows");
  }

  BpSolution out;
  out.beta.assign(p, 0.0);
  out.dual.assign(n, 0.0);

  std::vector<int> column_order = bp_init_columns(x, y, opts);
  if (column_order.empty()) {
    out.status = EstimatorStatus::optimal;
    out.columns = {};
    return out;  // y = 0
  }
  std::vector<std::uint8_t> in_j(p, 0);
  for (int j : column_order) in_j[j] = 1;

  SimplexSolver solver(build_reduced_bp(x, y, column_order), opts.lp);
  std::vector<GenerationRecord> trace;
  LpSolution lp = solver.solve();
  int outer = 0;
  for (; outer < opts.max_outer_iter; ++outer) {
    if (lp.status == SolveStatus::iteration_limit) break;
    if (lp.status == SolveStatus::infeasible) {
      // Price columns against the infeasibility ray.
      std::vector<std::pair<double, int>> blockers;
      for (int j = 0; j < p; ++j) {
        if (in_j[j]) continue;
        const double s = std::fabs(x.col_dot(j, lp.farkas));
        if (s > 1e-9) blockers.emplace_back(s, j);
      }
      if (blockers.empty()) {
        throw InitInfeasible("reduced basis pursuit infeasible beyond repair");
      }
      std::sort(blockers.begin(), blockers.end(), [](auto a, auto b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      if (static_cast<int>(blockers.size()) > opts.col_batch) {
        blockers.resize(opts.col_batch);
      }
      std::vector<NewColumn> cols;
      for (auto [s, j] : blockers) {
        auto rows = x.col_rows(j);
        auto vals = x.col_values(j);
        NewColumn plus{1.0, {}, 0.0, kInf}, minus{1.0, {}, 0.0, kInf};
        for (std::size_t k = 0; k < rows.size(); ++k) {
          plus.entries.emplace_back(rows[k], vals[k]);
          minus.entries.emplace_back(rows[k], -vals[k]);
        }
        cols.push_back(std::move(plus));
        cols.push_back(std::move(minus));
        in_j[j] = 1;
        column_order.push_back(j);
      }
      solver.add_columns(cols);
      lp = solver.solve();
      continue;
    }

    // Column pricing on the dual: |X_j'v| > 1 + eps enters.
    std::vector<std::pair<double, int>> priced;
    for (int j = 0; j < p; ++j) {
      if (in_j[j]) continue;
      const double s = std::fabs(x.col_dot(j, lp.duals));
      if (s > 1.0 + opts.eps) priced.emplace_back(s, j);
    }
    if (priced.empty()) break;
    std::sort(priced.begin(), priced.end(), [](auto a, auto b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    if (static_cast<int>(priced.size()) > opts.col_batch) {
      priced.resize(opts.col_batch);
    }
    std::vector<NewColumn> cols;
    for (auto [s, j] : priced) {
      auto rows = x.col_rows(j);
      auto vals = x.col_values(j);
      NewColumn plus{1.0, {}, 0.0, kInf}, minus{1.0, {}, 0.0, kInf};
      for (std::size_t k = 0; k < rows.size(); ++k) {
        plus.entries.emplace_back(rows[k], vals[k]);
        minus.entries.emplace_back(rows[k], -vals[k]);
      }
      cols.push_back(std::move(plus));
      cols.push_back(std::move(minus));
      in_j[j] = 1;
      column_order.push_back(j);
    }
    solver.add_columns(cols);
    lp = solver.solve();

    GenerationRecord rec;
    rec.iteration = static_cast<int>(trace.size()) + 1;
    rec.n_columns = static_cast<int>(column_order.size());
    rec.added_columns = static_cast<int>(priced.size());
    rec.reduced_objective = lp.objective;
    rec.pivots = solver.total_pivots();
    trace.push_back(rec);
  }

  for (std::size_t t = 0; t < column_order.size(); ++t) {
    out.beta[column_order[t]] = lp.x[2 * t] - lp.x[2 * t + 1];
  }
  out.dual = lp.duals;
  out.objective = lp.objective;
  out.pivots = solver.total_pivots();
  out.trace = std::move(trace);

  std::vector<double> resid(y.begin(), y.end());
  x.mul(out.beta, resid, -1.0);
  out.equality_residual = kernels::max_abs(resid.data(), resid.size());
  std::vector<double> col_corr(p, 0.0);
  x.tmul(out.dual, col_corr);
  double viol = 0.0;
  for (double v : col_corr) viol = std::max(viol, std::fabs(v) - 1.0);
  out.max_column_violation = std::max(viol, 0.0);
  out.dual_objective =
      kernels::dot(out.dual.data(), y.data(), static_cast<std::size_t>(n));

  out.columns = column_order;
  std::sort(out.columns.begin(), out.columns.end());

  double y_scale = kernels::max_abs(y.data(), y.size());
  const bool clean = lp.status == SolveStatus::optimal &&
                     out.max_column_violation <= opts.eps &&
                     out.equality_residual <= 1e-8 * (1.0 + y_scale) &&
                     outer < opts.max_outer_iter;
  out.status = clean ? EstimatorStatus::optimal : EstimatorStatus::iteration_limit;
  out.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

}  // namespace dlp
