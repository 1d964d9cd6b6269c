// SPDX-License-Identifier: Apache-2.0

#include "dlp/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "dlp/errors.hpp"
#include "dlp/kernels.hpp"

namespace dlp {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

struct CdState {
  const SparseMatrix& x;
  std::span<const double> y;
  double lambda;
  std::vector<double> beta;
  std::vector<double> residual;  // maintained in residual mode
  std::vector<double> grad;      // X'r, maintained in covariance mode
  std::vector<double> col_norm_sq;
  std::vector<std::vector<double>> xtx_cache;  // per-column X'X_j, lazy
  bool covariance;

  CdState(const SparseMatrix& x_, std::span<const double> y_, double lambda_,
          bool covariance_)
      : x(x_), y(y_), lambda(lambda_), covariance(covariance_) {
    const int p = x.n_cols();
    beta.assign(p, 0.0);
    col_norm_sq.resize(p);
    for (int j = 0; j < p; ++j) col_norm_sq[j] = x.col_norm_sq(j);
    if (covariance) xtx_cache.resize(p);
  }

  void reset_from(std::span<const double> warm_beta) {
    std::copy(warm_beta.begin(), warm_beta.end(), beta.begin());
    residual.assign(y.begin(), y.end());
    x.mul(beta, residual, -1.0);
    if (covariance) {
      grad.assign(x.n_cols(), 0.0);
      x.tmul(residual, grad);
    }
  }

  const std::vector<double>& xtx_col(int j) {
    auto& col = xtx_cache[j];
    if (col.empty()) {
      std::vector<double> dense_col(x.n_rows(), 0.0);
      auto rows = x.col_rows(j);
      auto vals = x.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) dense_col[rows[k]] = vals[k];
      col.assign(x.n_cols(), 0.0);
      x.tmul(dense_col, col);
    }
    return col;
  }

  // Single coordinate move; returns |beta_j change|.
  double update(int j) {
    const double s = col_norm_sq[j];
    if (s <= 0.0) return 0.0;
    const double corr = covariance ? grad[j] : x.col_dot(j, residual);
    const double z = corr + s * beta[j];
    const double nb = soft_threshold(z, lambda) / s;
    const double delta = nb - beta[j];
    if (delta == 0.0) return 0.0;
    beta[j] = nb;
    if (covariance) {
      kernels::axpy(-delta, xtx_col(j).data(), grad.data(), grad.size());
    } else {
      kernels::sparse_axpy(-delta, x.col_rows(j).data(), x.col_values(j).data(),
                           x.col_rows(j).size(), residual.data());
    }
    return std::fabs(delta);
  }

  double objective() const {
    double quad;
    if (covariance) {
      std::vector<double> r(y.begin(), y.end());
      x.mul(beta, r, -1.0);
      quad = kernels::dot(r.data(), r.data(), r.size());
    } else {
      quad = kernels::dot(residual.data(), residual.data(), residual.size());
    }
    double l1 = 0.0;
    for (double b : beta) l1 += std::fabs(b);
    return 0.5 * quad + lambda * l1;
  }

  double kkt_violation() {
    std::vector<double> corr;
    if (covariance) {
      corr = grad;
    } else {
      corr.assign(x.n_cols(), 0.0);
      x.tmul(residual, corr);
    }
    double worst = 0.0;
    for (int j = 0; j < x.n_cols(); ++j) {
      if (beta[j] == 0.0) {
        worst = std::max(worst, std::fabs(corr[j]) - lambda);
      } else {
        worst = std::max(
            worst, std::fabs(corr[j] - lambda * (beta[j] > 0 ? 1.0 : -1.0)));
      }
    }
    return std::max(worst, 0.0);
  }
};

}  // namespace

double lasso_objective(const SparseMatrix& x, std::span<const double> y,
                       std::span<const double> beta, double lambda) {
  std::vector<double> r(y.begin(), y.end());
  x.mul(beta, r, -1.0);
  double l1 = 0.0;
  for (double b : beta) l1 += std::fabs(b);
  return 0.5 * kernels::dot(r.data(), r.data(), r.size()) + lambda * l1;
}

LassoFit lasso_fit(const SparseMatrix& x, std::span<const double> y,
                   double lambda, const LassoFit* warm, const LassoOptions& opts) {
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw NonFiniteInput("lambda must be finite and nonnegative");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw NonFiniteInput("response vector");
  }
  x.validate();
  if (static_cast<int>(y.size()) != x.n_rows()) {
    throw DimensionMismatch("response length vs matrix rows");
  }

  const int p = x.n_cols();
  const bool covariance = opts.covariance_mode.value_or(p <= 10000);
  CdState state(x, y, lambda, covariance);
  std::vector<double> zero(p, 0.0);
  state.reset_from(warm != nullptr ? std::span<const double>(warm->beta)
                                   : std::span<const double>(zero));

  LassoFit fit;
  fit.lambda = lambda;
  int sweeps = 0;
  std::vector<int> active;
  for (;;) {
    double max_move = 0.0;
    for (int j = 0; j < p; ++j) max_move = std::max(max_move, state.update(j));
    ++sweeps;
    fit.sweep_objectives.push_back(state.objective());

    // Inner iterations restricted to the current support.
    active.clear();
    for (int j = 0; j < p; ++j) {
      if (state.beta[j] != 0.0) active.push_back(j);
    }
    while (max_move > opts.sweep_tol && sweeps < opts.max_sweeps) {
      max_move = 0.0;
      for (int j : active) max_move = std::max(max_move, state.update(j));
      ++sweeps;
      fit.sweep_objectives.push_back(state.objective());
    }

    const double viol = state.kkt_violation();
    if (viol <= opts.kkt_tol || sweeps >= opts.max_sweeps) {
      fit.kkt_violation = viol;
      break;
    }
  }

  fit.beta = std::move(state.beta);
  fit.residual.assign(y.begin(), y.end());
  x.mul(fit.beta, fit.residual, -1.0);
  fit.sweeps = sweeps;
  return fit;
}

std::vector<LassoFit> lasso_path(const SparseMatrix& x, std::span<const double> y,
                                 std::span<const double> lambda_grid,
                                 const LassoOptions& opts) {
  if (lambda_grid.empty()) throw EmptyGrid("lambda grid");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (lambda_grid[k] <= 0.0) throw InvalidAnchor("grid values must be positive");
    if (k > 0 && lambda_grid[k] >= lambda_grid[k - 1]) {
      throw InvalidAnchor("grid must be strictly decreasing");
    }
  }
  std::vector<LassoFit> fits;
  fits.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const LassoFit* warm = fits.empty() ? nullptr : &fits.back();
    fits.push_back(lasso_fit(x, y, lambda, warm, opts));
  }
  return fits;
}

ActiveSets active_sets(const SparseMatrix& x, const LassoFit& fit, double lambda,
                       double eps_act) {
  ActiveSets sets;
  std::vector<double> corr(x.n_cols(), 0.0);
  x.tmul(fit.residual, corr);
  for (int j = 0; j < x.n_cols(); ++j) {
    if (fit.beta[j] != 0.0) sets.columns.push_back(j);
    if (std::fabs(corr[j]) >= lambda - eps_act) sets.constraints.push_back(j);
  }
  return sets;
}

}  // namespace dlp
