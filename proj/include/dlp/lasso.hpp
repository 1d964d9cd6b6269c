// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "dlp/sparse_matrix.hpp"

namespace dlp {

// Converged coordinate-descent fit of
//   0.5*||y - X b||^2 + lambda*||b||_1.
struct LassoFit {
  std::vector<double> beta;
  std::vector<double> residual;  // y - X beta, recomputed at convergence
  double lambda = 0.0;
  double kkt_violation = 0.0;
  int sweeps = 0;
  // Objective after every sweep; nonincreasing by construction.
  std::vector<double> sweep_objectives;
};

struct LassoOptions {
  double sweep_tol = 1e-8;  // largest coordinate move in a full sweep
  double kkt_tol = 1e-7;
  int max_sweeps = 100000;
  // Gradient caching with X'X columns of the active set; engaged by default
  // for p <= 10^4, otherwise residual updates are used.
  std::optional<bool> covariance_mode;
};

double lasso_objective(const SparseMatrix& x, std::span<const double> y,
                       std::span<const double> beta, double lambda);

LassoFit lasso_fit(const SparseMatrix& x, std::span<const double> y,
                   double lambda, const LassoFit* warm = nullptr,
                   const LassoOptions& opts = {});

// One converged fit per grid value, each warm-started from its predecessor.
// The grid must be strictly decreasing and positive.
std::vector<LassoFit> lasso_path(const SparseMatrix& x, std::span<const double> y,
                                 std::span<const double> lambda_grid,
                                 const LassoOptions& opts = {});

// Working sets read off a converged fit: J = support of beta, I = indices
// whose correlation |X_i'r| sits within eps_act of lambda.
struct ActiveSets {
  std::vector<int> constraints;  // I
  std::vector<int> columns;      // J
};

ActiveSets active_sets(const SparseMatrix& x, const LassoFit& fit, double lambda,
                       double eps_act);

// Default activity slack: exact equality |X_i'r| = lambda never holds in
// floating point.
inline double default_eps_act(double lambda) {
  return 1e-6 * std::max(lambda, 1.0);
}

}  // namespace dlp
