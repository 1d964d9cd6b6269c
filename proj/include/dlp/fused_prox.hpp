// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "dlp/sparse_matrix.hpp"

namespace dlp {

// Threshold on |alpha_i| below which a difference does not count as a knot;
// first-order solvers produce approximate zeros, never exact ones.
inline constexpr double kKnotTol = 1e-6;

// Fit of a piecewise-constant model. alpha carries the difference
// decomposition: alpha[0] = beta[0] and alpha[i] = beta[i] - beta[i-1], so
// beta is recovered exactly by prefix sums of alpha.
struct FusedFit {
  std::vector<double> beta;
  std::vector<double> alpha;
  double lambda = 0.0;
  std::vector<int> knots;  // indices i >= 1 with |alpha[i]| > kKnotTol
  double objective = 0.0;
  int iterations = 0;
};

double total_variation(std::span<const double> beta);
double fused_signal_objective(std::span<const double> y,
                              std::span<const double> beta, double lambda);
double fused_objective(const SparseMatrix& x, std::span<const double> y,
                       std::span<const double> beta, double lambda);

// Exact minimizer of 0.5*||y - b||^2 + lambda*TV(b) via forward message
// passing with a clipped piecewise-linear derivative kept in a breakpoint
// deque; O(n) amortized.
FusedFit fused_dp(std::span<const double> y, double lambda);

// Prox of (lambda/L)*TV at the gradient step point: fused_dp(u - grad/L,
// lambda/L).
std::vector<double> prox_theta(std::span<const double> u,
                               std::span<const double> grad, double lip,
                               double lambda);

// Largest eigenvalue of X'X by 200 power iterations (1e-8 relative change
// cutoff), inflated by 1.01 so the result is a valid gradient majorizer.
// Throws PowerMethodDivergence on non-finite input.
double power_method_lipschitz(const SparseMatrix& x);

struct FistaOptions {
  int max_iter = 10000;
  double rel_tol = 1e-8;  // relative objective change ...
  int stall_window = 10;  // ... sustained over this many iterations
};

// Accelerated proximal gradient for 0.5*||y - X b||^2 + lambda*TV(b),
// returning the best iterate seen.
FusedFit fista_fused(const SparseMatrix& x, std::span<const double> y,
                     double lambda, const FistaOptions& opts = {});

}  // namespace dlp
