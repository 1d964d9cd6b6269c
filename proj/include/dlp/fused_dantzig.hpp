// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "dlp/dantzig.hpp"
#include "dlp/simplex.hpp"
#include "dlp/sparse_matrix.hpp"

namespace dlp {

// Banded LP for piecewise-constant signal estimation:
//   minimize  sum_{i in B} (a+_i + a-_i)
//   s.t.      (D beta)_k - a_k = 0          (difference link, a_1 free)
//             r_k + beta_k = y_k            (residual link)
//             r_k - (D' g)_k = 0            (suffix-sum link)
//             g_1 = 0,  g_i in [-l, l] for enforced i
// with D the padded first-difference operator (row 1 = e_1'). Every a_i
// appears in exactly one equality row, so pricing is O(1) per index, and a
// constraint activation is a g-variable bound, checked in O(1).
//
// B is the index range {1..n-1} (0-based); index 0 is the unpenalized,
// always-present a_1 block.
struct FusedDsModel {
  int n = 0;
  double lambda = 0.0;
  std::vector<int> enforced;  // I, subset of B
  std::vector<int> columns;   // J, subset of B, in model column order
  LpModel lp;

  int alpha1_col() const { return 0; }
  int beta_col(int k) const { return 1 + k; }
  int r_col(int k) const { return 1 + n + k; }
  int g_col(int k) const { return 1 + 2 * n + k; }
  int pair_col(int t) const { return 1 + 3 * n + 2 * t; }  // a+ of columns[t]
  int diff_row(int k) const { return k; }
  int resid_row(int k) const { return n + k; }
  int glink_row(int k) const { return 2 * n + k; }
};

FusedDsModel build_fused_model(std::span<const double> y, double lambda,
                               std::span<const int> enforced,
                               std::span<const int> columns);

// Indices j in B \ J with min(1 - v_j, 1 + v_j) < -eps, i.e. |v_j| > 1 + eps,
// ranked by most negative reduced cost first; each check is O(1).
std::vector<int> price_fused_columns(std::span<const double> link_duals,
                                     std::span<const int> columns, double eps,
                                     int limit);

// Indices i in B \ I with |g_i| > lambda + eps, ranked by excess descending.
std::vector<int> check_fused_constraints(std::span<const double> g,
                                         std::span<const int> enforced,
                                         double lambda, double eps, int limit);

// Signal estimation (identity design), seeded from the exact dynamic
// program: J from its knots, I from the near-active suffix-sum constraints.
DantzigSolution solve_fused_signal(std::span<const double> y, double lambda,
                                   const DantzigOptions& opts = {});

// Projected regression data: with u = X*1 (the image of the unpenalized
// level direction), y_tilde = (I - P_u) y and x_tilde column t holds the
// projected suffix sum of X columns t+1..p-1.
struct ProjectedData {
  std::vector<double> y_tilde;
  SparseMatrix x_tilde;          // n x (p-1)
  std::vector<double> proj_dir;  // u; empty when ||u|| ~ 0 (no projection)
};

ProjectedData project_fused_regression(const SparseMatrix& x,
                                       std::span<const double> y);

// General-design fused estimation: FISTA initialization, then the
// column/constraint generation driver on the projected data; beta is
// recovered by prefix sums with the level chosen so u'(y - X beta) = 0.
DantzigSolution solve_fused_regression(const SparseMatrix& x,
                                       std::span<const double> y, double lambda,
                                       const DantzigOptions& opts = {});

}  // namespace dlp
