// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "dlp/errors.hpp"
#include "dlp/lasso.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dlp;
using namespace dlp::testing;

namespace {

void check_kkt(const SparseMatrix& x, const LassoFit& fit, double lambda,
               double tol = 1e-7) {
  // Recomputed residual must match the stored one.
  std::vector<double> r(fit.residual.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = fit.residual[i];
  std::vector<double> rr(x.n_rows(), 0.0);
  // rr = y - X beta reconstructed from stored fields: y = r + X beta
  x.mul(fit.beta, rr, 1.0);
  for (std::size_t i = 0; i < rr.size(); ++i) rr[i] += fit.residual[i];
  std::vector<double> back(rr);  // back = y
  x.mul(fit.beta, back, -1.0);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(std::fabs(back[i] - fit.residual[i]) <= 1e-10);
  }

  std::vector<double> corr(x.n_cols(), 0.0);
  x.tmul(fit.residual, corr);
  for (int j = 0; j < x.n_cols(); ++j) {
    if (fit.beta[j] == 0.0) {
      CHECK(std::fabs(corr[j]) <= lambda + tol);
    } else {
      CHECK(std::fabs(corr[j] - lambda * (fit.beta[j] > 0 ? 1.0 : -1.0)) <= tol);
    }
  }
}

}  // namespace

TEST_CASE("lambda at or above the max correlation gives beta = 0") {
  CounterRng rng(5);
  SparseMatrix x = gaussian_matrix(rng, 15, 30);
  std::vector<double> y = gaussian_vec(rng, 15);
  const double lmax = inf_norm_xty(x, y);
  LassoFit fit = lasso_fit(x, y, lmax * 1.0001);
  for (double b : fit.beta) CHECK(b == 0.0);
  check_kkt(x, fit, lmax * 1.0001);
}

TEST_CASE("orthonormal design reduces to soft thresholding") {
  CounterRng rng(6);
  SparseMatrix x = orthonormal_matrix(rng, 12);
  std::vector<double> y = gaussian_vec(rng, 12);
  std::vector<double> xty(12, 0.0);
  x.tmul(y, xty);
  const double lambda = 0.3 * inf_norm_xty(x, y);
  LassoFit fit = lasso_fit(x, y, lambda);
  for (int j = 0; j < 12; ++j) {
    CHECK(std::fabs(fit.beta[j] - soft(xty[j], lambda)) <= 1e-10);
  }
}

TEST_CASE("random instance matches a proximal-gradient oracle") {
  CounterRng rng(7);
  SparseMatrix x = gaussian_matrix(rng, 20, 40);
  std::vector<double> y = gaussian_vec(rng, 20);
  const double lambda = 0.5 * inf_norm_xty(x, y);

  std::vector<double> ref = oracle::ista_lasso(oracle::to_dense(x), y, lambda,
                                               400000, 1e-12);
  const double ref_obj = lasso_objective(x, y, ref, lambda);

  LassoFit fit = lasso_fit(x, y, lambda);
  const double obj = lasso_objective(x, y, fit.beta, lambda);
  CHECK(std::fabs(obj - ref_obj) <= 1e-8 * (1.0 + std::fabs(ref_obj)));
  check_kkt(x, fit, lambda);
}

TEST_CASE("residual and covariance modes agree") {
  CounterRng rng(8);
  SparseMatrix x = gaussian_matrix(rng, 25, 35, 0.6);
  std::vector<double> y = gaussian_vec(rng, 25);
  const double lambda = 0.4 * inf_norm_xty(x, y);
  LassoOptions naive;
  naive.covariance_mode = false;
  LassoOptions cov;
  cov.covariance_mode = true;
  LassoFit a = lasso_fit(x, y, lambda, nullptr, naive);
  LassoFit b = lasso_fit(x, y, lambda, nullptr, cov);
  CHECK(std::fabs(lasso_objective(x, y, a.beta, lambda) -
                  lasso_objective(x, y, b.beta, lambda)) <= 1e-9);
}

TEST_CASE("objective is nonincreasing across sweeps") {
  CounterRng rng(9);
  SparseMatrix x = gaussian_matrix(rng, 30, 60);
  std::vector<double> y = gaussian_vec(rng, 30);
  LassoFit fit = lasso_fit(x, y, 0.2 * inf_norm_xty(x, y));
  for (std::size_t k = 1; k < fit.sweep_objectives.size(); ++k) {
    CHECK(fit.sweep_objectives[k] <= fit.sweep_objectives[k - 1] + 1e-12);
  }
}

TEST_CASE("lasso_path warm starts do not change the answer") {
  CounterRng rng(10);
  SparseMatrix x = gaussian_matrix(rng, 20, 50);
  std::vector<double> y = gaussian_vec(rng, 20);
  const double lmax = inf_norm_xty(x, y);

  SUBCASE("single-point grid at lambda_max") {
    std::vector<double> grid{lmax};
    auto fits = lasso_path(x, y, grid);
    REQUIRE(fits.size() == 1);
    for (double b : fits[0].beta) CHECK(b == 0.0);
  }
  SUBCASE("three-point grid satisfies per-lambda KKT and beats beta = 0") {
    std::vector<double> grid{0.8 * lmax, 0.4 * lmax, 0.1 * lmax};
    auto fits = lasso_path(x, y, grid);
    REQUIRE(fits.size() == 3);
    std::vector<double> zero(x.n_cols(), 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      check_kkt(x, fits[k], grid[k]);
      CHECK(lasso_objective(x, y, fits[k].beta, grid[k]) <=
            lasso_objective(x, y, zero, grid[k]) + 1e-12);
    }
  }
  SUBCASE("pathwise fit equals cold fit") {
    std::vector<double> grid{0.6 * lmax, 0.3 * lmax, 0.15 * lmax};
    auto fits = lasso_path(x, y, grid);
    for (std::size_t k = 0; k < 3; ++k) {
      LassoFit cold = lasso_fit(x, y, grid[k]);
      CHECK(std::fabs(lasso_objective(x, y, fits[k].beta, grid[k]) -
                      lasso_objective(x, y, cold.beta, grid[k])) <= 1e-7);
    }
  }
  SUBCASE("grid validation") {
    std::vector<double> empty;
    CHECK_THROWS_AS(lasso_path(x, y, empty), EmptyGrid);
    std::vector<double> increasing{0.1, 0.2};
    CHECK_THROWS_AS(lasso_path(x, y, increasing), InvalidAnchor);
  }
}

TEST_CASE("active_sets reads supports and near-active constraints") {
  CounterRng rng(11);

  SUBCASE("zero fit gives empty sets") {
    SparseMatrix x = gaussian_matrix(rng, 10, 20);
    std::vector<double> y = gaussian_vec(rng, 10);
    const double lambda = 2.0 * inf_norm_xty(x, y);
    LassoFit fit = lasso_fit(x, y, lambda);
    auto sets = active_sets(x, fit, lambda, default_eps_act(lambda));
    CHECK(sets.columns.empty());
    CHECK(sets.constraints.empty());
  }
  SUBCASE("orthonormal design with one surviving coefficient") {
    SparseMatrix x = orthonormal_matrix(rng, 10);
    std::vector<double> xty_target(10, 0.0);
    // Build y = X (e_0 * 3) so X'y has a single dominant entry.
    std::vector<double> coef(10, 0.05);
    coef[0] = 3.0;
    std::vector<double> y(10, 0.0);
    x.mul(coef, y);
    const double lambda = 1.0;
    LassoFit fit = lasso_fit(x, y, lambda);
    auto sets = active_sets(x, fit, lambda, default_eps_act(lambda));
    REQUIRE(sets.columns.size() == 1);
    CHECK(sets.columns[0] == 0);
    CHECK(std::find(sets.constraints.begin(), sets.constraints.end(), 0) !=
          sets.constraints.end());
  }
  SUBCASE("support is contained in the active-constraint set") {
    SparseMatrix x = gaussian_matrix(rng, 20, 45);
    std::vector<double> y = gaussian_vec(rng, 20);
    const double lambda = 0.3 * inf_norm_xty(x, y);
    LassoFit fit = lasso_fit(x, y, lambda);
    auto sets = active_sets(x, fit, lambda, default_eps_act(lambda));
    for (int j : sets.columns) {
      CHECK(std::find(sets.constraints.begin(), sets.constraints.end(), j) !=
            sets.constraints.end());
    }
    CHECK_FALSE(sets.columns.empty());
  }
}
