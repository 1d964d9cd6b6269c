// SPDX-License-Identifier: Apache-2.0

#include "dlp/fused_prox.hpp"

#include <cmath>
#include <deque>

#include "dlp/errors.hpp"
#include "dlp/kernels.hpp"

namespace dlp {

namespace {

// One linear increment of the message derivative: crossing `x` rightward
// adds da*t + db.
struct Breakpoint {
  double x;
  double da;
  double db;
};

void fill_alpha_and_knots(FusedFit& fit) {
  const std::size_t n = fit.beta.size();
  fit.alpha.resize(n);
  fit.knots.clear();
  if (n == 0) return;
  fit.alpha[0] = fit.beta[0];
  for (std::size_t i = 1; i < n; ++i) {
    fit.alpha[i] = fit.beta[i] - fit.beta[i - 1];
    if (std::fabs(fit.alpha[i]) > kKnotTol) {
      fit.knots.push_back(static_cast<int>(i));
    }
  }
}

}  // namespace

double total_variation(std::span<const double> beta) {
  double tv = 0.0;
  for (std::size_t i = 1; i < beta.size(); ++i) {
    tv += std::fabs(beta[i] - beta[i - 1]);
  }
  return tv;
}

double fused_signal_objective(std::span<const double> y,
                              std::span<const double> beta, double lambda) {
  double quad = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - beta[i];
    quad += d * d;
  }
  return 0.5 * quad + lambda * total_variation(beta);
}

double fused_objective(const SparseMatrix& x, std::span<const double> y,
                       std::span<const double> beta, double lambda) {
  std::vector<double> r(y.begin(), y.end());
  x.mul(beta, r, -1.0);
  return 0.5 * kernels::dot(r.data(), r.data(), r.size()) +
         lambda * total_variation(beta);
}

FusedFit fused_dp(std::span<const double> y, double lambda) {
  const int n = static_cast<int>(y.size());
  FusedFit fit;
  fit.lambda = lambda;
  if (n == 0) return fit;
  if (n == 1 || lambda == 0.0) {
    fit.beta.assign(y.begin(), y.end());
    fit.objective = fused_signal_objective(y, fit.beta, lambda);
    fill_alpha_and_knots(fit);
    return fit;
  }

  // Derivative of the running message, represented as a left function
  // (a_left*t + b_left), additive breakpoints, and the implied right
  // function. Every piece has slope >= 1, so the clip points exist.
  std::deque<Breakpoint> bp;
  double a_left = 1.0, b_left = -y[0];
  double a_right = 1.0, b_right = -y[0];
  std::vector<double> t_minus(n - 1), t_plus(n - 1);

  for (int k = 0; k + 1 < n; ++k) {
    // Clip point where the derivative reaches -lambda, scanning from the left.
    double a = a_left, b = b_left;
    while (!bp.empty() && a * bp.front().x + b < -lambda) {
      a += bp.front().da;
      b += bp.front().db;
      bp.pop_front();
    }
    const double tm = (-lambda - b) / a;
    const double am = a, bm = b;

    // Clip point where the derivative reaches +lambda, scanning from the right.
    a = a_right;
    b = b_right;
    while (!bp.empty() && a * bp.back().x + b > lambda) {
      a -= bp.back().da;
      b -= bp.back().db;
      bp.pop_back();
    }
    const double tp = (lambda - b) / a;

    t_minus[k] = tm;
    t_plus[k] = tp;

    bp.push_front({tm, am, bm + lambda});
    bp.push_back({tp, -a, lambda - b});
    a_left = 1.0;
    b_left = -y[k + 1] - lambda;
    a_right = 1.0;
    b_right = -y[k + 1] + lambda;
  }

  // Root of the final derivative, then backtrack through the clip ranges.
  double a = a_left, b = b_left;
  while (!bp.empty() && a * bp.front().x + b < 0.0) {
    a += bp.front().da;
    b += bp.front().db;
    bp.pop_front();
  }
  fit.beta.assign(n, 0.0);
  fit.beta[n - 1] = -b / a;
  for (int k = n - 2; k >= 0; --k) {
    fit.beta[k] = std::min(std::max(fit.beta[k + 1], t_minus[k]), t_plus[k]);
  }
  fit.objective = fused_signal_objective(y, fit.beta, lambda);
  fill_alpha_and_knots(fit);
  return fit;
}

std::vector<double> prox_theta(std::span<const double> u,
                               std::span<const double> grad, double lip,
                               double lambda) {
  if (!(lip > 0.0)) throw InvalidBound("prox step requires positive curvature");
  std::vector<double> point(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) point[i] = u[i] - grad[i] / lip;
  return fused_dp(point, lambda / lip).beta;
}

double power_method_lipschitz(const SparseMatrix& x) {
  const int p = x.n_cols();
  if (p == 0) return 1.0;
  std::vector<double> w(p);
  // fixed deterministic start with all-positive weights
  for (int j = 0; j < p; ++j) w[j] = 1.0 + 0.5 * std::sin(0.7 * j + 0.3);
  double eig = 0.0;
  std::vector<double> xw(x.n_rows()), z(p);
  for (int it = 0; it < 200; ++it) {
    xw.assign(x.n_rows(), 0.0);
    x.mul(w, xw);
    z.assign(p, 0.0);
    x.tmul(xw, z);
    double norm = std::sqrt(kernels::dot(z.data(), z.data(), z.size()));
    if (!std::isfinite(norm)) {
      throw PowerMethodDivergence("non-finite iterate");
    }
    if (norm == 0.0) break;
    const double prev = eig;
    eig = norm;  // Rayleigh growth of ||X'X w|| with ||w|| = 1
    for (int j = 0; j < p; ++j) w[j] = z[j] / norm;
    if (it > 0 && std::fabs(eig - prev) <= 1e-8 * std::max(eig, 1e-30)) break;
  }
  return std::max(eig, 1e-12) * 1.01;
}

FusedFit fista_fused(const SparseMatrix& x, std::span<const double> y,
                     double lambda, const FistaOptions& opts) {
  if (lambda < 0.0) throw InvalidBound("lambda must be nonnegative");
  const int p = x.n_cols();
  const double lip = power_method_lipschitz(x);

  std::vector<double> u(p, 0.0);        // extrapolated point u_k
  std::vector<double> prev_iter(p, 0.0);  // proximal iterate k-1
  std::vector<double> grad(p), resid(x.n_rows());
  double q = 1.0;

  FusedFit best;
  best.lambda = lambda;
  best.beta.assign(p, 0.0);
  best.objective = fused_objective(x, y, best.beta, lambda);

  double last_obj = best.objective;
  int stall = 0;
  int iter = 0;
  for (iter = 1; iter <= opts.max_iter; ++iter) {
    resid.assign(y.begin(), y.end());
    x.mul(u, resid, -1.0);
    grad.assign(p, 0.0);
    x.tmul(resid, grad, -1.0);  // gradient of the quadratic term

    std::vector<double> next = prox_theta(u, grad, lip, lambda);
    const double obj = fused_objective(x, y, next, lambda);
    if (obj < best.objective) {
      best.objective = obj;
      best.beta = next;
    }

    const double q_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q * q));
    for (int j = 0; j < p; ++j) {
      u[j] = next[j] + ((q - 1.0) / q_next) * (next[j] - prev_iter[j]);
    }
    prev_iter = std::move(next);
    q = q_next;

    if (std::fabs(obj - last_obj) <= opts.rel_tol * (1.0 + std::fabs(obj))) {
      if (++stall >= opts.stall_window) break;
    } else {
      stall = 0;
    }
    last_obj = obj;
  }
  best.iterations = iter;
  fill_alpha_and_knots(best);
  return best;
}

}  // namespace dlp
