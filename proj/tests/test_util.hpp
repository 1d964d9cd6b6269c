// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "dlp/rng.hpp"
#include "dlp/sparse_matrix.hpp"

namespace dlp::testing {

inline std::vector<double> gaussian_vec(CounterRng& rng, int n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.next_gaussian();
  return v;
}

inline SparseMatrix gaussian_matrix(CounterRng& rng, int n, int p,
                                    double density = 1.0) {
  std::vector<double> a(static_cast<std::size_t>(n) * p, 0.0);
  for (auto& v : a) {
    if (density >= 1.0 || rng.next_uniform() < density) v = rng.next_gaussian();
  }
  return SparseMatrix::from_dense(n, p, a);
}

// Square matrix with orthonormal columns via Gram-Schmidt on Gaussian draws.
inline SparseMatrix orthonormal_matrix(CounterRng& rng, int n) {
  std::vector<std::vector<double>> cols(n);
  for (int j = 0; j < n; ++j) {
    cols[j].resize(n);
    for (auto& v : cols[j]) v = rng.next_gaussian();
    for (int k = 0; k < j; ++k) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += cols[j][i] * cols[k][i];
      for (int i = 0; i < n; ++i) cols[j][i] -= dot * cols[k][i];
    }
    double norm = 0.0;
    for (double v : cols[j]) norm += v * v;
    norm = std::sqrt(norm);
    for (auto& v : cols[j]) v /= norm;
  }
  std::vector<double> dense(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) dense[static_cast<std::size_t>(j) * n + i] = cols[j][i];
  }
  return SparseMatrix::from_dense(n, n, dense);
}

inline double inf_norm_xty(const SparseMatrix& x, std::span<const double> y) {
  std::vector<double> corr(x.n_cols(), 0.0);
  x.tmul(y, corr);
  double m = 0.0;
  for (double v : corr) m = std::max(m, std::fabs(v));
  return m;
}

inline double soft(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace dlp::testing
