// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dlp/sparse_matrix.hpp"

namespace dlp {

enum class InstanceKind { ds, bp, fused_signal, fused_regression };

const char* to_string(InstanceKind k);

// Synthetic-data recipe. Derived quantities: the planted support is
// floor(n/5) for kind ds and floor(0.2 n) for bp unless overridden; snr is
// Var(X beta0) / sigma^2.
struct InstanceSpec {
  InstanceKind kind = InstanceKind::ds;
  int n = 0;
  int p = 0;
  double rho = 0.0;  // equicorrelation of the Gaussian rows, in [0, 1)
  double pi = 0.0;   // independent entry-zeroing probability, in [0, 1)
  double snr = 10.0;
  int knot_count = 0;  // fused kinds
  std::uint64_t seed = 0;
  std::optional<int> support_override;

  int support_size() const;
};

struct Instance {
  InstanceSpec spec;
  SparseMatrix x;  // 0x0 for fused_signal (identity design)
  std::vector<double> y;
  std::vector<double> beta0;
  std::vector<double> noise;  // e0 = y - X beta0; empty for bp
};

// Deterministic: equal specs generate bit-identical data. Stream
// usage is documented in instance.cpp; each design column owns its streams,
// so the sparsity mask is independent of generation order.
Instance generate_instance(const InstanceSpec& spec);

// Log-spaced descending grid inclusive of both anchors; count == 1 gives
// {hi}. Throws InvalidAnchor on nonpositive or inverted anchors.
std::vector<double> lambda_grid(double lo, double hi, int count);

// ||X' e0||_inf and ||X' y||_inf, the grid anchors. For the fused kinds the
// design is the projected one and e0 the corresponding residual.
struct LambdaAnchors {
  double noise_level = 0.0;  // ||X'e0||_inf
  double lambda_max = 0.0;   // ||X'y||_inf
};

LambdaAnchors instance_anchors(const Instance& inst);

}  // namespace dlp
