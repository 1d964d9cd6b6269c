// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace dlp::kernels {

// Dense and sparse-gather vector primitives used by the hot inner loops
// (column scans, residual updates, LU updates, FTRAN/BTRAN). Scalar
// reference implementations live in kernels.cpp; AVX2+FMA variants in
// kernels_avx2.cpp, compiled separately with -mavx2 -mfma. The active
// implementation is picked once at runtime from CPU capabilities and can
// be overridden with the environment variable DLP_KERNEL_ISA=scalar|avx2.
//
// SIMD variants may reassociate additions, so results can differ from the
// scalar reference by normal floating-point roundoff. The equivalence
// tests bound that difference.

enum class Isa { scalar, avx2 };

Isa active_isa();
bool isa_available(Isa isa);
void select_isa(Isa isa);  // throws std::runtime_error if unavailable
std::string_view isa_name(Isa isa);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);
// sum_k val[k] * dense[idx[k]]
double sparse_dot(const std::int32_t* idx, const double* val, std::size_t nnz,
                  const double* dense);
// dense[idx[k]] += alpha * val[k]
void sparse_axpy(double alpha, const std::int32_t* idx, const double* val,
                 std::size_t nnz, double* dense);
// max_i |a[i]| (0 for empty input)
double max_abs(const double* a, std::size_t n);
// sum_i a[i]
double sum(const double* a, std::size_t n);

namespace detail {

struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sparse_dot)(const std::int32_t*, const double*, std::size_t,
                       const double*);
  void (*sparse_axpy)(double, const std::int32_t*, const double*, std::size_t,
                      double*);
  double (*max_abs)(const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
};

const Ops& scalar_ops();
// Valid only when isa_available(Isa::avx2).
const Ops& avx2_ops();
bool avx2_supported();

}  // namespace detail

}  // namespace dlp::kernels
