// SPDX-License-Identifier: Apache-2.0

// AVX2+FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it must not be entered on CPUs without AVX2, which the
// dispatcher in kernels.cpp guarantees.

#include "dlp/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define DLP_HAVE_AVX2_TU 1
#include <immintrin.h>
#else
#define DLP_HAVE_AVX2_TU 0
#endif

#include <cmath>

namespace dlp::kernels::detail {

#if DLP_HAVE_AVX2_TU

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    _mm256_storeu_pd(y + i, y0);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sparse_dot_avx2(const std::int32_t* idx, const double* val,
                       std::size_t nnz, const double* dense) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= nnz; k += 4) {
    __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
    __m256d g = _mm256_i32gather_pd(dense, vi, 8);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(val + k), g, acc);
  }
  double s = hsum(acc);
  for (; k < nnz; ++k) s += val[k] * dense[idx[k]];
  return s;
}

void sparse_axpy_avx2(double alpha, const std::int32_t* idx, const double* val,
                      std::size_t nnz, double* dense) {
  // Scatter has no AVX2 instruction; the update stays scalar per element but
  // keeps the same reference semantics.
  for (std::size_t k = 0; k < nnz; ++k) dense[idx[k]] += alpha * val[k];
}

double max_abs_avx2(const double* a, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(a + i));
    m = _mm256_max_pd(m, v);
  }
  __m128d lo = _mm256_castpd256_pd128(m);
  __m128d hi = _mm256_extractf128_pd(m, 1);
  lo = _mm_max_pd(lo, hi);
  double r = std::max(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) r = std::max(r, std::fabs(a[i]));
  return r;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

constexpr Ops kAvx2Ops = {dot_avx2,     axpy_avx2, sparse_dot_avx2,
                          sparse_axpy_avx2, max_abs_avx2, sum_avx2};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else  // !DLP_HAVE_AVX2_TU

const Ops& avx2_ops() { return scalar_ops(); }
bool avx2_supported() { return false; }

#endif

}  // namespace dlp::kernels::detail
