// SPDX-License-Identifier: Apache-2.0

#include "dlp/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>

namespace dlp::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sparse_dot_scalar(const std::int32_t* idx, const double* val,
                         std::size_t nnz, const double* dense) {
  double acc = 0.0;
  for (std::size_t k = 0; k < nnz; ++k) acc += val[k] * dense[idx[k]];
  return acc;
}

void sparse_axpy_scalar(double alpha, const std::int32_t* idx,
                        const double* val, std::size_t nnz, double* dense) {
  for (std::size_t k = 0; k < nnz; ++k) dense[idx[k]] += alpha * val[k];
}

double max_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

constexpr detail::Ops kScalarOps = {dot_scalar,        axpy_scalar,
                                    sparse_dot_scalar, sparse_axpy_scalar,
                                    max_abs_scalar,    sum_scalar};

std::atomic<const detail::Ops*> g_active{nullptr};
std::atomic<Isa> g_active_isa{Isa::scalar};
std::once_flag g_init_flag;

void init_dispatch() {
  Isa pick = detail::avx2_supported() ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("DLP_KERNEL_ISA")) {
    std::string s(env);
    if (s == "scalar") {
      pick = Isa::scalar;
    } else if (s == "avx2" && detail::avx2_supported()) {
      pick = Isa::avx2;
    }
  }
  g_active_isa.store(pick);
  g_active.store(pick == Isa::avx2 ? &detail::avx2_ops() : &kScalarOps);
}

const detail::Ops& active() {
  std::call_once(g_init_flag, init_dispatch);
  return *g_active.load();
}

}  // namespace

namespace detail {
const Ops& scalar_ops() { return kScalarOps; }
}  // namespace detail

Isa active_isa() {
  std::call_once(g_init_flag, init_dispatch);
  return g_active_isa.load();
}

bool isa_available(Isa isa) {
  return isa == Isa::scalar || detail::avx2_supported();
}

void select_isa(Isa isa) {
  std::call_once(g_init_flag, init_dispatch);
  if (!isa_available(isa)) {
    throw std::runtime_error("requested kernel ISA not available on this CPU");
  }
  g_active_isa.store(isa);
  g_active.store(isa == Isa::avx2 ? &detail::avx2_ops() : &kScalarOps);
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}

double sparse_dot(const std::int32_t* idx, const double* val, std::size_t nnz,
                  const double* dense) {
  return active().sparse_dot(idx, val, nnz, dense);
}

void sparse_axpy(double alpha, const std::int32_t* idx, const double* val,
                 std::size_t nnz, double* dense) {
  active().sparse_axpy(alpha, idx, val, nnz, dense);
}

double max_abs(const double* a, std::size_t n) { return active().max_abs(a, n); }

double sum(const double* a, std::size_t n) { return active().sum(a, n); }

}  // namespace dlp::kernels
