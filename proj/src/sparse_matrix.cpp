// SPDX-License-Identifier: Apache-2.0

#include "dlp/sparse_matrix.hpp"

#include <cmath>
#include <string>

#include "dlp/errors.hpp"
#include "dlp/kernels.hpp"

namespace dlp {

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix a(n, n);
  a.row_idx_.resize(n);
  a.val_.assign(n, 1.0);
  for (int j = 0; j < n; ++j) {
    a.row_idx_[j] = j;
    a.col_ptr_[j + 1] = j + 1;
  }
  return a;
}

SparseMatrix SparseMatrix::from_dense(int n_rows, int n_cols,
                                      std::span<const double> col_major,
                                      double drop_tol) {
  if (col_major.size() != static_cast<std::size_t>(n_rows) * n_cols) {
    throw DimensionMismatch("dense buffer size does not match shape");
  }
  SparseMatrix a(n_rows, n_cols);
  for (int j = 0; j < n_cols; ++j) {
    for (int i = 0; i < n_rows; ++i) {
      double v = col_major[static_cast<std::size_t>(j) * n_rows + i];
      if (std::fabs(v) > drop_tol) {
        a.row_idx_.push_back(i);
        a.val_.push_back(v);
      }
    }
    a.col_ptr_[j + 1] = static_cast<std::int64_t>(a.val_.size());
  }
  return a;
}

SparseMatrix SparseMatrix::from_columns(
    int n_rows, const std::vector<std::vector<std::pair<int, double>>>& columns) {
  SparseMatrix a(n_rows, static_cast<int>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (const auto& [i, v] : columns[j]) {
      if (v != 0.0) {
        a.row_idx_.push_back(i);
        a.val_.push_back(v);
      }
    }
    a.col_ptr_[j + 1] = static_cast<std::int64_t>(a.val_.size());
  }
  a.validate();
  return a;
}

void SparseMatrix::append_column(std::span<const std::pair<int, double>> entries) {
  int prev = -1;
  for (const auto& [i, v] : entries) {
    if (i <= prev || i >= n_rows_) {
      throw DimensionMismatch("column entries unsorted or out of range");
    }
    prev = i;
    if (v != 0.0) {
      row_idx_.push_back(i);
      val_.push_back(v);
    }
  }
  ++n_cols_;
  col_ptr_.push_back(static_cast<std::int64_t>(val_.size()));
}

void SparseMatrix::append_rows(
    const std::vector<std::vector<std::pair<int, double>>>& new_rows) {
  const int extra = static_cast<int>(new_rows.size());
  // Bucket the new entries by column, then merge column by column.
  std::vector<std::vector<std::pair<int, double>>> per_col(n_cols_);
  for (int k = 0; k < extra; ++k) {
    for (const auto& [j, v] : new_rows[k]) {
      if (j < 0 || j >= n_cols_) {
        throw DimensionMismatch("row entry column out of range");
      }
      if (v != 0.0) per_col[j].emplace_back(n_rows_ + k, v);
    }
  }
  std::vector<std::int64_t> new_ptr(n_cols_ + 1, 0);
  std::vector<std::int32_t> new_idx;
  std::vector<double> new_val;
  new_idx.reserve(row_idx_.size());
  new_val.reserve(val_.size());
  for (int j = 0; j < n_cols_; ++j) {
    for (std::int64_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
      new_idx.push_back(row_idx_[k]);
      new_val.push_back(val_[k]);
    }
    for (const auto& [i, v] : per_col[j]) {
      new_idx.push_back(i);
      new_val.push_back(v);
    }
    new_ptr[j + 1] = static_cast<std::int64_t>(new_val.size());
  }
  n_rows_ += extra;
  col_ptr_ = std::move(new_ptr);
  row_idx_ = std::move(new_idx);
  val_ = std::move(new_val);
}

void SparseMatrix::mul(std::span<const double> x, std::span<double> y,
                       double alpha) const {
  if (x.size() != static_cast<std::size_t>(n_cols_) ||
      y.size() != static_cast<std::size_t>(n_rows_)) {
    throw DimensionMismatch("mul operand sizes");
  }
  for (int j = 0; j < n_cols_; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    kernels::sparse_axpy(alpha * xj, row_idx_.data() + col_ptr_[j],
                         val_.data() + col_ptr_[j],
                         static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j]),
                         y.data());
  }
}

void SparseMatrix::tmul(std::span<const double> x, std::span<double> y,
                        double alpha) const {
  if (x.size() != static_cast<std::size_t>(n_rows_) ||
      y.size() != static_cast<std::size_t>(n_cols_)) {
    throw DimensionMismatch("tmul operand sizes");
  }
  for (int j = 0; j < n_cols_; ++j) {
    y[j] += alpha * col_dot(j, x);
  }
}

double SparseMatrix::col_dot(int j, std::span<const double> v) const {
  return kernels::sparse_dot(
      row_idx_.data() + col_ptr_[j], val_.data() + col_ptr_[j],
      static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j]), v.data());
}

double SparseMatrix::col_norm_sq(int j) const {
  double s = 0.0;
  for (double v : col_values(j)) s += v * v;
  return s;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(static_cast<std::size_t>(n_rows_) * n_cols_, 0.0);
  for (int j = 0; j < n_cols_; ++j) {
    for (std::int64_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
      d[static_cast<std::size_t>(j) * n_rows_ + row_idx_[k]] = val_[k];
    }
  }
  return d;
}

void SparseMatrix::validate() const {
  if (col_ptr_.size() != static_cast<std::size_t>(n_cols_) + 1 ||
      col_ptr_.front() != 0 ||
      col_ptr_.back() != static_cast<std::int64_t>(val_.size()) ||
      row_idx_.size() != val_.size()) {
    throw DimensionMismatch("inconsistent compressed storage");
  }
  for (int j = 0; j < n_cols_; ++j) {
    int prev = -1;
    for (std::int64_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
      const int i = row_idx_[k];
      if (i <= prev || i < 0 || i >= n_rows_) {
        throw DimensionMismatch("row indices not strictly increasing in [0, n_rows) at column " +
                                std::to_string(j));
      }
      if (val_[k] == 0.0) {
        throw DimensionMismatch("explicitly stored zero at column " + std::to_string(j));
      }
      if (!std::isfinite(val_[k])) {
        throw NonFiniteInput("matrix entry at column " + std::to_string(j));
      }
      prev = i;
    }
  }
}

}  // namespace dlp
