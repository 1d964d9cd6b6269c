// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dlp {

// Column-compressed sparse matrix. Row indices within each column are kept
// strictly increasing and explicit zeros are never stored; validate()
// enforces both.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int n_rows, int n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), col_ptr_(n_cols + 1, 0) {}

  static SparseMatrix identity(int n);
  // Column-major dense input; entries with |v| <= drop_tol are dropped.
  static SparseMatrix from_dense(int n_rows, int n_cols,
                                 std::span<const double> col_major,
                                 double drop_tol = 0.0);
  static SparseMatrix from_columns(
      int n_rows,
      const std::vector<std::vector<std::pair<int, double>>>& columns);

  int n_rows() const { return n_rows_; }
  int n_cols() const { return n_cols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(val_.size()); }

  std::span<const std::int32_t> col_rows(int j) const {
    return {row_idx_.data() + col_ptr_[j],
            static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }
  std::span<const double> col_values(int j) const {
    return {val_.data() + col_ptr_[j],
            static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }

  // Entries must be sorted by row with no duplicates; zeros are dropped.
  void append_column(std::span<const std::pair<int, double>> entries);

  // Rebuilds storage with `count` extra rows; new_rows[k] holds the entries
  // of appended row n_rows()+k over the existing columns.
  void append_rows(
      const std::vector<std::vector<std::pair<int, double>>>& new_rows);

  // y += alpha * A x
  void mul(std::span<const double> x, std::span<double> y,
           double alpha = 1.0) const;
  // y += alpha * A^T x
  void tmul(std::span<const double> x, std::span<double> y,
            double alpha = 1.0) const;
  // A(:,j)' * v
  double col_dot(int j, std::span<const double> v) const;
  double col_norm_sq(int j) const;

  std::vector<double> to_dense() const;  // column-major

  // Throws on out-of-range / unsorted indices, stored zeros, or non-finite
  // values.
  void validate() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<std::int64_t> col_ptr_{0};
  std::vector<std::int32_t> row_idx_;
  std::vector<double> val_;
};

}  // namespace dlp
