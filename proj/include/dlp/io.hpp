// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dlp/sparse_matrix.hpp"

namespace dlp {

// Matrix Market coordinate format, real general, 1-based indices, values
// written with 17 significant digits so doubles round-trip exactly.
void write_matrix_market(const std::filesystem::path& path,
                         const SparseMatrix& a);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

// One value per line, 17 significant digits.
void write_csv_vector(const std::filesystem::path& path,
                      std::span<const double> v);
std::vector<double> read_csv_vector(const std::filesystem::path& path);

}  // namespace dlp
