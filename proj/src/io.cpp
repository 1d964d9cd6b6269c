// SPDX-License-Identifier: Apache-2.0

#include "dlp/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dlp/errors.hpp"

namespace dlp {

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_matrix_market(const std::filesystem::path& path,
                         const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n_rows() << ' ' << a.n_cols() << ' ' << a.nnz() << '\n';
  for (int j = 0; j < a.n_cols(); ++j) {
    auto rows = a.col_rows(j);
    auto vals = a.col_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out << rows[k] + 1 << ' ' << j + 1 << ' ' << format_value(vals[k]) << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0) {
    throw IoError("unsupported matrix market banner in " + path.string());
  }
  do {
    if (!std::getline(in, line)) throw IoError("truncated header");
  } while (!line.empty() && line[0] == '%');

  std::istringstream header(line);
  long long n_rows = 0, n_cols = 0, nnz = 0;
  if (!(header >> n_rows >> n_cols >> nnz)) throw IoError("bad size line");

  std::vector<std::vector<std::pair<int, double>>> cols(n_cols);
  for (long long k = 0; k < nnz; ++k) {
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw IoError("truncated entries");
    if (i < 1 || i > n_rows || j < 1 || j > n_cols) {
      throw IoError("entry out of range");
    }
    cols[j - 1].emplace_back(static_cast<int>(i - 1), v);
  }
  for (auto& col : cols) std::sort(col.begin(), col.end());
  return SparseMatrix::from_columns(static_cast<int>(n_rows), cols);
}

void write_csv_vector(const std::filesystem::path& path,
                      std::span<const double> v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (double x : v) out << format_value(x) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> read_csv_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    v.push_back(std::stod(line));
  }
  return v;
}

}  // namespace dlp
