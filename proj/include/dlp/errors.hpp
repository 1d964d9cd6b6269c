// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dlp {

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what)
      : std::invalid_argument("dimension mismatch: " + what) {}
};

struct InvalidBound : std::invalid_argument {
  explicit InvalidBound(const std::string& what)
      : std::invalid_argument("invalid bound: " + what) {}
};

struct NonFiniteInput : std::invalid_argument {
  explicit NonFiniteInput(const std::string& what)
      : std::invalid_argument("non-finite input: " + what) {}
};

struct EmptyGrid : std::invalid_argument {
  explicit EmptyGrid(const std::string& what)
      : std::invalid_argument("empty grid: " + what) {}
};

struct InvalidAnchor : std::invalid_argument {
  explicit InvalidAnchor(const std::string& what)
      : std::invalid_argument("invalid anchor: " + what) {}
};

struct InitInfeasible : std::runtime_error {
  explicit InitInfeasible(const std::string& what)
      : std::runtime_error("infeasible instance: " + what) {}
};

struct DegenerateColumn : std::runtime_error {
  explicit DegenerateColumn(const std::string& what)
      : std::runtime_error("degenerate column: " + what) {}
};

// Basis matrix stayed singular after refactorization retries and repair.
struct NumericalFailure : std::runtime_error {
  explicit NumericalFailure(const std::string& what)
      : std::runtime_error("numerical failure: " + what) {}
};

struct PowerMethodDivergence : std::runtime_error {
  explicit PowerMethodDivergence(const std::string& what)
      : std::runtime_error("power method divergence: " + what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what)
      : std::runtime_error("io error: " + what) {}
};

}  // namespace dlp
