#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace drone_assoc {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

// Dense row-major N x M matrix of non-negative costs; +inf marks a pair that
// must never be matched.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct AssignmentResult {
  // (row, col) pairs sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost(const CostMatrix& c) const;
};

// Exact one-to-one assignment that first maximizes the number of allowed
// (finite) pairs and then minimizes their summed cost. Shortest augmenting
// path solver; deterministic, scanning lower indices first on ties.
AssignmentResult linear_assignment(const CostMatrix& cost);

}  // namespace drone_assoc
