#include "drone_assoc/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) throw ValidationError("cost matrix size mismatch");
}

double AssignmentResult::total_cost(const CostMatrix& c) const {
  double sum = 0.0;
  for (const auto& [r, col] : matches) sum += c(r, col);
  return sum;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Solves the dense rectangular problem with rows <= cols, every entry finite.
// Returns col4row.
std::vector<std::ptrdiff_t> solve_dense(std::size_t nr, std::size_t nc, const std::vector<double>& cost) {
  std::vector<double> u(nr, 0.0);
  std::vector<double> v(nc, 0.0);
  std::vector<double> shortest(nc);
  std::vector<std::ptrdiff_t> path(nc, -1);
  std::vector<std::ptrdiff_t> col4row(nr, -1);
  std::vector<std::ptrdiff_t> row4col(nc, -1);
  std::vector<char> seen_row(nr);
  std::vector<char> seen_col(nc);
  std::vector<std::size_t> remaining(nc);

  for (std::size_t cur_row = 0; cur_row < nr; ++cur_row) {
    double min_val = 0.0;
    std::size_t i = cur_row;
    std::size_t num_remaining = nc;
    // Filled in reverse so that the swap-remove below visits low columns first.
    for (std::size_t it = 0; it < nc; ++it) remaining[it] = nc - it - 1;
    std::fill(seen_row.begin(), seen_row.end(), 0);
    std::fill(seen_col.begin(), seen_col.end(), 0);
    std::fill(shortest.begin(), shortest.end(), kInf);

    std::ptrdiff_t sink = -1;
    while (sink == -1) {
      std::size_t index = 0;
      double lowest = kInf;
      bool found = false;
      seen_row[i] = 1;
      for (std::size_t it = 0; it < num_remaining; ++it) {
        const std::size_t j = remaining[it];
        const double r = min_val + cost[i * nc + j] - u[i] - v[j];
        if (r < shortest[j]) {
          path[j] = static_cast<std::ptrdiff_t>(i);
          shortest[j] = r;
        }
        if (!found || shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == -1)) {
          lowest = shortest[j];
          index = it;
          found = true;
        }
      }
      min_val = lowest;
      const std::size_t j = remaining[index];
      if (row4col[j] == -1) {
        sink = static_cast<std::ptrdiff_t>(j);
      } else {
        i = static_cast<std::size_t>(row4col[j]);
      }
      seen_col[j] = 1;
      remaining[index] = remaining[--num_remaining];
    }

    u[cur_row] += min_val;
    for (std::size_t r = 0; r < nr; ++r) {
      if (seen_row[r] && r != cur_row) u[r] += min_val - shortest[static_cast<std::size_t>(col4row[r])];
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (seen_col[c]) v[c] -= min_val - shortest[c];
    }

    auto j = static_cast<std::size_t>(sink);
    while (true) {
      const auto r = static_cast<std::size_t>(path[j]);
      row4col[j] = static_cast<std::ptrdiff_t>(r);
      const std::ptrdiff_t previous = col4row[r];
      col4row[r] = static_cast<std::ptrdiff_t>(j);
      if (r == cur_row) break;
      j = static_cast<std::size_t>(previous);
    }
  }
  return col4row;
}

}  // namespace

AssignmentResult linear_assignment(const CostMatrix& cost) {
  AssignmentResult result;
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  if (n == 0 || m == 0) {
    result.unmatched_rows.resize(n);
    std::iota(result.unmatched_rows.begin(), result.unmatched_rows.end(), 0);
    result.unmatched_cols.resize(m);
    std::iota(result.unmatched_cols.begin(), result.unmatched_cols.end(), 0);
    return result;
  }

  // Forbidden pairs become a penalty larger than any sum of allowed costs, so
  // the full-cardinality optimum uses as few of them as possible.
  double max_finite = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const double x = cost(r, c);
      if (std::isnan(x) || x < 0.0) throw ValidationError("cost matrix entries must be non-negative");
      if (std::isfinite(x)) max_finite = std::max(max_finite, x);
    }
  }
  const bool transposed = n > m;
  const std::size_t nr = transposed ? m : n;
  const std::size_t nc = transposed ? n : m;
  const double penalty = (static_cast<double>(nr) * max_finite + 1.0) * 2.0;

  std::vector<double> dense(nr * nc);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double x = transposed ? cost(c, r) : cost(r, c);
      dense[r * nc + c] = std::isfinite(x) ? x : penalty;
    }
  }
  const auto col4row = solve_dense(nr, nc, dense);

  std::vector<char> row_used(n, 0);
  std::vector<char> col_used(m, 0);
  for (std::size_t r = 0; r < nr; ++r) {
    const auto c = static_cast<std::size_t>(col4row[r]);
    const std::size_t row = transposed ? c : r;
    const std::size_t col = transposed ? r : c;
    if (!std::isfinite(cost(row, col))) continue;
    result.matches.emplace_back(row, col);
    row_used[row] = 1;
    col_used[col] = 1;
  }
  std::sort(result.matches.begin(), result.matches.end());
  for (std::size_t r = 0; r < n; ++r)
    if (!row_used[r]) result.unmatched_rows.push_back(r);
  for (std::size_t c = 0; c < m; ++c)
    if (!col_used[c]) result.unmatched_cols.push_back(c);
  return result;
}

}  // namespace drone_assoc
