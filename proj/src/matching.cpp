#include "npam/matching.hpp"

#include <limits>

#include "npam/error.hpp"

namespace npam {

namespace {

// Rectangular min-cost assignment (n rows <= m columns), potentials method.
// cost is 1-based: cost[i][j] for i in 1..n, j in 1..m. Returns p[j] = row of column j.
std::vector<std::size_t> hungarian(const std::vector<std::vector<long double>>& cost, std::size_t n, std::size_t m) {
  const long double inf = std::numeric_limits<long double>::infinity();
  std::vector<long double> u(n + 1, 0), v(m + 1, 0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<long double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      long double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const long double cur = cost[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  return p;
}

}  // namespace

Assignment max_weight_assignment(const std::vector<std::vector<std::int64_t>>& weights) {
  Assignment out;
  const std::size_t rows = weights.size();
  out.row_to_col.assign(rows, std::nullopt);
  if (rows == 0) return out;
  const std::size_t cols = weights.front().size();
  for (const auto& r : weights) {
    if (r.size() != cols) throw InputError("assignment: ragged weight table");
    for (auto w : r)
      if (w < 0) throw InputError("assignment: negative weight");
  }

  // Scaled weights with a column-id penalty: the scale exceeds any possible
  // penalty total, so weight dominates and lower ids break ties. One dummy
  // column per row lets a row stay free at zero cost.
  const long double scale = static_cast<long double>(rows) * static_cast<long double>(cols + 1) + 1;
  const std::size_t m = cols + rows;
  std::vector<std::vector<long double>> cost(rows + 1, std::vector<long double>(m + 1, 0));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      cost[i + 1][j + 1] = -(static_cast<long double>(weights[i][j]) * scale - static_cast<long double>(j + 1));

  const auto p = hungarian(cost, rows, m);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (p[j] == 0) continue;
    const std::size_t i = p[j] - 1;
    out.row_to_col[i] = static_cast<std::uint32_t>(j - 1);
    out.weight += weights[i][j - 1];
  }
  return out;
}

}  // namespace npam
