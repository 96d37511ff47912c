#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace npam {

// Maximum-weight one-to-one assignment of rows to columns on a nonnegative
// integer weight table. Rows may stay unmatched (a zero-weight pair is never
// preferred over leaving the row free). Among optimal assignments the one
// using lower column ids wins.
struct Assignment {
  std::vector<std::optional<std::uint32_t>> row_to_col;
  std::int64_t weight = 0;
};

Assignment max_weight_assignment(const std::vector<std::vector<std::int64_t>>& weights);

}  // namespace npam
