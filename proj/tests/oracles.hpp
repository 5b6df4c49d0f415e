#pragma once

// Independent reference computations used to cross-check the library.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "blfix/matcore.hpp"

namespace blfix_test {

using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// Cofactor expansion along the first row; exact for small integer matrices.
inline std::int64_t laplace_det(const IntMatrix& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  std::int64_t det = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (a[0][c] == 0) continue;
    IntMatrix minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<std::int64_t> row;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != c) row.push_back(a[r][k]);
      }
      minor.push_back(std::move(row));
    }
    const std::int64_t term = a[0][c] * laplace_det(minor);
    det += (c % 2 == 0) ? term : -term;
  }
  return det;
}

/// min over maps of the largest |minor| over column subsets, enumerated as
/// bitmasks with exactly dprime bits set. Entries must be integers.
inline std::int64_t critical_c_oracle(const std::vector<blfix::Matrix>& maps) {
  std::int64_t best_overall = -1;
  for (const blfix::Matrix& l : maps) {
    const int rows = static_cast<int>(l.rows());
    const int cols = static_cast<int>(l.cols());
    std::int64_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << cols); ++mask) {
      if (std::popcount(mask) != rows) continue;
      IntMatrix sub(static_cast<std::size_t>(rows));
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          if (mask & (1u << c)) sub[r].push_back(static_cast<std::int64_t>(std::llround(l(r, c))));
        }
      }
      best = std::max<std::int64_t>(best, std::llabs(laplace_det(sub)));
    }
    if (best_overall < 0 || best < best_overall) best_overall = best;
  }
  return best_overall;
}

}  // namespace blfix_test
