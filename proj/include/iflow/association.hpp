#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "iflow/core.hpp"
#include "iflow/flowops.hpp"

namespace iflow {

template <typename Scalar>
using ScoreMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Pairwise overlap counts: rows are predictions, columns detections.
using AffinityMatrix = ScoreMatrix<std::int64_t>;

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

/// Minimum-cost perfect assignment on a square matrix (Kuhn-Munkres with
/// potentials, O(n^3)). Returns the column assigned to each row. Among equal
/// cost candidates the lowest column index wins, so results are reproducible.
template <typename Scalar>
std::vector<int> hungarian_min_cost(const ScoreMatrix<Scalar>& cost) {
  const int n = int(cost.rows());
  if (cost.cols() != cost.rows()) throw InvalidArgument("hungarian_min_cost needs a square matrix");
  const Scalar inf = std::numeric_limits<Scalar>::max();
  // 1-based arrays; index 0 is the virtual root.
  std::vector<Scalar> u(n + 1, Scalar(0)), v(n + 1, Scalar(0));
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Scalar> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

/// Maximum-total-score one-to-one matching on a non-negative rectangular
/// matrix. The matrix is padded to square with zero score and converted to
/// cost = max - score; pairs whose score is not positive are reported as
/// unmatched.
template <typename Scalar>
Matching max_score_matching(const ScoreMatrix<Scalar>& score) {
  const int rows = int(score.rows()), cols = int(score.cols());
  Matching m;
  const int n = std::max(rows, cols);
  std::vector<int> assignment;
  if (rows > 0 && cols > 0) {
    const Scalar top = score.maxCoeff();
    ScoreMatrix<Scalar> cost = ScoreMatrix<Scalar>::Constant(n, n, top);
    cost.topLeftCorner(rows, cols).array() -= score.array();
    assignment = hungarian_min_cost<Scalar>(cost);
  }
  std::vector<bool> col_used(std::size_t(cols), false);
  for (int r = 0; r < rows; ++r) {
    const int c = assignment.empty() ? -1 : assignment[r];
    if (c >= 0 && c < cols && score(r, c) > Scalar(0)) {
      m.pairs.emplace_back(r, c);
      col_used[c] = true;
    } else {
      m.unmatched_rows.push_back(r);
    }
  }
  for (int c = 0; c < cols; ++c)
    if (!col_used[c]) m.unmatched_cols.push_back(c);
  return m;
}

/// Entry (i, j) is #(predictions[i] ∩ detections[j]). Throws DimsMismatch.
AffinityMatrix affinity(std::span<const PredictedMask> predictions,
                        std::span<const InstanceMask> detections);

/// Hungarian assignment maximizing total overlap; zero-overlap pairs are
/// never returned.
inline Matching solve_assignment(const AffinityMatrix& a) { return max_score_matching(a); }

inline std::int64_t total_affinity(const AffinityMatrix& a, const Matching& m) {
  std::int64_t total = 0;
  for (const auto& [r, c] : m.pairs) total += a(r, c);
  return total;
}

}  // namespace iflow
