// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

// Rectangular assignment with forbidden entries.
//
// The r x c problem is embedded in an (r + c) x (r + c) square problem:
//
//            real cols 0..c-1        dummy cols c..c+r-1
//   row i    cost(i, j) or inf       M at (i, c + i), inf elsewhere
//   dummy    0 at (r + j, j)         0
//
// Leaving real row i unmatched costs M, which exceeds the cost of any
// feasible matching, so the optimum has maximum cardinality first and
// minimum cost second. After the Hungarian pass, the dual potentials define
// the tight edges; every optimal matching lives there, and rows are then
// fixed greedily to their smallest tight column via alternating paths.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "aerotrack/association.hpp"
#include "aerotrack/error.hpp"

namespace aerotrack::association {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (std::isnan(fill) || fill < 0.0) {
    throw ValidationError("cost matrix entries must be >= 0 or infeasible");
  }
}

void CostMatrix::set(std::size_t r, std::size_t c, double value) {
  if (std::isnan(value) || value < 0.0) {
    throw ValidationError("cost matrix entries must be >= 0 or infeasible");
  }
  data_[r * cols_ + c] = value;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class SquareProblem {
 public:
  explicit SquareProblem(const CostMatrix& cost)
      : rows_(cost.rows()), cols_(cost.cols()), n_(rows_ + cols_), w_(n_ * n_, kInf) {
    double bound = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double row_max = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (cost.feasible(i, j)) row_max = std::max(row_max, cost.at(i, j));
      }
      bound += row_max;
    }
    unmatched_penalty_ = bound + 1.0;

    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) w(i, j) = cost.at(i, j);
      w(i, cols_ + i) = unmatched_penalty_;
    }
    for (std::size_t j = 0; j < cols_; ++j) {
      w(rows_ + j, j) = 0.0;
      for (std::size_t k = cols_; k < n_; ++k) w(rows_ + j, k) = 0.0;
    }
  }

  double& w(std::size_t i, std::size_t j) { return w_[i * n_ + j]; }
  double w(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }

  // Shortest augmenting path Hungarian method with row/column potentials.
  void solve() {
    const std::size_t n = n_;
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
      p[0] = i;
      std::size_t j0 = 0;
      std::vector<double> minv(n + 1, kInf);
      std::vector<char> used(n + 1, 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = p[j0];
        double delta = kInf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= n; ++j) {
          if (used[j]) continue;
          const double cur = w(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::size_t j = 0; j <= n; ++j) {
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

    row_to_col_.assign(n, 0);
    col_to_row_.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) {
      row_to_col_[p[j] - 1] = j - 1;
      col_to_row_[j - 1] = p[j] - 1;
    }

    const double tol = 1e-9 * std::max(1.0, unmatched_penalty_);
    tight_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double c = w(i, j);
        if (c == kInf) continue;
        if (c - u[i + 1] - v[j + 1] <= tol) tight_[i].push_back(j);
      }
    }
    // Matched edges are tight by construction; make sure rounding agrees.
    for (std::size_t i = 0; i < n; ++i) {
      auto& adj = tight_[i];
      if (std::find(adj.begin(), adj.end(), row_to_col_[i]) == adj.end()) {
        adj.insert(std::upper_bound(adj.begin(), adj.end(), row_to_col_[i]), row_to_col_[i]);
      }
    }
  }

  // Moves the optimal matching to the lexicographically smallest one that
  // uses only tight edges.
  void canonicalize() {
    std::vector<char> fixed(n_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      // Tight columns come sorted: real columns first, then the dummy c + i.
      for (const std::size_t target : tight_[i]) {
        if (target == row_to_col_[i]) break;
        if (reroute(i, target, fixed)) break;
      }
      fixed[i] = 1;
    }
  }

  AssignmentResult result(const CostMatrix& cost) const {
    AssignmentResult out;
    std::vector<char> col_used(cols_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const std::size_t j = row_to_col_[i];
      if (j < cols_ && cost.feasible(i, j)) {
        out.matches.emplace_back(i, j);
        out.total_cost += cost.at(i, j);
        col_used[j] = 1;
      } else {
        out.unmatched_rows.push_back(i);
      }
    }
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!col_used[j]) out.unmatched_cols.push_back(j);
    }
    return out;
  }

 private:
  // Gives `target` to row i. The row currently holding target must find
  // another tight column through an alternating path that ends at the column
  // row i releases; fixed rows never move.
  bool reroute(std::size_t i, std::size_t target, const std::vector<char>& fixed) {
    const std::size_t released = row_to_col_[i];
    const std::size_t start = col_to_row_[target];
    if (fixed[start]) return false;

    std::vector<std::size_t> parent_row(n_, n_);  // per row: previous row
    std::vector<char> seen(n_, 0);
    seen[start] = 1;
    seen[i] = 1;
    std::deque<std::size_t> queue{start};
    std::size_t end_row = n_;
    while (!queue.empty() && end_row == n_) {
      const std::size_t x = queue.front();
      queue.pop_front();
      for (const std::size_t y : tight_[x]) {
        if (y == target) continue;
        if (y == released) {
          end_row = x;
          break;
        }
        const std::size_t z = col_to_row_[y];
        if (seen[z] || fixed[z]) continue;
        seen[z] = 1;
        parent_row[z] = x;
        queue.push_back(z);
      }
    }
    if (end_row == n_) return false;

    // Walk back from end_row: each row on the path takes the column held by
    // its successor.
    std::size_t row = end_row;
    std::size_t take = released;
    while (true) {
      const std::size_t previous_col = row_to_col_[row];
      row_to_col_[row] = take;
      col_to_row_[take] = row;
      if (row == start) break;
      take = previous_col;
      row = parent_row[row];
    }
    row_to_col_[i] = target;
    col_to_row_[target] = i;
    return true;
  }

  std::size_t rows_, cols_, n_;
  std::vector<double> w_;
  double unmatched_penalty_ = 1.0;
  std::vector<std::size_t> row_to_col_, col_to_row_;
  std::vector<std::vector<std::size_t>> tight_;
};

}  // namespace

AssignmentResult solve_assignment(const CostMatrix& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) {
    AssignmentResult out;
    for (std::size_t i = 0; i < cost.rows(); ++i) out.unmatched_rows.push_back(i);
    for (std::size_t j = 0; j < cost.cols(); ++j) out.unmatched_cols.push_back(j);
    return out;
  }
  SquareProblem problem(cost);
  problem.solve();
  problem.canonicalize();
  return problem.result(cost);
}

}  // namespace aerotrack::association
