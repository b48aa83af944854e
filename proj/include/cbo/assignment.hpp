#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "cbo/error.hpp"
#include "cbo/matrix.hpp"

namespace cbo {

struct Assignment {
    std::vector<std::size_t> row_to_col;
    double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix via the Hungarian
/// method with row/column potentials (shortest augmenting paths), O(n^3).
inline Assignment solve_assignment(const Matrix& cost) {
    const std::size_t n = cost.rows();
    if (cost.cols() != n) throw InputError("solve_assignment: cost matrix must be square");
    Assignment result;
    if (n == 0) return result;

    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based internally; index 0 is the virtual source column.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);
    std::vector<double> min_slack(n + 1);
    std::vector<char> used(n + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        match_col[0] = i;
        std::size_t col = 0;
        std::fill(min_slack.begin(), min_slack.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[col] = 1;
            const std::size_t row = match_col[col];
            double delta = inf;
            std::size_t next = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double reduced = cost(row - 1, j - 1) - u[row] - v[j];
                if (reduced < min_slack[j]) {
                    min_slack[j] = reduced;
                    way[j] = col;
                }
                if (min_slack[j] < delta) {
                    delta = min_slack[j];
                    next = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            col = next;
        } while (match_col[col] != 0);
        do {
            const std::size_t prev = way[col];
            match_col[col] = match_col[prev];
            col = prev;
        } while (col != 0);
    }

    result.row_to_col.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) result.row_to_col[match_col[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) result.cost += cost(i, result.row_to_col[i]);
    return result;
}

}  // namespace cbo
