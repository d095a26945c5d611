#include "goal/hungarian.hpp"

#include <limits>
#include <stdexcept>

namespace goal {

std::vector<std::size_t> min_cost_assignment(const Matrix& cost) {
    const std::size_t n = cost.rows, m = cost.cols;
    if (n == 0) return {};
    if (n > m) throw std::invalid_argument("min_cost_assignment: needs rows <= cols");

    const double inf = std::numeric_limits<double>::infinity();
    // 1-indexed potentials formulation
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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

    std::vector<std::size_t> assignment(n, 0);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) assignment[p[j] - 1] = j - 1;
    return assignment;
}

double assignment_cost(const Matrix& cost, const std::vector<std::size_t>& assignment) {
    double s = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) s += cost(i, assignment[i]);
    return s;
}

std::vector<std::size_t> min_cost_assignment_lex(const Matrix& cost, double tol) {
    const std::size_t n = cost.rows, m = cost.cols;
    if (n == 0) return {};
    const double opt = assignment_cost(cost, min_cost_assignment(cost));

    std::vector<std::size_t> chosen;
    std::vector<char> col_taken(m, false);
    double fixed_cost = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        bool placed = false;
        for (std::size_t c = 0; c < m && !placed; ++c) {
            if (col_taken[c]) continue;
            // cost of the best completion with row i pinned to column c
            const std::size_t rest_rows = n - i - 1;
            double rest = 0.0;
            if (rest_rows > 0) {
                std::vector<std::size_t> cols;
                for (std::size_t j = 0; j < m; ++j)
                    if (!col_taken[j] && j != c) cols.push_back(j);
                Matrix sub(rest_rows, cols.size());
                for (std::size_t r = 0; r < rest_rows; ++r)
                    for (std::size_t j = 0; j < cols.size(); ++j)
                        sub(r, j) = cost(i + 1 + r, cols[j]);
                rest = assignment_cost(sub, min_cost_assignment(sub));
            }
            if (fixed_cost + cost(i, c) + rest <= opt + tol) {
                chosen.push_back(c);
                col_taken[c] = true;
                fixed_cost += cost(i, c);
                placed = true;
            }
        }
        if (!placed) throw std::logic_error("min_cost_assignment_lex: no consistent column");
    }
    return chosen;
}

}  // namespace goal
