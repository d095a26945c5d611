#pragma once

#include <vector>

#include "goal/matrix.hpp"

namespace goal {

// Minimum-cost assignment of rows to distinct columns (rows <= cols),
// O(n^2 m) potentials method. Returns one column per row.
std::vector<std::size_t> min_cost_assignment(const Matrix& cost);

double assignment_cost(const Matrix& cost, const std::vector<std::size_t>& assignment);

// Among all minimum-cost assignments, the lexicographically smallest
// column vector. Intended for small instances (re-solves per position).
std::vector<std::size_t> min_cost_assignment_lex(const Matrix& cost, double tol = 1e-9);

}  // namespace goal
