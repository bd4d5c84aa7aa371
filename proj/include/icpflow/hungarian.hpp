#pragma once

#include <Eigen/Core>

#include <vector>

namespace icpflow {

/**
 * @brief Minimum-cost perfect assignment on a square cost matrix.
 *
 * Shortest augmenting path formulation with row/column potentials, O(n^3).
 * Costs must be finite. Returns row_to_col with row_to_col[i] = column
 * assigned to row i.
 */
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// Sum of cost(i, row_to_col[i]).
double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& row_to_col);

}  // namespace icpflow
