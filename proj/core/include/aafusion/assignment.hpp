#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace aafusion {

/// Marks a forbidden (row, column) pairing in a cost matrix.
inline constexpr double kForbiddenCost = std::numeric_limits<double>::infinity();

struct AssignmentSolution {
    /// Column assigned to each row.
    std::vector<int> row_to_col;
    double cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
/// Entries equal to kForbiddenCost may not be used. Returns nullopt when no
/// feasible complete assignment exists. O(rows^2 * cols) shortest augmenting path.
std::optional<AssignmentSolution> solve_assignment(const Eigen::MatrixXd& cost);

/// Murty's ranked assignment: up to `k` feasible solutions in non-decreasing cost.
std::vector<AssignmentSolution> murty_k_best(const Eigen::MatrixXd& cost, std::size_t k);

} // namespace aafusion
