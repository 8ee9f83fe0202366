#include "aafusion/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace aafusion {

namespace {

// Shortest augmenting path with potentials (Kuhn-Munkres / Jonker-Volgenant
// style) on a matrix with only finite entries. Rows <= cols.
std::vector<int> hungarian(const Eigen::MatrixXd& c) {
    const int n = static_cast<int>(c.rows());
    const int m = static_cast<int>(c.cols());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
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
    for (int j = 1; j <= m; ++j) {
        if (p[j] != 0) {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    return row_to_col;
}

struct Subproblem {
    Eigen::MatrixXd cost;
    AssignmentSolution solution;
};

struct ByCost {
    bool operator()(const Subproblem& a, const Subproblem& b) const { return a.solution.cost > b.solution.cost; }
};

} // namespace

std::optional<AssignmentSolution> solve_assignment(const Eigen::MatrixXd& cost) {
    const auto n = cost.rows();
    const auto m = cost.cols();
    if (n > m) {
        throw std::invalid_argument("solve_assignment: more rows than columns");
    }
    if (n == 0) {
        return AssignmentSolution{};
    }
    // Forbidden entries become a penalty larger than any all-finite solution
    // could reach, so a solution touching one is provably infeasible.
    double max_abs = 0.0;
    bool any_forbidden = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double x = cost(i, j);
            if (std::isinf(x) && x > 0) {
                any_forbidden = true;
            } else if (std::isnan(x) || std::isinf(x)) {
                throw std::invalid_argument("solve_assignment: cost must be finite or +inf");
            } else {
                max_abs = std::max(max_abs, std::abs(x));
            }
        }
    }
    Eigen::MatrixXd work = cost;
    const double penalty = 2.0 * static_cast<double>(n + 1) * (max_abs + 1.0);
    if (any_forbidden) {
        work = cost.unaryExpr([penalty](double x) { return std::isinf(x) ? penalty : x; });
    }
    AssignmentSolution sol;
    sol.row_to_col = hungarian(work);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = cost(i, sol.row_to_col[static_cast<std::size_t>(i)]);
        if (std::isinf(x)) {
            return std::nullopt;
        }
        sol.cost += x;
    }
    return sol;
}

std::vector<AssignmentSolution> murty_k_best(const Eigen::MatrixXd& cost, std::size_t k) {
    std::vector<AssignmentSolution> out;
    if (k == 0) {
        return out;
    }
    auto first = solve_assignment(cost);
    if (!first) {
        return out;
    }
    std::priority_queue<Subproblem, std::vector<Subproblem>, ByCost> queue;
    queue.push(Subproblem{cost, std::move(*first)});
    const auto n = cost.rows();
    while (!queue.empty() && out.size() < k) {
        Subproblem top = queue.top();
        queue.pop();
        out.push_back(top.solution);
        // Partition the remaining solution space of `top`: for row i, keep the
        // assignments of rows < i fixed and forbid row i's current column.
        Eigen::MatrixXd constrained = top.cost;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int col = top.solution.row_to_col[static_cast<std::size_t>(i)];
            Eigen::MatrixXd child = constrained;
            child(i, col) = kForbiddenCost;
            if (auto sol = solve_assignment(child)) {
                queue.push(Subproblem{std::move(child), std::move(*sol)});
            }
            // Force (i, col) for the following children.
            const double keep = constrained(i, col);
            constrained.row(i).setConstant(kForbiddenCost);
            constrained.col(col).setConstant(kForbiddenCost);
            constrained(i, col) = keep;
        }
    }
    return out;
}

} // namespace aafusion
