#include "aafusion/assignment.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace aafusion;

namespace {

/// All finite-cost injective row->column assignments, ascending by cost.
std::vector<double> enumerate_costs(const Eigen::MatrixXd& cost) {
    std::vector<std::size_t> cols(static_cast<std::size_t>(cost.cols()));
    std::iota(cols.begin(), cols.end(), 0);
    std::vector<double> out;
    std::vector<std::vector<std::size_t>> seen;
    do {
        std::vector<std::size_t> head(cols.begin(), cols.begin() + cost.rows());
        if (std::find(seen.begin(), seen.end(), head) != seen.end()) {
            continue;
        }
        seen.push_back(head);
        double s = 0.0;
        for (Eigen::Index i = 0; i < cost.rows(); ++i) {
            s += cost(i, static_cast<Eigen::Index>(head[static_cast<std::size_t>(i)]));
        }
        if (std::isfinite(s)) {
            out.push_back(s);
        }
    } while (std::next_permutation(cols.begin(), cols.end()));
    std::sort(out.begin(), out.end());
    return out;
}

Eigen::MatrixXd random_cost(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m, double forbid) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::bernoulli_distribution f(forbid);
    Eigen::MatrixXd c(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            c(i, j) = f(rng) ? kForbiddenCost : u(rng);
        }
    }
    return c;
}

} // namespace

TEST(SolveAssignment, SmallKnownProblem) {
    Eigen::MatrixXd c(3, 3);
    c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
    const auto sol = solve_assignment(c);
    ASSERT_TRUE(sol);
    EXPECT_DOUBLE_EQ(sol->cost, 5.0);
    EXPECT_EQ(sol->row_to_col, (std::vector<int>{1, 0, 2}));
}

TEST(SolveAssignment, MatchesBruteForceOnRandomRectangularProblems) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const Eigen::Index n = 1 + trial % 4;
        const Eigen::Index m = n + trial % 3;
        const auto c = random_cost(rng, n, m, 0.2);
        const auto all = enumerate_costs(c);
        const auto sol = solve_assignment(c);
        if (all.empty()) {
            EXPECT_FALSE(sol) << "trial " << trial;
            continue;
        }
        ASSERT_TRUE(sol) << "trial " << trial;
        EXPECT_NEAR(sol->cost, all.front(), 1e-12);
    }
}

TEST(SolveAssignment, AllForbiddenRowIsInfeasible) {
    Eigen::MatrixXd c(2, 2);
    c << 1, 2, kForbiddenCost, kForbiddenCost;
    EXPECT_FALSE(solve_assignment(c));
}

TEST(MurtyKBest, RanksMatchEnumeration) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 1 + trial % 3;
        const Eigen::Index m = n + 1 + trial % 3;
        const auto c = random_cost(rng, n, m, 0.15);
        const auto all = enumerate_costs(c);
        const auto ranked = murty_k_best(c, 8);
        ASSERT_EQ(ranked.size(), std::min<std::size_t>(8, all.size())) << "trial " << trial;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            EXPECT_NEAR(ranked[i].cost, all[i], 1e-12);
        }
    }
}
