#include "aafusion/metrics.hpp"

#include "aafusion/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aafusion {

double ospa(std::span<const Vector> x, std::span<const Vector> y, const OspaParams& params) {
    if (!(params.cutoff > 0.0) || !(params.order >= 1.0)) {
        throw std::invalid_argument("ospa: cutoff must be positive and order at least 1");
    }
    if (x.size() > y.size()) {
        std::swap(x, y);
    }
    if (y.empty()) {
        return 0.0;
    }
    const double c = params.cutoff;
    const double p = params.order;
    double total = std::pow(c, p) * static_cast<double>(y.size() - x.size());
    if (!x.empty()) {
        Eigen::MatrixXd cost(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (std::size_t j = 0; j < y.size(); ++j) {
                const double d = std::min((x[i] - y[j]).norm(), c);
                cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::pow(d, p);
            }
        }
        total += solve_assignment(cost).value().cost;
    }
    return std::pow(total / static_cast<double>(y.size()), 1.0 / p);
}

double acc(double total_cost, std::size_t runs, std::size_t steps, std::size_t sensors) {
    const auto denom = static_cast<double>(runs) * static_cast<double>(steps) * static_cast<double>(sensors);
    return denom > 0.0 ? total_cost / denom : 0.0;
}

} // namespace aafusion
