#pragma once

#include "aafusion/gaussian.hpp"

#include <random>

namespace aafusion::bench {

inline GaussianMixture random_mixture(std::mt19937_64& rng, Eigen::Index n, std::size_t count, double spread = 200.0) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(0.05, 1.0);
    GaussianMixture gm(n);
    for (std::size_t i = 0; i < count; ++i) {
        Vector mean(n);
        Matrix a(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            mean(r) = spread * nd(rng);
            for (Eigen::Index c = 0; c < n; ++c) {
                a(r, c) = nd(rng);
            }
        }
        gm.push_back(GaussianComponent{u(rng), mean, a * a.transpose() + Matrix::Identity(n, n) * 10.0});
    }
    return gm;
}

} // namespace aafusion::bench
