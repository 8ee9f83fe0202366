#include "aafusion/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace aafusion {

namespace {

void require_nonempty(const GaussianMixture& a, const GaussianMixture& b, const char* what) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty mixture");
    }
}

std::vector<double> normalized_weights(const GaussianMixture& gm) {
    auto w = gm.weights();
    const double mass = total_mass(gm);
    if (!(mass > 0.0)) {
        throw std::invalid_argument("bound: mixture has zero mass");
    }
    for (auto& x : w) {
        x /= mass;
    }
    return w;
}

GaussianComponent collapse(const GaussianMixture& gm) {
    const auto w = normalized_weights(gm);
    std::vector<GaussianComponent> parts;
    parts.reserve(gm.size());
    for (std::size_t i = 0; i < gm.size(); ++i) {
        parts.push_back(GaussianComponent{w[i], gm[i].mean, gm[i].cov});
    }
    return moment_match_merge(parts);
}

double log_sum_exp(std::span<const double> terms) {
    double top = -std::numeric_limits<double>::infinity();
    for (const double t : terms) {
        top = std::max(top, t);
    }
    if (!std::isfinite(top)) {
        return top;
    }
    double s = 0.0;
    for (const double t : terms) {
        s += std::exp(t - top);
    }
    return top + std::log(s);
}

/// log N(mu_a; mu_b, Sigma_a + Sigma_b).
double log_product_integral(const GaussianComponent& a, const GaussianComponent& b) {
    const auto f = factorize(a.cov + b.cov);
    const Vector d = a.mean - b.mean;
    const Vector y = f.lower.triangularView<Eigen::Lower>().solve(d);
    const auto n = static_cast<double>(d.size());
    return -0.5 * (y.squaredNorm() + f.log_det + n * std::log(2.0 * std::numbers::pi));
}

/// Shared shape of D4 and D5: sum_a pi_a [lse_a'(log pi_a' + s(a,a')) - lse_b(log w_b + s(a,b))].
template <class Score>
double variational_ratio(const GaussianMixture& f, const GaussianMixture& g, Score score) {
    const auto pi = normalized_weights(f);
    const auto w = normalized_weights(g);
    std::vector<double> num(f.size());
    std::vector<double> den(g.size());
    double total = 0.0;
    for (std::size_t a = 0; a < f.size(); ++a) {
        if (pi[a] == 0.0) {
            continue;
        }
        for (std::size_t a2 = 0; a2 < f.size(); ++a2) {
            num[a2] = pi[a2] > 0.0 ? std::log(pi[a2]) + score(f[a], f[a2]) : -std::numeric_limits<double>::infinity();
        }
        for (std::size_t b = 0; b < g.size(); ++b) {
            den[b] = w[b] > 0.0 ? std::log(w[b]) + score(f[a], g[b]) : -std::numeric_limits<double>::infinity();
        }
        total += pi[a] * (log_sum_exp(num) - log_sum_exp(den));
    }
    return total;
}

} // namespace

double bound_d1(const PhdAA& aa, const GaussianMixture& local) {
    require_nonempty(aa.mixture, local, "bound_d1");
    return kl_gaussian(collapse(aa.mixture), collapse(local));
}

double bound_d2(const PhdAA& aa, const GaussianMixture& local) {
    require_nonempty(aa.mixture, local, "bound_d2");
    return kl_matrix(aa.mixture, local).minCoeff();
}

double bound_d3(const PhdAA& aa, const GaussianMixture& local) {
    require_nonempty(aa.mixture, local, "bound_d3");
    const Eigen::MatrixXd kl = kl_matrix(aa.mixture, local);
    double total = 0.0;
    for (std::size_t a = 0; a < aa.mixture.size(); ++a) {
        for (std::size_t b = 0; b < local.size(); ++b) {
            total += aa.mixture[a].weight * local[b].weight *
                     kl(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    return total;
}

double bound_d4(const PhdAA& aa, const GaussianMixture& local) {
    require_nonempty(aa.mixture, local, "bound_d4");
    return variational_ratio(aa.mixture, local, log_product_integral);
}

double bound_d5(const PhdAA& aa, const GaussianMixture& local) {
    require_nonempty(aa.mixture, local, "bound_d5");
    return variational_ratio(aa.mixture, local,
                             [](const GaussianComponent& a, const GaussianComponent& b) { return -kl_gaussian(a, b); });
}

} // namespace aafusion
