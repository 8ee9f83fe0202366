#include "aafusion/gaussian.hpp"

#include "aafusion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace aafusion {

namespace {

constexpr double kJitter = 1e-9;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool try_factor(const Matrix& cov, CovarianceFactor& out) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    out.lower = llt.matrixL();
    const auto diag = out.lower.diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
        return false;
    }
    out.log_det = 2.0 * diag.array().log().sum();
    return true;
}

} // namespace

GaussianComponent make_component(double weight, Vector mean, Matrix cov) {
    return GaussianComponent{weight, std::move(mean), symmetrized(cov)};
}

GaussianMixture::GaussianMixture(Eigen::Index dim, std::vector<GaussianComponent> components) : dim_(dim) {
    components_.reserve(components.size());
    for (auto& c : components) {
        push_back(std::move(c));
    }
}

void GaussianMixture::push_back(GaussianComponent component) {
    if (dim_ == 0) {
        dim_ = component.dim();
    }
    if (component.dim() != dim_ || component.cov.rows() != dim_ || component.cov.cols() != dim_) {
        throw std::invalid_argument("GaussianMixture::push_back: component dimension " +
                                    std::to_string(component.dim()) + " does not match mixture dimension " +
                                    std::to_string(dim_));
    }
    component.cov = symmetrized(component.cov);
    components_.push_back(std::move(component));
}

std::vector<double> GaussianMixture::weights() const {
    std::vector<double> w;
    w.reserve(components_.size());
    for (const auto& c : components_) {
        w.push_back(c.weight);
    }
    return w;
}

void GaussianMixture::set_weights(std::span<const double> weights) {
    if (weights.size() != components_.size()) {
        throw std::invalid_argument("GaussianMixture::set_weights: size mismatch");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        components_[i].weight = weights[i];
    }
}

void GaussianMixture::scale_weights(double factor) {
    for (auto& c : components_) {
        c.weight *= factor;
    }
}

CovarianceFactor factorize(const Matrix& cov) {
    const Matrix sym = symmetrized(cov);
    CovarianceFactor f;
    if (try_factor(sym, f)) {
        return f;
    }
    Matrix jittered = sym;
    jittered.diagonal().array() += kJitter;
    if (try_factor(jittered, f)) {
        return f;
    }
    throw SingularCovarianceError("covariance is not positive definite after regularization");
}

PreparedGaussian prepare(const GaussianComponent& g) { return PreparedGaussian{g.mean, g.cov, factorize(g.cov)}; }

std::vector<PreparedGaussian> prepare(const GaussianMixture& gm) {
    std::vector<PreparedGaussian> out;
    out.reserve(gm.size());
    for (const auto& c : gm) {
        out.push_back(prepare(c));
    }
    return out;
}

double kl_gaussian(const PreparedGaussian& a, const PreparedGaussian& b) {
    if (a.mean.size() != b.mean.size()) {
        throw std::invalid_argument("kl_gaussian: dimension mismatch");
    }
    if (a.mean == b.mean && a.cov == b.cov) {
        return 0.0;
    }
    const auto n = static_cast<double>(a.mean.size());
    const auto lb = b.factor.lower.triangularView<Eigen::Lower>();
    const Vector y = lb.solve(a.mean - b.mean);
    const Matrix m = lb.solve(a.factor.lower);
    const double kl = 0.5 * (y.squaredNorm() + m.squaredNorm() + b.factor.log_det - a.factor.log_det - n);
    return kl > 0.0 ? kl : 0.0;
}

double kl_gaussian(const GaussianComponent& a, const GaussianComponent& b) {
    return kl_gaussian(prepare(a), prepare(b));
}

Eigen::MatrixXd kl_matrix(std::span<const PreparedGaussian> from, std::span<const PreparedGaussian> to) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(from.size()), static_cast<Eigen::Index>(to.size()));
    for (std::size_t a = 0; a < from.size(); ++a) {
        for (std::size_t b = 0; b < to.size(); ++b) {
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = kl_gaussian(from[a], to[b]);
        }
    }
    return out;
}

Eigen::MatrixXd kl_matrix(const GaussianMixture& from, const GaussianMixture& to) {
    const auto pf = prepare(from);
    const auto pt = prepare(to);
    return kl_matrix(pf, pt);
}

double log_density(const PreparedGaussian& g, const Vector& x) {
    const auto n = static_cast<double>(g.mean.size());
    const Vector y = g.factor.lower.triangularView<Eigen::Lower>().solve(x - g.mean);
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + g.factor.log_det + y.squaredNorm());
}

double density(const GaussianComponent& g, const Vector& x) { return std::exp(log_density(prepare(g), x)); }

GaussianComponent moment_match_merge(std::span<const GaussianComponent> parts) {
    if (parts.empty()) {
        throw DegenerateClusterError("moment_match_merge: empty part-set");
    }
    double total = 0.0;
    for (const auto& p : parts) {
        total += p.weight;
    }
    if (!(total > 0.0)) {
        throw DegenerateClusterError("moment_match_merge: zero total mass");
    }
    const Eigen::Index n = parts.front().dim();
    Vector mean = Vector::Zero(n);
    for (const auto& p : parts) {
        mean += p.weight * p.mean;
    }
    mean /= total;
    Matrix cov = Matrix::Zero(n, n);
    for (const auto& p : parts) {
        const Vector d = p.mean - mean;
        cov += (p.weight / total) * (p.cov + d * d.transpose());
    }
    return GaussianComponent{total, std::move(mean), symmetrized(cov)};
}

double mixture_eval(const GaussianMixture& gm, const Vector& x) {
    double sum = 0.0;
    for (const auto& c : gm) {
        if (c.weight != 0.0) {
            sum += c.weight * std::exp(log_density(prepare(c), x));
        }
    }
    return sum;
}

double total_mass(const GaussianMixture& gm) {
    double sum = 0.0;
    for (const auto& c : gm) {
        sum += c.weight;
    }
    return sum;
}

GaussianMixture reduce(const GaussianMixture& gm, double prune_threshold, double merge_threshold, std::size_t cap) {
    if (cap == 0) {
        throw std::invalid_argument("reduce: cap must be positive");
    }
    std::vector<std::size_t> alive;
    alive.reserve(gm.size());
    for (std::size_t j = 0; j < gm.size(); ++j) {
        if (gm[j].weight >= prune_threshold) {
            alive.push_back(j);
        }
    }
    // Heaviest first; stable so equal weights keep input order.
    std::stable_sort(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) { return gm[a].weight > gm[b].weight; });

    GaussianMixture merged(gm.dim());
    std::vector<bool> used(gm.size(), false);
    std::vector<GaussianComponent> cluster;
    for (const std::size_t lead : alive) {
        if (used[lead]) {
            continue;
        }
        const PreparedGaussian leader = prepare(gm[lead]);
        const auto l = leader.factor.lower.triangularView<Eigen::Lower>();
        cluster.clear();
        for (const std::size_t j : alive) {
            if (used[j]) {
                continue;
            }
            const double d2 = j == lead ? 0.0 : l.solve(gm[j].mean - leader.mean).squaredNorm();
            if (j == lead || d2 < merge_threshold) {
                used[j] = true;
                cluster.push_back(gm[j]);
            }
        }
        merged.push_back(cluster.size() == 1 ? cluster.front() : moment_match_merge(cluster));
    }

    std::vector<GaussianComponent> out = merged.components();
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
    if (out.size() > cap) {
        std::vector<std::vector<GaussianComponent>> groups(cap);
        std::vector<PreparedGaussian> kept;
        kept.reserve(cap);
        for (std::size_t i = 0; i < cap; ++i) {
            groups[i].push_back(out[i]);
            kept.push_back(prepare(out[i]));
        }
        for (std::size_t i = cap; i < out.size(); ++i) {
            std::size_t best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < cap; ++k) {
                const double d2 =
                    kept[k].factor.lower.triangularView<Eigen::Lower>().solve(out[i].mean - kept[k].mean).squaredNorm();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = k;
                }
            }
            groups[best].push_back(out[i]);
        }
        std::vector<GaussianComponent> capped;
        capped.reserve(cap);
        for (auto& g : groups) {
            capped.push_back(g.size() == 1 ? g.front() : moment_match_merge(g));
        }
        std::stable_sort(capped.begin(), capped.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
        out = std::move(capped);
    }
    return GaussianMixture(gm.dim(), std::move(out));
}

} // namespace aafusion
