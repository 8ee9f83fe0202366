#include "aafusion/fusion.hpp"

#include "aafusion/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace aafusion {

namespace {

constexpr double kMassTolerance = 1e-9;

std::vector<double> component_weights(const GaussianMixture& gm) { return gm.weights(); }

/// Nearest assignment from a precomputed KL matrix (rows: fused, cols: local).
Assignment assign_from_kl(const Eigen::MatrixXd& kl, std::span<const double> pi, std::optional<double> gate,
                          std::vector<double>* min_kl = nullptr) {
    const auto rows = kl.rows();
    const auto cols = kl.cols();
    Assignment h;
    h.target.resize(static_cast<std::size_t>(rows));
    h.mass.assign(static_cast<std::size_t>(rows), 0.0);
    std::vector<double> best_kl(static_cast<std::size_t>(rows));
    for (Eigen::Index a = 0; a < rows; ++a) {
        Eigen::Index best = 0;
        double best_value = kl(a, 0);
        for (Eigen::Index b = 1; b < cols; ++b) {
            if (kl(a, b) < best_value) {
                best_value = kl(a, b);
                best = b;
            }
        }
        h.target[static_cast<std::size_t>(a)] = static_cast<std::size_t>(best);
        h.mass[static_cast<std::size_t>(a)] = pi[static_cast<std::size_t>(a)];
        best_kl[static_cast<std::size_t>(a)] = best_value;
    }
    if (gate) {
        double total = 0.0;
        double kept = 0.0;
        for (Eigen::Index a = 0; a < rows; ++a) {
            total += pi[static_cast<std::size_t>(a)];
            if (best_kl[static_cast<std::size_t>(a)] <= *gate) {
                kept += pi[static_cast<std::size_t>(a)];
            }
        }
        if (kept > 0.0) {
            const double scale = total / kept;
            for (Eigen::Index a = 0; a < rows; ++a) {
                auto i = static_cast<std::size_t>(a);
                if (best_kl[i] <= *gate) {
                    h.mass[i] = pi[i] * scale;
                } else {
                    h.target[i].reset();
                    h.mass[i] = 0.0;
                }
            }
        }
    }
    if (min_kl != nullptr) {
        *min_kl = std::move(best_kl);
    }
    return h;
}

double goodness(const Eigen::MatrixXd& kl, const Assignment& h) {
    double k = 0.0;
    for (std::size_t a = 0; a < h.target.size(); ++a) {
        if (h.target[a]) {
            k += h.mass[a] * kl(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(*h.target[a]));
        }
    }
    return k;
}

} // namespace

double Assignment::total() const {
    double t = 0.0;
    for (const double m : mass) {
        t += m;
    }
    return t;
}

PhdAA weighted_phd_aa(std::span<const FusionInput> inputs) {
    if (inputs.empty()) {
        throw FusionWeightError("weighted_phd_aa: no inputs");
    }
    double wsum = 0.0;
    Eigen::Index dim = 0;
    std::size_t count = 0;
    for (const auto& in : inputs) {
        if (!(in.weight > 0.0)) {
            throw FusionWeightError("weighted_phd_aa: fusion weights must be positive");
        }
        wsum += in.weight;
        const auto& gm = in.mixture.get();
        count += gm.size();
        if (!gm.empty()) {
            if (dim == 0) {
                dim = gm.dim();
            } else if (gm.dim() != dim) {
                throw FusionWeightError("weighted_phd_aa: mixtures differ in dimension");
            }
        }
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw FusionWeightError("weighted_phd_aa: fusion weights sum to " + std::to_string(wsum));
    }
    PhdAA out{GaussianMixture(dim), 0.0};
    out.mixture.reserve(count);
    for (const auto& in : inputs) {
        double mass = 0.0;
        for (const auto& c : in.mixture.get()) {
            out.mixture.push_back(GaussianComponent{in.weight * c.weight, c.mean, c.cov});
            mass += c.weight;
        }
        out.n_hat += in.weight * mass;
    }
    return out;
}

CcScaled cc_scale(double state_mass, double target_mass, const GaussianMixture& gm) {
    if (!(state_mass > 0.0) || gm.empty()) {
        return CcScaled{gm, true};
    }
    CcScaled out{gm, false};
    out.mixture.scale_weights(target_mass / state_mass);
    return out;
}

Assignment assign_nearest(const GaussianMixture& local, const PhdAA& aa, std::optional<double> gate) {
    if (local.empty()) {
        throw AssignmentError("assign_nearest: local mixture is empty");
    }
    const auto pi = component_weights(aa.mixture);
    return assign_from_kl(kl_matrix(aa.mixture, local), pi, gate);
}

double vub(const PhdAA& aa, const GaussianMixture& local, const Assignment& h) {
    if (h.target.size() != aa.mixture.size() || h.mass.size() != aa.mixture.size()) {
        throw ConstraintError("vub: assignment size does not match the fused mixture");
    }
    double total = 0.0;
    double k = 0.0;
    for (std::size_t a = 0; a < h.target.size(); ++a) {
        const double pi = aa.mixture[a].weight;
        if (!h.target[a] || *h.target[a] >= local.size()) {
            throw ConstraintError("vub: component " + std::to_string(a) + " is not assigned to a valid local component");
        }
        if (h.mass[a] < 0.0 || std::abs(h.mass[a] - pi) > kMassTolerance * std::max(1.0, pi)) {
            throw ConstraintError("vub: row mass of component " + std::to_string(a) + " differs from its weight");
        }
        total += h.mass[a];
        if (h.mass[a] > 0.0) {
            k += h.mass[a] * kl_gaussian(aa.mixture[a], local[*h.target[a]]);
        }
    }
    if (std::abs(total - aa.n_hat) > kMassTolerance * std::max(1.0, aa.n_hat)) {
        throw ConstraintError("vub: assignment mass does not equal n_hat");
    }
    return k;
}

WeightFit gc_weight_fit(const GaussianMixture& local, const PhdAA& aa, std::optional<double> gate) {
    if (local.empty()) {
        throw AssignmentError("gc_weight_fit: local mixture is empty");
    }
    const auto pi = component_weights(aa.mixture);
    const Eigen::MatrixXd kl = kl_matrix(aa.mixture, local);
    const Assignment h = assign_from_kl(kl, pi, gate);
    WeightFit fit;
    fit.weights.assign(local.size(), 0.0);
    for (std::size_t a = 0; a < h.target.size(); ++a) {
        if (h.target[a]) {
            fit.weights[*h.target[a]] += h.mass[a];
        }
    }
    fit.report.iterations = 1;
    fit.report.goodness.push_back(goodness(kl, h));
    fit.report.converged = true;
    return fit;
}

GmFit gm_phd_fit(const GaussianMixture& local, const PhdAA& aa, double gamma_g, int max_iter,
                 std::optional<double> gate) {
    if (local.empty()) {
        throw AssignmentError("gm_phd_fit: local mixture is empty");
    }
    if (!(gamma_g > 0.0) || max_iter < 1) {
        throw std::invalid_argument("gm_phd_fit: gamma_g must be positive and max_iter >= 1");
    }
    const auto pi = component_weights(aa.mixture);
    const auto fused = prepare(aa.mixture);

    GmFit fit{local, {}};
    auto current = prepare(fit.mixture);
    std::vector<std::vector<GaussianComponent>> clusters(local.size());

    for (int i = 1; i <= max_iter; ++i) {
        const Eigen::MatrixXd kl = kl_matrix(fused, current);
        const Assignment h = assign_from_kl(kl, pi, gate);
        const double k = goodness(kl, h);
        auto& report = fit.report;
        if (!report.goodness.empty() && !gate) {
            const double prev = report.goodness.back();
            if (k > prev + kMonotoneSlack * std::max(1.0, prev)) {
                throw InvariantViolation("gm_phd_fit: fit objective increased from " + std::to_string(prev) + " to " +
                                         std::to_string(k));
            }
        }
        report.goodness.push_back(k);
        report.iterations = i;

        for (auto& c : clusters) {
            c.clear();
        }
        for (std::size_t a = 0; a < h.target.size(); ++a) {
            if (h.target[a] && h.mass[a] > 0.0) {
                const auto& g = aa.mixture[a];
                clusters[*h.target[a]].push_back(GaussianComponent{h.mass[a], g.mean, g.cov});
            }
        }
        for (std::size_t b = 0; b < clusters.size(); ++b) {
            auto& target = fit.mixture[b];
            if (clusters[b].empty()) {
                target.weight = 0.0;
                continue;
            }
            target = clusters[b].size() == 1 ? clusters[b].front() : moment_match_merge(clusters[b]);
            current[b] = prepare(target);
        }

        bool converged = false;
        if (k == 0.0) {
            converged = true;
        }
        if (report.goodness.size() >= 2) {
            const double prev = report.goodness[report.goodness.size() - 2];
            const double rate = prev > 0.0 ? std::abs(k - prev) / prev : 0.0;
            report.rates.push_back(rate);
            converged = converged || rate <= gamma_g;
        }
        if (converged) {
            report.converged = true;
            break;
        }
    }
    return fit;
}

std::string_view to_string(FitMode mode) {
    switch (mode) {
    case FitMode::CcOnly:
        return "cc-only";
    case FitMode::WeightFit:
        return "weight-fit";
    case FitMode::GmFit:
        return "gm-fit";
    }
    return "?";
}

FitOutcome fit_local(const GaussianMixture& local, const PhdAA& aa, FitMode mode, const FitOptions& options) {
    if (local.empty()) {
        FitOutcome out{aa.mixture, {}, true};
        out.report.converged = true;
        return out;
    }
    switch (mode) {
    case FitMode::CcOnly: {
        auto scaled = cc_scale(total_mass(local), aa.n_hat, local);
        FitOutcome out{std::move(scaled.mixture), {}, false};
        out.report.converged = !scaled.degenerate;
        return out;
    }
    case FitMode::WeightFit: {
        auto wf = gc_weight_fit(local, aa, options.gate);
        FitOutcome out{local, std::move(wf.report), false};
        out.mixture.set_weights(wf.weights);
        return out;
    }
    case FitMode::GmFit: {
        auto gf = gm_phd_fit(local, aa, options.gamma_g, options.max_iter, options.gate);
        return FitOutcome{std::move(gf.mixture), std::move(gf.report), false};
    }
    }
    throw std::logic_error("fit_local: unknown mode");
}

} // namespace aafusion
