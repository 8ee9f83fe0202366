#include "aafusion/phd_filter.hpp"

#include "aafusion/errors.hpp"

#include <cmath>

namespace aafusion {

MotionModel constant_velocity_model(double dt, double q_scale, double survival_prob) {
    Matrix block(2, 2);
    block << 1.0, dt, 0.0, 1.0;
    Matrix q_block(2, 2);
    q_block << dt * dt / 2.0, dt / 2.0, dt / 2.0, dt;
    MotionModel m;
    m.transition = Matrix::Zero(4, 4);
    m.process_noise = Matrix::Zero(4, 4);
    m.transition.block(0, 0, 2, 2) = block;
    m.transition.block(2, 2, 2, 2) = block;
    m.process_noise.block(0, 0, 2, 2) = q_scale * q_block;
    m.process_noise.block(2, 2, 2, 2) = q_scale * q_block;
    m.survival_prob = survival_prob;
    return m;
}

Matrix position_observation() {
    Matrix h = Matrix::Zero(2, 4);
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    return h;
}

PhdFilterState phd_predict(const PhdFilterState& state, const MotionModel& motion, const BirthModel& birth) {
    const Matrix& f = motion.transition;
    const Eigen::Index dim = f.rows();
    GaussianMixture out(dim);
    out.reserve(state.intensity.size() + birth.components.size());
    for (const auto& c : state.intensity) {
        out.push_back(GaussianComponent{motion.survival_prob * c.weight, f * c.mean,
                                        f * c.cov * f.transpose() + motion.process_noise});
    }
    for (const auto& b : birth.components) {
        out.push_back(GaussianComponent{b.existence, b.mean, b.cov});
    }
    return PhdFilterState{std::move(out)};
}

PhdFilterState phd_update(const PhdFilterState& state, const MeasurementModel& meas,
                          std::span<const Vector> measurements) {
    const GaussianMixture& prior = state.intensity;
    const double pd = meas.detect_prob;
    if (pd == 0.0) {
        return state;
    }
    const Matrix& h = meas.observation;
    GaussianMixture out(prior.dim());
    out.reserve(prior.size() * (measurements.size() + 1));
    for (const auto& c : prior) {
        out.push_back(GaussianComponent{(1.0 - pd) * c.weight, c.mean, c.cov});
    }
    if (measurements.empty() || prior.empty()) {
        return PhdFilterState{std::move(out)};
    }

    struct Innovation {
        Vector predicted_z;
        PreparedGaussian s;
        Matrix gain;
        Matrix posterior_cov;
    };
    std::vector<Innovation> innov;
    innov.reserve(prior.size());
    for (const auto& c : prior) {
        Matrix s = h * c.cov * h.transpose() + meas.noise;
        s = 0.5 * (s + s.transpose());
        const Vector z_hat = h * c.mean;
        PreparedGaussian ps{z_hat, s, factorize(s)};
        const Matrix& lo = ps.factor.lower;
        // K = P H' S^-1 computed via two triangular solves.
        const Matrix pht = c.cov * h.transpose();
        const Matrix gain = lo.transpose()
                                .triangularView<Eigen::Upper>()
                                .solve(lo.triangularView<Eigen::Lower>().solve(pht.transpose()))
                                .transpose();
        Matrix post = c.cov - gain * s * gain.transpose();
        post = 0.5 * (post + post.transpose());
        innov.push_back(Innovation{z_hat, std::move(ps), gain, std::move(post)});
    }

    const double kappa = meas.clutter_density();
    std::vector<double> w(prior.size());
    for (const auto& z : measurements) {
        double norm = kappa;
        for (std::size_t j = 0; j < prior.size(); ++j) {
            w[j] = pd * prior[j].weight * std::exp(log_density(innov[j].s, z));
            norm += w[j];
        }
        if (!(norm > 0.0)) {
            continue;
        }
        for (std::size_t j = 0; j < prior.size(); ++j) {
            out.push_back(GaussianComponent{w[j] / norm, prior[j].mean + innov[j].gain * (z - innov[j].predicted_z),
                                            innov[j].posterior_cov});
        }
    }
    return PhdFilterState{std::move(out)};
}

PhdFilterState phd_reduce(const PhdFilterState& state, const PhdParams& params) {
    return PhdFilterState{
        reduce(state.intensity, params.prune_threshold, params.merge_threshold, params.max_components)};
}

std::vector<Estimate> extract_estimates(const PhdFilterState& state) {
    std::vector<Estimate> out;
    for (const auto& c : state.intensity) {
        if (c.weight > 0.5) {
            const auto copies = static_cast<int>(std::lround(c.weight));
            for (int i = 0; i < copies; ++i) {
                out.push_back(Estimate{c.mean, std::nullopt});
            }
        }
    }
    return out;
}

PhdExport export_phd(const PhdFilterState& state) {
    PhdExport e{state.intensity, {}};
    e.mapping.reserve(state.intensity.size());
    for (std::size_t j = 0; j < state.intensity.size(); ++j) {
        e.mapping.push_back(GcIndex{0, j});
    }
    return e;
}

PhdFilterState import_phd(const PhdFilterState& state, const GaussianMixture& fitted, std::span<const GcIndex> mapping,
                          ImportMode mode) {
    const auto& prior = state.intensity;
    if (fitted.size() != prior.size() || mapping.size() != prior.size()) {
        throw MappingError("import_phd: fitted mixture has " + std::to_string(fitted.size()) +
                           " components, state has " + std::to_string(prior.size()));
    }
    PhdFilterState out = state;
    for (std::size_t j = 0; j < mapping.size(); ++j) {
        const GcIndex& idx = mapping[j];
        if (idx.track != 0 || idx.component >= prior.size()) {
            throw MappingError("import_phd: mapping entry out of range");
        }
        auto& c = out.intensity[idx.component];
        c.weight = fitted[j].weight;
        if (mode == ImportMode::Full) {
            c.mean = fitted[j].mean;
            c.cov = fitted[j].cov;
        }
    }
    return out;
}

} // namespace aafusion
