#include "aafusion/bernoulli_filter.hpp"

#include "aafusion/assignment.hpp"
#include "aafusion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace aafusion {

namespace {

double neg_log(double x) { return x > 0.0 ? -std::log(x) : kForbiddenCost; }

std::vector<BernoulliComponent> predict_tracks(const std::vector<BernoulliComponent>& tracks, const MotionModel& motion) {
    const Matrix& f = motion.transition;
    std::vector<BernoulliComponent> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) {
        BernoulliComponent p;
        p.existence = motion.survival_prob * t.existence;
        p.label = t.label;
        p.density = GaussianMixture(t.density.dim());
        p.density.reserve(t.density.size());
        for (const auto& c : t.density) {
            p.density.push_back(GaussianComponent{c.weight, f * c.mean, f * c.cov * f.transpose() + motion.process_noise});
        }
        out.push_back(std::move(p));
    }
    return out;
}

BernoulliComponent birth_track(const BirthComponent& b) {
    BernoulliComponent t;
    t.existence = b.existence;
    t.density = GaussianMixture(b.mean.size());
    t.density.push_back(GaussianComponent{1.0, b.mean, b.cov});
    return t;
}

struct ComponentInnovation {
    Vector predicted_z;
    PreparedGaussian s;
    Matrix gain;
    Matrix posterior_cov;
};

struct TrackLikelihoods {
    std::vector<ComponentInnovation> innov;
    /// log q(z_j | component c), row c, column j; -inf when gated out.
    Eigen::MatrixXd log_q;
    /// log of the track-level likelihood sum_c w_c q_cj; -inf when gated out.
    std::vector<double> log_eta;
};

double log_sum_exp(std::span<const double> xs) {
    double hi = -std::numeric_limits<double>::infinity();
    for (const double x : xs) {
        hi = std::max(hi, x);
    }
    if (std::isinf(hi)) {
        return hi;
    }
    double s = 0.0;
    for (const double x : xs) {
        s += std::exp(x - hi);
    }
    return hi + std::log(s);
}

TrackLikelihoods likelihoods(const BernoulliComponent& track, const MeasurementModel& meas,
                             std::span<const Vector> measurements, double gate) {
    const Matrix& h = meas.observation;
    TrackLikelihoods out;
    const auto nc = static_cast<Eigen::Index>(track.density.size());
    const auto m = static_cast<Eigen::Index>(measurements.size());
    out.innov.reserve(track.density.size());
    for (const auto& c : track.density) {
        Matrix s = h * c.cov * h.transpose() + meas.noise;
        s = 0.5 * (s + s.transpose());
        const Vector z_hat = h * c.mean;
        PreparedGaussian ps{z_hat, s, factorize(s)};
        const Matrix& lo = ps.factor.lower;
        const Matrix pht = c.cov * h.transpose();
        const Matrix gain = lo.transpose()
                                .triangularView<Eigen::Upper>()
                                .solve(lo.triangularView<Eigen::Lower>().solve(pht.transpose()))
                                .transpose();
        Matrix post = c.cov - gain * s * gain.transpose();
        post = 0.5 * (post + post.transpose());
        out.innov.push_back(ComponentInnovation{z_hat, std::move(ps), gain, std::move(post)});
    }
    const double neg_inf = -std::numeric_limits<double>::infinity();
    out.log_q = Eigen::MatrixXd::Constant(nc, m, neg_inf);
    out.log_eta.assign(measurements.size(), neg_inf);
    std::vector<double> terms(track.density.size());
    for (Eigen::Index j = 0; j < m; ++j) {
        const Vector& z = measurements[static_cast<std::size_t>(j)];
        bool gated = false;
        for (Eigen::Index c = 0; c < nc; ++c) {
            const auto& in = out.innov[static_cast<std::size_t>(c)];
            const double d2 = in.s.factor.lower.triangularView<Eigen::Lower>().solve(z - in.predicted_z).squaredNorm();
            gated = gated || d2 <= gate;
            out.log_q(c, j) = log_density(in.s, z);
        }
        if (!gated) {
            out.log_q.col(j).setConstant(neg_inf);
            continue;
        }
        for (Eigen::Index c = 0; c < nc; ++c) {
            const double w = track.density[static_cast<std::size_t>(c)].weight;
            terms[static_cast<std::size_t>(c)] = w > 0.0 ? std::log(w) + out.log_q(c, j) : neg_inf;
        }
        out.log_eta[static_cast<std::size_t>(j)] = log_sum_exp(terms);
    }
    return out;
}

/// Posterior Bernoulli from association marginals: beta_miss for the missed
/// detection and beta[j] for measurement j (absence is the remainder).
BernoulliComponent posterior_track(const BernoulliComponent& track, const TrackLikelihoods& lik,
                                   std::span<const Vector> measurements, double beta_miss, std::span<const double> beta) {
    BernoulliComponent out;
    out.label = track.label;
    out.density = GaussianMixture(track.density.dim());
    const double r = beta_miss + std::accumulate(beta.begin(), beta.end(), 0.0);
    out.existence = std::min(r, 1.0);
    if (!(r > 0.0)) {
        out.existence = 0.0;
        out.density = track.density;
        return out;
    }
    if (beta_miss > 0.0) {
        for (const auto& c : track.density) {
            out.density.push_back(GaussianComponent{c.weight * beta_miss / r, c.mean, c.cov});
        }
    }
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (!(beta[j] > 0.0)) {
            continue;
        }
        const Vector& z = measurements[j];
        for (std::size_t c = 0; c < track.density.size(); ++c) {
            const double w = track.density[c].weight;
            if (!(w > 0.0)) {
                continue;
            }
            const double post_w = std::exp(std::log(w) + lik.log_q(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) -
                                           lik.log_eta[j]);
            const auto& in = lik.innov[c];
            out.density.push_back(GaussianComponent{post_w * beta[j] / r, track.density[c].mean + in.gain * (z - in.predicted_z),
                                                    in.posterior_cov});
        }
    }
    return out;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

std::vector<BernoulliComponent> update_tracks(const std::vector<BernoulliComponent>& tracks, const MeasurementModel& meas,
                                              std::span<const Vector> measurements, const BernoulliParams& params) {
    const std::size_t n = tracks.size();
    const std::size_t m = measurements.size();
    if (n == 0) {
        return {};
    }
    const double pd = meas.detect_prob;
    const double log_kappa = std::log(std::max(meas.clutter_density(), std::numeric_limits<double>::min()));

    std::vector<TrackLikelihoods> lik;
    lik.reserve(n);
    for (const auto& t : tracks) {
        lik.push_back(likelihoods(t, meas, measurements, params.gate_threshold));
    }

    // Tracks sharing a gated measurement form one cluster; clusters are
    // conditionally independent, so each gets its own ranked assignment.
    std::vector<std::size_t> parent(n + m);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<bool> track_gated(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (pd > 0.0 && std::isfinite(lik[i].log_eta[j])) {
                track_gated[i] = true;
                parent[find_root(parent, i)] = find_root(parent, n + j);
            }
        }
    }

    std::vector<double> beta_miss(n, 0.0);
    std::vector<std::vector<double>> beta(n, std::vector<double>(m, 0.0));

    // Ungated tracks: closed-form absent / missed marginal.
    for (std::size_t i = 0; i < n; ++i) {
        if (track_gated[i]) {
            continue;
        }
        const double r = tracks[i].existence;
        const double missed = r * (1.0 - pd);
        const double denom = (1.0 - r) + missed;
        if (!(denom > 0.0)) {
            throw AssociationError("no feasible association hypothesis for an undetectable certain track");
        }
        beta_miss[i] = missed / denom;
    }

    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < n; ++i) {
        if (track_gated[i]) {
            const std::size_t root = find_root(parent, i);
            if (std::find(roots.begin(), roots.end(), root) == roots.end()) {
                roots.push_back(root);
            }
        }
    }

    for (const std::size_t root : roots) {
        std::vector<std::size_t> rows;
        std::vector<std::size_t> cols;
        for (std::size_t i = 0; i < n; ++i) {
            if (track_gated[i] && find_root(parent, i) == root) {
                rows.push_back(i);
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (find_root(parent, n + j) == root) {
                cols.push_back(j);
            }
        }
        const auto nr = static_cast<Eigen::Index>(rows.size());
        const auto nm = static_cast<Eigen::Index>(cols.size());
        Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(nr, nm + 2 * nr, kForbiddenCost);
        for (Eigen::Index a = 0; a < nr; ++a) {
            const std::size_t i = rows[static_cast<std::size_t>(a)];
            const double r = tracks[i].existence;
            for (Eigen::Index b = 0; b < nm; ++b) {
                const double le = lik[i].log_eta[cols[static_cast<std::size_t>(b)]];
                if (std::isfinite(le) && r > 0.0) {
                    cost(a, b) = -(std::log(r) + std::log(pd) + le - log_kappa);
                }
            }
            cost(a, nm + a) = neg_log(1.0 - r);
            cost(a, nm + nr + a) = neg_log(r * (1.0 - pd));
        }
        const auto hyps = murty_k_best(cost, params.hypotheses);
        if (hyps.empty()) {
            throw AssociationError("ranked assignment found no feasible hypothesis");
        }
        const double best = hyps.front().cost;
        std::vector<double> w(hyps.size());
        for (std::size_t h = 0; h < hyps.size(); ++h) {
            w[h] = std::exp(-(hyps[h].cost - best));
        }
        const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
        for (std::size_t h = 0; h < hyps.size(); ++h) {
            const double wh = w[h] / wsum;
            for (Eigen::Index a = 0; a < nr; ++a) {
                const int col = hyps[h].row_to_col[static_cast<std::size_t>(a)];
                const std::size_t i = rows[static_cast<std::size_t>(a)];
                if (col < nm) {
                    beta[i][cols[static_cast<std::size_t>(col)]] += wh;
                } else if (col >= nm + nr) {
                    beta_miss[i] += wh;
                }
            }
        }
    }

    std::vector<BernoulliComponent> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(posterior_track(tracks[i], lik[i], measurements, beta_miss[i], beta[i]));
    }
    return reduce_tracks(std::move(out), params);
}

std::vector<Estimate> extract_tracks(const std::vector<BernoulliComponent>& tracks) {
    std::vector<Estimate> out;
    for (const auto& t : tracks) {
        if (t.existence > 0.5 && !t.density.empty()) {
            const auto best = std::max_element(t.density.begin(), t.density.end(),
                                               [](const auto& a, const auto& b) { return a.weight < b.weight; });
            out.push_back(Estimate{best->mean, t.label});
        }
    }
    return out;
}

PhdExport export_tracks(const std::vector<BernoulliComponent>& tracks) {
    Eigen::Index dim = 0;
    for (const auto& t : tracks) {
        if (t.density.dim() != 0) {
            dim = t.density.dim();
            break;
        }
    }
    PhdExport e{GaussianMixture(dim), {}};
    for (std::size_t l = 0; l < tracks.size(); ++l) {
        const auto& t = tracks[l];
        for (std::size_t c = 0; c < t.density.size(); ++c) {
            const auto& g = t.density[c];
            e.mixture.push_back(GaussianComponent{t.existence * g.weight, g.mean, g.cov});
            e.mapping.push_back(GcIndex{l, c});
        }
    }
    return e;
}

std::vector<BernoulliComponent> import_tracks(const std::vector<BernoulliComponent>& tracks, const GaussianMixture& fitted,
                                              std::span<const GcIndex> mapping, ImportMode mode) {
    std::size_t expected = 0;
    for (const auto& t : tracks) {
        expected += t.density.size();
    }
    if (fitted.size() != expected || mapping.size() != expected) {
        throw MappingError("import_phd: fitted mixture has " + std::to_string(fitted.size()) + " components, state has " +
                           std::to_string(expected));
    }
    std::vector<BernoulliComponent> out = tracks;
    std::vector<double> mass(tracks.size(), 0.0);
    std::vector<std::size_t> seen(tracks.size(), 0);
    for (std::size_t j = 0; j < mapping.size(); ++j) {
        const GcIndex& idx = mapping[j];
        if (idx.track >= tracks.size() || idx.component >= tracks[idx.track].density.size()) {
            throw MappingError("import_phd: mapping entry out of range");
        }
        ++seen[idx.track];
        mass[idx.track] += fitted[j].weight;
        auto& g = out[idx.track].density[idx.component];
        g.weight = fitted[j].weight;
        if (mode == ImportMode::Full) {
            g.mean = fitted[j].mean;
            g.cov = fitted[j].cov;
        }
    }
    for (std::size_t l = 0; l < out.size(); ++l) {
        if (seen[l] != tracks[l].density.size()) {
            throw MappingError("import_phd: mapping does not cover every track component exactly once");
        }
        if (mass[l] > 0.0) {
            out[l].existence = std::min(mass[l], kMaxImportedExistence);
            out[l].density.scale_weights(1.0 / mass[l]);
        } else {
            // No fitted mass: keep the prior density shape, existence drops to 0.
            out[l].existence = 0.0;
            for (std::size_t c = 0; c < out[l].density.size(); ++c) {
                out[l].density[c].weight = tracks[l].density[c].weight;
            }
        }
    }
    return out;
}

std::vector<BernoulliComponent> cold_start_tracks(const GaussianMixture& fitted) {
    std::vector<BernoulliComponent> out;
    for (const auto& g : fitted) {
        if (!(g.weight > 0.0)) {
            continue;
        }
        BernoulliComponent t;
        t.existence = std::min(g.weight, kMaxImportedExistence);
        t.density = GaussianMixture(fitted.dim());
        t.density.push_back(GaussianComponent{1.0, g.mean, g.cov});
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace

std::vector<BernoulliComponent> merge_tracks(std::vector<BernoulliComponent> tracks, const BernoulliParams& params) {
    if (!(params.track_merge_threshold > 0.0) || tracks.size() < 2) {
        return tracks;
    }
    const std::size_t n = tracks.size();
    std::vector<GaussianComponent> collapsed(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!tracks[i].density.empty()) {
            collapsed[i] = moment_match_merge(tracks[i].density.components());
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tracks[a].existence > tracks[b].existence; });

    std::vector<bool> absorbed(n, false);
    for (const auto leader : order) {
        if (absorbed[leader] || tracks[leader].density.empty()) {
            continue;
        }
        const auto factor = factorize(collapsed[leader].cov);
        std::vector<std::size_t> group;
        for (const auto j : order) {
            if (j == leader || absorbed[j] || tracks[j].density.empty()) {
                continue;
            }
            const Vector d = collapsed[j].mean - collapsed[leader].mean;
            const double m2 = factor.lower.triangularView<Eigen::Lower>().solve(d).squaredNorm();
            if (m2 < params.track_merge_threshold) {
                group.push_back(j);
            }
        }
        if (group.empty()) {
            continue;
        }
        auto& lead = tracks[leader];
        double existence = lead.existence;
        GaussianMixture density(lead.density.dim());
        for (const auto& c : lead.density) {
            density.push_back(GaussianComponent{lead.existence * c.weight, c.mean, c.cov});
        }
        for (const auto j : group) {
            absorbed[j] = true;
            existence += tracks[j].existence;
            for (const auto& c : tracks[j].density) {
                density.push_back(GaussianComponent{tracks[j].existence * c.weight, c.mean, c.cov});
            }
        }
        const double mass = total_mass(density);
        if (mass > 0.0) {
            density.scale_weights(1.0 / mass);
        }
        lead.existence = std::min(existence, kMaxImportedExistence);
        lead.density = std::move(density);
    }
    std::vector<BernoulliComponent> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!absorbed[i]) {
            out.push_back(std::move(tracks[i]));
        }
    }
    return out;
}

std::vector<BernoulliComponent> reduce_tracks(std::vector<BernoulliComponent> tracks, const BernoulliParams& params) {
    std::vector<BernoulliComponent> kept;
    kept.reserve(tracks.size());
    for (auto& t : tracks) {
        if (!(t.existence >= params.existence_prune) || t.density.empty()) {
            continue;
        }
        GaussianMixture d =
            reduce(t.density, params.component_prune, params.merge_threshold, params.max_track_components);
        if (d.empty()) {
            // Every component pruned: fall back to the single merged density.
            d = GaussianMixture(t.density.dim());
            d.push_back(moment_match_merge(t.density.components()));
        }
        const double mass = total_mass(d);
        d.scale_weights(1.0 / mass);
        t.density = std::move(d);
        kept.push_back(std::move(t));
    }
    if (kept.size() > params.max_tracks) {
        std::vector<std::size_t> order(kept.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return kept[a].existence > kept[b].existence; });
        order.resize(params.max_tracks);
        std::sort(order.begin(), order.end());
        std::vector<BernoulliComponent> capped;
        capped.reserve(order.size());
        for (const std::size_t i : order) {
            capped.push_back(std::move(kept[i]));
        }
        kept = std::move(capped);
    }
    return kept;
}

MbFilterState mb_predict(const MbFilterState& state, const MotionModel& motion, const BirthModel& birth) {
    MbFilterState out{predict_tracks(state.bernoullis, motion)};
    for (const auto& b : birth.components) {
        out.bernoullis.push_back(birth_track(b));
    }
    return out;
}

LmbFilterState lmb_predict(const LmbFilterState& state, const MotionModel& motion, const BirthModel& birth, int step) {
    LmbFilterState out{predict_tracks(state.bernoullis, motion)};
    for (std::size_t i = 0; i < birth.components.size(); ++i) {
        auto t = birth_track(birth.components[i]);
        t.label = Label{step, static_cast<int>(i)};
        out.bernoullis.push_back(std::move(t));
    }
    return out;
}

MbFilterState mb_update(const MbFilterState& state, const MeasurementModel& meas, std::span<const Vector> measurements,
                        const BernoulliParams& params) {
    return MbFilterState{update_tracks(state.bernoullis, meas, measurements, params)};
}

LmbFilterState lmb_update(const LmbFilterState& state, const MeasurementModel& meas, std::span<const Vector> measurements,
                          const BernoulliParams& params) {
    return LmbFilterState{update_tracks(state.bernoullis, meas, measurements, params)};
}

std::vector<Estimate> extract_estimates(const MbFilterState& state) {
    auto out = extract_tracks(state.bernoullis);
    for (auto& e : out) {
        e.label.reset();
    }
    return out;
}

std::vector<Estimate> extract_estimates(const LmbFilterState& state) { return extract_tracks(state.bernoullis); }

PhdExport export_phd(const MbFilterState& state) { return export_tracks(state.bernoullis); }
PhdExport export_phd(const LmbFilterState& state) { return export_tracks(state.bernoullis); }

MbFilterState import_phd(const MbFilterState& state, const GaussianMixture& fitted, std::span<const GcIndex> mapping,
                         ImportMode mode) {
    if (state.bernoullis.empty() && mapping.empty() && !fitted.empty()) {
        return MbFilterState{cold_start_tracks(fitted)};
    }
    return MbFilterState{import_tracks(state.bernoullis, fitted, mapping, mode)};
}

LmbFilterState import_phd(const LmbFilterState& state, const GaussianMixture& fitted, std::span<const GcIndex> mapping,
                          ImportMode mode, int step) {
    if (state.bernoullis.empty() && mapping.empty() && !fitted.empty()) {
        // Cold-start labels use negative birth indices so they never collide
        // with birth-model labels of the same step.
        LmbFilterState out{cold_start_tracks(fitted)};
        for (std::size_t i = 0; i < out.bernoullis.size(); ++i) {
            out.bernoullis[i].label = Label{step, -static_cast<int>(i) - 1};
        }
        return out;
    }
    return LmbFilterState{import_tracks(state.bernoullis, fitted, mapping, mode)};
}

} // namespace aafusion
