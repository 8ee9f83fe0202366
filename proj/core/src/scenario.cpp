#include "aafusion/scenario.hpp"

#include "aafusion/errors.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace aafusion {

namespace {

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool inside(const ScenarioConfig& config, const Vector& x) {
    return x(0) >= config.roi[0] && x(0) <= config.roi[1] && x(2) >= config.roi[2] && x(2) <= config.roi[3];
}

Vector cv_state(double x, double vx, double y, double vy) {
    Vector v(4);
    v << x, vx, y, vy;
    return v;
}

Matrix diag4(double variance) {
    Matrix m = Matrix::Zero(4, 4);
    m.diagonal().setConstant(variance);
    return m;
}

Vector project(const Matrix& h, const Vector& x) { return h * x; }

} // namespace

FilterType ScenarioConfig::filter_for(std::size_t s, std::size_t sensors) const {
    if (sensor_filters.size() == 1) {
        return sensor_filters.front();
    }
    if (sensor_filters.size() != sensors) {
        throw ConfigError("scenario lists " + std::to_string(sensor_filters.size()) + " sensor filters for " +
                          std::to_string(sensors) + " sensors");
    }
    return sensor_filters[s];
}

void ScenarioConfig::validate(std::size_t sensors) const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError(std::string(name) + " must lie in [0, 1]");
        }
    };
    if (duration < 1) {
        throw ConfigError("duration must be at least 1");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("dt must be positive");
    }
    if (rounds < 0) {
        throw ConfigError("rounds must be non-negative");
    }
    if (runs < 0) {
        throw ConfigError("runs must be non-negative");
    }
    if (!(roi[1] > roi[0] && roi[3] > roi[2])) {
        throw ConfigError("roi bounds must be increasing");
    }
    prob(survival_prob, "survival_prob");
    prob(detect_prob, "detect_prob");
    if (!(clutter_rate >= 0.0) || !(measurement_std > 0.0) || !(q_scale >= 0.0)) {
        throw ConfigError("clutter_rate, measurement_std and q_scale must be non-negative (std positive)");
    }
    if (birth.empty()) {
        throw ConfigError("birth model has no components");
    }
    for (const auto& b : birth) {
        if (!(b.existence > 0.0 && b.existence <= 1.0)) {
            throw ConfigError("birth existence must lie in (0, 1]");
        }
        if (b.mean.size() != 4 || b.cov.rows() != 4 || b.cov.cols() != 4) {
            throw ConfigError("birth components must be 4-dimensional");
        }
    }
    for (const auto& t : targets) {
        if (t.initial_state.size() != 4 || t.death_step <= t.birth_step) {
            throw ConfigError("targets need a 4-dimensional state and death_step > birth_step");
        }
    }
    if (!(fit.gamma_g > 0.0) || fit.max_iter < 1) {
        throw ConfigError("gamma_g must be positive and max_iter at least 1");
    }
    if (!(ospa.cutoff > 0.0) || !(ospa.order >= 1.0)) {
        throw ConfigError("ospa_cutoff must be positive and ospa_order at least 1");
    }
    if (sensors == 0) {
        throw ConfigError("no sensors");
    }
    (void)filter_for(0, sensors);
}

ScenarioConfig default_scenario() {
    ScenarioConfig c;
    const Matrix birth_cov = diag4(100.0);
    for (const auto& [x, y] : std::array<std::pair<double, double>, 4>{{{0, 0}, {400, -600}, {-800, -200}, {-200, 800}}}) {
        c.birth.push_back(BirthComponent{0.03, cv_state(x, 0, y, 0), birth_cov});
    }
    c.targets = {
        TargetSpec{1, 70, cv_state(0, 6, 0, -4)},
        TargetSpec{10, 100, cv_state(400, -5, -600, 6)},
        TargetSpec{20, 100, cv_state(-800, 8, -200, 3)},
        TargetSpec{30, 90, cv_state(-200, 4, 800, -7)},
    };
    return c;
}

FilterModels make_models(const ScenarioConfig& config) {
    FilterModels m;
    m.motion = constant_velocity_model(config.dt, config.q_scale, config.survival_prob);
    m.measurement.observation = position_observation();
    m.measurement.noise = Matrix::Identity(2, 2) * (config.measurement_std * config.measurement_std);
    m.measurement.detect_prob = config.detect_prob;
    m.measurement.clutter_rate = config.clutter_rate;
    m.measurement.roi_volume = config.roi_volume();
    m.birth.components = config.birth;
    m.phd = config.phd;
    m.bernoulli = config.bernoulli;
    return m;
}

std::vector<Vector> GroundTruth::states_at(int step) const {
    std::vector<Vector> out;
    for (const auto& t : tracks) {
        if (t.alive(step)) {
            out.push_back(t.states[static_cast<std::size_t>(step - t.birth_step)]);
        }
    }
    return out;
}

std::size_t GroundTruth::count_at(int step) const {
    std::size_t n = 0;
    for (const auto& t : tracks) {
        n += t.alive(step) ? 1 : 0;
    }
    return n;
}

GroundTruth generate_truth(const ScenarioConfig& config, std::uint64_t seed) {
    std::vector<TargetSpec> targets = config.targets;
    if (targets.empty()) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> birth_step(1, std::max(1, config.duration / 3));
        std::uniform_real_distribution<double> speed(-8.0, 8.0);
        for (const auto& b : config.birth) {
            Vector x = b.mean;
            const int k0 = birth_step(rng);
            x(1) = speed(rng);
            x(3) = speed(rng);
            targets.push_back(TargetSpec{k0, config.duration + 1, x});
        }
    }
    const Matrix f = constant_velocity_model(config.dt, 0.0, 1.0).transition;
    GroundTruth truth;
    for (const auto& target : targets) {
        TargetTrack track{target.birth_step, target.birth_step, {}};
        Vector x = target.initial_state;
        const int last = std::min(target.death_step, config.duration + 1);
        for (int k = target.birth_step; k < last; ++k) {
            if (!inside(config, x)) {
                break;
            }
            track.states.push_back(x);
            track.death_step = k + 1;
            x = f * x;
        }
        truth.tracks.push_back(std::move(track));
    }
    return truth;
}

std::vector<Vector> generate_measurements(const GroundTruth& truth, const ScenarioConfig& config, int step,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, config.measurement_std);
    const Matrix h = position_observation();
    std::vector<Vector> z;
    for (const auto& x : truth.states_at(step)) {
        if (unit(rng) < config.detect_prob) {
            Vector y = project(h, x);
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                y(i) += noise(rng);
            }
            z.push_back(y);
        }
    }
    if (config.clutter_rate > 0.0) {
        std::poisson_distribution<int> count(config.clutter_rate);
        std::uniform_real_distribution<double> px(config.roi[0], config.roi[1]);
        std::uniform_real_distribution<double> py(config.roi[2], config.roi[3]);
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            Vector y(2);
            y(0) = px(rng);
            y(1) = py(rng);
            z.push_back(y);
        }
    }
    return z;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, std::uint64_t sensor, std::uint64_t step) {
    if (run >= (1ULL << 24) || sensor >= (1ULL << 16) || step >= (1ULL << 24)) {
        throw std::out_of_range("derive_seed: run, sensor or step exceeds its field width");
    }
    const std::uint64_t key = (run << 40) | (sensor << 24) | step;
    return splitmix64_mix(splitmix64_mix(master) ^ splitmix64_mix(key));
}

bool MonteCarloResult::any_aborted() const {
    for (const auto& r : runs) {
        if (r.aborted) {
            return true;
        }
    }
    return false;
}

double MonteCarloResult::mean_ospa() const {
    double s = 0.0;
    for (const auto& r : records) {
        s += r.ospa;
    }
    return records.empty() ? 0.0 : s / static_cast<double>(records.size());
}

double MonteCarloResult::mean_ospa(FilterType type) const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (r.filter == type) {
            s += r.ospa;
            ++n;
        }
    }
    return n == 0 ? 0.0 : s / static_cast<double>(n);
}

double MonteCarloResult::total_cost() const {
    double s = 0.0;
    for (const auto& r : records) {
        s += static_cast<double>(r.cost);
    }
    return s;
}

MonteCarloResult run_monte_carlo(const ScenarioConfig& config, const Topology& topology) {
    const std::size_t sensors = topology.size();
    config.validate(sensors);
    const FilterModels models = make_models(config);
    const Matrix h = models.measurement.observation;
    const bool cooperate = config.fusion.has_value() && config.rounds > 0;
    const ImportMode import_mode =
        config.fusion == FitMode::GmFit ? ImportMode::Full : ImportMode::WeightsOnly;

    MonteCarloResult result;
    result.records.reserve(static_cast<std::size_t>(config.runs) * static_cast<std::size_t>(config.duration) * sensors);

    for (int run = 0; run < config.runs; ++run) {
        const auto started = std::chrono::steady_clock::now();
        RunSummary summary{run, 0.0, false, {}};
        const auto urun = static_cast<std::uint64_t>(run);
        const GroundTruth truth = generate_truth(config, derive_seed(config.seed, urun, kTruthStream, 0));

        std::vector<LocalFilter> filters;
        filters.reserve(sensors);
        for (std::size_t s = 0; s < sensors; ++s) {
            filters.emplace_back(config.filter_for(s, sensors), 4);
        }

        try {
            for (int k = 1; k <= config.duration; ++k) {
                for (std::size_t s = 0; s < sensors; ++s) {
                    const auto z = generate_measurements(truth, config, k,
                                                         derive_seed(config.seed, urun, s, static_cast<std::uint64_t>(k)));
                    filters[s].predict(models, k);
                    filters[s].update(models, z);
                }

                std::vector<std::size_t> costs(sensors, 0);
                if (cooperate) {
                    std::vector<PhdExport> exports;
                    std::vector<GaussianMixture> locals;
                    exports.reserve(sensors);
                    locals.reserve(sensors);
                    for (auto& f : filters) {
                        exports.push_back(f.export_phd());
                        locals.push_back(exports.back().mixture);
                    }
                    const auto state = disseminate(std::move(locals), k, topology, config.comm, *config.fusion,
                                                   config.rounds, config.fit, result.counters);
                    for (std::size_t s = 0; s < sensors; ++s) {
                        filters[s].import_phd(state.nodes[s].mixture, exports[s].mapping, import_mode, models);
                    }
                    costs = state.node_costs();
                }

                std::vector<Vector> truth_pos;
                for (const auto& x : truth.states_at(k)) {
                    truth_pos.push_back(project(h, x));
                }
                for (std::size_t s = 0; s < sensors; ++s) {
                    if (!filters[s].finite()) {
                        throw Error("sensor " + std::to_string(s) + " diverged at step " + std::to_string(k));
                    }
                    std::vector<Vector> est;
                    for (const auto& e : filters[s].extract()) {
                        est.push_back(project(h, e.state));
                    }
                    result.records.push_back(StepRecord{run, k, s, filters[s].type(),
                                                        ospa(est, truth_pos, config.ospa), filters[s].cardinality(),
                                                        truth_pos.size(), costs[s]});
                }
            }
        } catch (const Error& e) {
            summary.aborted = true;
            summary.abort_reason = e.what();
        }
        summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.runs.push_back(std::move(summary));
    }
    return result;
}

} // namespace aafusion
