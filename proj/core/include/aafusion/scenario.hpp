#pragma once

#include "aafusion/fusion.hpp"
#include "aafusion/gaussian.hpp"
#include "aafusion/local_filter.hpp"
#include "aafusion/metrics.hpp"
#include "aafusion/network.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aafusion {

/// A ground-truth target: alive for birth_step <= k < death_step, starting
/// from `initial_state` at its birth step.
struct TargetSpec {
    int birth_step = 1;
    int death_step = 101;
    Vector initial_state;
};

struct ScenarioConfig {
    int duration = 100; ///< steps, numbered 1..duration
    double dt = 1.0;
    std::array<double, 4> roi{-1000.0, 1000.0, -1000.0, 1000.0}; ///< x_min, x_max, y_min, y_max

    /// Filter type per sensor. A single entry applies to every sensor.
    std::vector<FilterType> sensor_filters{FilterType::Phd};
    std::optional<FitMode> fusion = FitMode::GmFit; ///< nullopt: no cooperation
    CommMode comm = CommMode::Flooding;
    int rounds = 0;

    double survival_prob = 0.95;
    double detect_prob = 0.9;
    double clutter_rate = 10.0;
    double measurement_std = 10.0;
    double q_scale = 25.0;
    std::vector<BirthComponent> birth;
    std::vector<TargetSpec> targets;

    FitOptions fit;
    PhdParams phd;
    BernoulliParams bernoulli;
    OspaParams ospa;

    int runs = 10;
    std::uint64_t seed = 42;

    [[nodiscard]] double roi_volume() const { return (roi[1] - roi[0]) * (roi[3] - roi[2]); }
    /// Filter type of sensor s given `sensors` sensors in total.
    [[nodiscard]] FilterType filter_for(std::size_t s, std::size_t sensors) const;
    /// Throws ConfigError on out-of-range parameters.
    void validate(std::size_t sensors) const;
};

/// Four birth components with r_B = 0.03, the default four targets, and the
/// clutter, noise and motion parameters of the reference experiment.
ScenarioConfig default_scenario();

FilterModels make_models(const ScenarioConfig& config);

struct TargetTrack {
    int birth_step = 0;
    int death_step = 0; ///< first step the target is absent
    std::vector<Vector> states; ///< states[k - birth_step]

    [[nodiscard]] bool alive(int step) const { return step >= birth_step && step < death_step; }
};

struct GroundTruth {
    std::vector<TargetTrack> tracks;

    [[nodiscard]] std::vector<Vector> states_at(int step) const;
    [[nodiscard]] std::size_t count_at(int step) const;
};

/// Noiseless constant-velocity trajectories. Targets leaving the ROI are
/// terminated at the first step outside it. When the config lists no targets,
/// one target is spawned at each birth mean at a random step with a random
/// velocity drawn from `seed`.
GroundTruth generate_truth(const ScenarioConfig& config, std::uint64_t seed);

/// Detections (probability p_d, Gaussian noise) of every live target plus
/// Poisson clutter uniform over the ROI, all drawn from `seed`.
std::vector<Vector> generate_measurements(const GroundTruth& truth, const ScenarioConfig& config, int step,
                                          std::uint64_t seed);

/// Sub-seed for (run, sensor, step). The triple is packed into 64 bits
/// (24/16/24) and mixed with the master seed through the splitmix64
/// finalizer, which is a bijection, so distinct triples never share a seed.
/// Throws std::out_of_range if a field does not fit its width.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, std::uint64_t sensor, std::uint64_t step);

/// Sensor slot reserved for ground-truth seeds.
inline constexpr std::uint64_t kTruthStream = 0xFFFF;

struct StepRecord {
    int run = 0;
    int step = 0;
    std::size_t sensor = 0;
    FilterType filter = FilterType::Phd;
    double ospa = 0.0;
    double n_hat = 0.0;
    std::size_t n_true = 0;
    std::size_t cost = 0;
};

struct RunSummary {
    int run = 0;
    double wall_seconds = 0.0;
    bool aborted = false;
    std::string abort_reason;
};

struct MonteCarloResult {
    std::vector<StepRecord> records;
    std::vector<RunSummary> runs;
    FusionCounters counters;

    [[nodiscard]] bool any_aborted() const;
    [[nodiscard]] double mean_ospa() const;
    [[nodiscard]] double mean_ospa(FilterType type) const;
    [[nodiscard]] double total_cost() const;
};

/// Runs the whole experiment. Measurements depend only on the master seed,
/// run, sensor and step, so configurations sharing a seed see identical data.
/// A run whose filter state turns non-finite or raises a library error is
/// stopped and flagged; its earlier records are kept.
MonteCarloResult run_monte_carlo(const ScenarioConfig& config, const Topology& topology);

} // namespace aafusion
