#pragma once

#include "aafusion/gaussian.hpp"
#include "aafusion/models.hpp"

#include <optional>
#include <span>
#include <vector>

namespace aafusion {

struct PhdFilterState {
    GaussianMixture intensity;
};

/// Reduction applied after each PHD update.
struct PhdParams {
    double prune_threshold = 1e-5;
    double merge_threshold = 4.0;
    std::size_t max_components = 200;
};

/// Survivors (mu -> F mu, Sigma -> F Sigma F' + Q, w -> p_s w) followed by the
/// birth components with weight r_B.
PhdFilterState phd_predict(const PhdFilterState& state, const MotionModel& motion, const BirthModel& birth);

/// Standard GM-PHD update. Output order: the missed-detection copies of the
/// prior components, then one block of Kalman-updated components per measurement.
PhdFilterState phd_update(const PhdFilterState& state, const MeasurementModel& meas, std::span<const Vector> measurements);

PhdFilterState phd_reduce(const PhdFilterState& state, const PhdParams& params);

/// A point estimate, optionally carrying the track label.
struct Label {
    int birth_step = 0;
    int birth_index = 0;

    auto operator<=>(const Label&) const = default;
};

struct Estimate {
    Vector state;
    std::optional<Label> label;
};

/// Means of components with weight > 0.5, each repeated round(weight) times.
std::vector<Estimate> extract_estimates(const PhdFilterState& state);

/// Component index of a flattened PHD: Bernoulli `track`, component `component`.
/// For PHD states `track` is always 0.
struct GcIndex {
    std::size_t track = 0;
    std::size_t component = 0;

    bool operator==(const GcIndex&) const = default;
};

/// Unlabeled GM-PHD of a filter state, with the index mapping needed to write
/// fitted parameters back.
struct PhdExport {
    GaussianMixture mixture;
    std::vector<GcIndex> mapping;
};

enum class ImportMode { WeightsOnly, Full };

PhdExport export_phd(const PhdFilterState& state);

/// Replaces the intensity weights (and means/covariances in Full mode).
PhdFilterState import_phd(const PhdFilterState& state, const GaussianMixture& fitted, std::span<const GcIndex> mapping,
                          ImportMode mode);

} // namespace aafusion
