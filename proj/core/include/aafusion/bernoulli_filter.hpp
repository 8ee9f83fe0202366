#pragma once

#include "aafusion/gaussian.hpp"
#include "aafusion/models.hpp"
#include "aafusion/phd_filter.hpp"

#include <optional>
#include <span>
#include <vector>

namespace aafusion {

/// One Bernoulli track: existence probability and a unit-mass GM density.
struct BernoulliComponent {
    double existence = 0.0;
    GaussianMixture density;
    std::optional<Label> label;
};

struct MbFilterState {
    std::vector<BernoulliComponent> bernoullis;
};

/// Labels are mandatory and pairwise distinct.
struct LmbFilterState {
    std::vector<BernoulliComponent> bernoullis;
};

struct BernoulliParams {
    double gate_threshold = 25.0;      ///< squared Mahalanobis gate per (track component, measurement)
    std::size_t hypotheses = 20;       ///< ranked assignments kept per update
    std::size_t max_tracks = 50;
    std::size_t max_track_components = 20;
    double existence_prune = 1e-3;
    double component_prune = 1e-5;
    double merge_threshold = 4.0;
    /// Tracks whose moment-matched densities lie within this squared
    /// Mahalanobis distance are merged after a fused import (0 disables).
    double track_merge_threshold = 4.0;
};

/// r -> p_s r, densities propagated through the motion model, then one birth
/// Bernoulli per birth component.
MbFilterState mb_predict(const MbFilterState& state, const MotionModel& motion, const BirthModel& birth);

/// Same as mb_predict; birth tracks are labelled (step, birth index).
LmbFilterState lmb_predict(const LmbFilterState& state, const MotionModel& motion, const BirthModel& birth, int step);

/// Gated ranked-assignment update. Up to `params.hypotheses` joint association
/// hypotheses (track absent / missed / measurement j) are enumerated with
/// Murty's algorithm, and each track is summarised by a single Bernoulli from
/// its marginal association probabilities. Tracks are then reduced per
/// `params`. Throws AssociationError if no feasible hypothesis exists.
MbFilterState mb_update(const MbFilterState& state, const MeasurementModel& meas, std::span<const Vector> measurements,
                        const BernoulliParams& params);

LmbFilterState lmb_update(const LmbFilterState& state, const MeasurementModel& meas, std::span<const Vector> measurements,
                          const BernoulliParams& params);

/// Drops low-existence tracks, reduces each density and caps the track count.
std::vector<BernoulliComponent> reduce_tracks(std::vector<BernoulliComponent> tracks, const BernoulliParams& params);

/// Greedy track merge, heaviest existence first: every track whose collapsed
/// mean is within `params.track_merge_threshold` (squared Mahalanobis, leader's
/// collapsed covariance) of the leader is absorbed into it. The merged track
/// keeps the leader's label and position in the list, its existence is the
/// sum clamped to kMaxImportedExistence, and its density is the
/// existence-weighted mixture of the merged densities.
std::vector<BernoulliComponent> merge_tracks(std::vector<BernoulliComponent> tracks, const BernoulliParams& params);

/// Mean of the heaviest component of every track with existence > 0.5.
std::vector<Estimate> extract_estimates(const MbFilterState& state);
std::vector<Estimate> extract_estimates(const LmbFilterState& state);

/// Flattened GM-PHD with weights r * w and the (track, component) mapping.
PhdExport export_phd(const MbFilterState& state);
PhdExport export_phd(const LmbFilterState& state);

/// Inverse of export_phd: each track gets r = min(sum of its fitted weights, 1 - 1e-6)
/// and its density weights renormalized; Full mode also replaces means and
/// covariances. Labels are untouched. An empty state adopts `fitted` as one
/// track per component (cold start).
MbFilterState import_phd(const MbFilterState& state, const GaussianMixture& fitted, std::span<const GcIndex> mapping,
                         ImportMode mode);
LmbFilterState import_phd(const LmbFilterState& state, const GaussianMixture& fitted, std::span<const GcIndex> mapping,
                          ImportMode mode, int step);

/// Upper clamp on imported existence probabilities.
inline constexpr double kMaxImportedExistence = 1.0 - 1e-6;

} // namespace aafusion
