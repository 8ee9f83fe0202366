#pragma once

#include "aafusion/gaussian.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace aafusion {

/// Weighted arithmetic average of several GM-PHDs. `n_hat` is the fused
/// expected target count and always equals total_mass(mixture).
struct PhdAA {
    GaussianMixture mixture;
    double n_hat = 0.0;
};

struct FusionInput {
    double weight;
    std::reference_wrapper<const GaussianMixture> mixture;
};

/// Concatenates the inputs with each component weight scaled by its input's
/// fusion weight. Throws FusionWeightError unless the weights sum to one
/// (within 1e-9) and all mixtures share a dimension.
PhdAA weighted_phd_aa(std::span<const FusionInput> inputs);

struct CcScaled {
    GaussianMixture mixture;
    bool degenerate = false; ///< state mass was zero; mixture returned unchanged
};

/// Cardinality consensus only: rescales all weights so the mass becomes `target_mass`.
CcScaled cc_scale(double state_mass, double target_mass, const GaussianMixture& gm);

/// Hard variational assignment h: every fused component a sends its mass to
/// one local component. `mass[a]` is h_{a, target[a]}; a gated-out component
/// has no target and zero mass.
struct Assignment {
    std::vector<std::optional<std::size_t>> target;
    std::vector<double> mass;

    [[nodiscard]] double total() const;
};

/// Assigns each fused component to the local component of least KL(N_a || N_b),
/// ties to the smallest b. With `gate` set, components whose least KL exceeds
/// the gate are left unassigned and their mass is spread proportionally over
/// the assigned ones, so the total still equals n_hat. If every component
/// would be gated out the gate is ignored. Throws AssignmentError when `local`
/// is empty.
Assignment assign_nearest(const GaussianMixture& local, const PhdAA& aa, std::optional<double> gate = std::nullopt);

/// Variational bound evaluated at an assignment: sum_a h_a KL(N_a || N_{target(a)}).
/// Throws ConstraintError unless every row carries exactly pi_a on a valid
/// local index and the total equals aa.n_hat (both within 1e-9).
double vub(const PhdAA& aa, const GaussianMixture& local, const Assignment& h);

/// Per-fit convergence record. goodness[i] is the bound value K at iteration
/// i+1 (before that iteration's merge step); rates[i] is the relative change
/// |K_{i+1} - K_i| / K_i for i >= 1.
struct FitReport {
    int iterations = 0;
    std::vector<double> goodness;
    std::vector<double> rates;
    bool converged = false;
};

struct WeightFit {
    std::vector<double> weights;
    FitReport report;
};

/// GC-weight fit: new local weight w_b = sum of the fused masses assigned to b.
/// Means and covariances are not touched.
WeightFit gc_weight_fit(const GaussianMixture& local, const PhdAA& aa, std::optional<double> gate = std::nullopt);

struct GmFit {
    GaussianMixture mixture;
    FitReport report;
};

/// Relative slack allowed when asserting that the fit objective never increases.
inline constexpr double kMonotoneSlack = 1e-12;

/// Full GM-PHD fit: alternates nearest assignment and per-cluster moment
/// matching until the relative decrease of K drops to `gamma_g` (or K hits
/// zero) or `max_iter` iterations ran. Local components that receive no mass
/// keep their mean and covariance with weight zero; none are created or
/// removed. Throws InvariantViolation if K increases (ungated fits only).
GmFit gm_phd_fit(const GaussianMixture& local, const PhdAA& aa, double gamma_g = 0.1, int max_iter = 10,
                 std::optional<double> gate = std::nullopt);

enum class FitMode { CcOnly, WeightFit, GmFit };

std::string_view to_string(FitMode mode);

struct FitOptions {
    double gamma_g = 0.1;
    int max_iter = 10;
    std::optional<double> gate;
};

struct FitOutcome {
    GaussianMixture mixture;
    FitReport report;
    bool cold_start = false; ///< local was empty and adopted the fused mixture
};

/// Applies the selected fit of `local` to `aa`. An empty local mixture adopts
/// the fused mixture wholesale.
FitOutcome fit_local(const GaussianMixture& local, const PhdAA& aa, FitMode mode, const FitOptions& options);

} // namespace aafusion
