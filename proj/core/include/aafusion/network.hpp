#pragma once

#include "aafusion/fusion.hpp"
#include "aafusion/gaussian.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

namespace aafusion {

/// Undirected, connected sensor graph.
class Topology {
public:
    /// Throws ConfigError on self-loops, out-of-range endpoints, zero nodes or
    /// a disconnected graph. Duplicate edges are ignored.
    Topology(std::size_t node_count, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

    /// Adjacency-matrix form. Throws ConfigError unless it is square,
    /// symmetric, zero on the diagonal and connected.
    static Topology from_adjacency(const std::vector<std::vector<bool>>& adjacency);

    static Topology fully_connected(std::size_t n);
    static Topology path(std::size_t n);

    [[nodiscard]] std::size_t size() const { return neighborhoods_.size(); }
    /// Closed neighborhood: the neighbors of s and s itself, ascending.
    [[nodiscard]] const std::vector<std::size_t>& neighborhood(std::size_t s) const { return neighborhoods_[s]; }
    [[nodiscard]] bool adjacent(std::size_t r, std::size_t s) const;
    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> edges() const;

    /// Nodes within `hops` hops of s (including s), ascending.
    [[nodiscard]] std::vector<std::size_t> hop_neighborhood(std::size_t s, int hops) const;
    [[nodiscard]] int diameter() const;

private:
    explicit Topology(std::vector<std::vector<std::size_t>> neighborhoods);
    [[nodiscard]] std::vector<int> hop_distances(std::size_t s) const;

    std::vector<std::vector<std::size_t>> neighborhoods_;
};

/// Metropolis fusion weights at node s over its closed neighborhood, in
/// neighborhood order: w(r->s) = 1 / max(|S_s|, |S_r|) for r != s and the
/// self weight takes the remainder.
std::vector<std::pair<std::size_t, double>> metropolis_weights(const Topology& topology, std::size_t s);

/// Real values needed to send one Gaussian component: weight, mean and the
/// upper triangle of the covariance.
std::size_t comm_cost_per_gc(std::size_t n_x);

/// Identifies a Gaussian component by the sensor and time step that produced
/// it and its index in that sensor's export.
struct ProvenanceId {
    std::size_t origin = 0;
    int step = 0;
    std::size_t index = 0;

    auto operator<=>(const ProvenanceId&) const = default;
};

/// A GM snapshot whose components carry provenance ids.
struct Payload {
    GaussianMixture mixture;
    std::vector<ProvenanceId> ids;
};

/// Tallies over every fit performed during dissemination.
struct FusionCounters {
    std::size_t fits = 0;
    std::size_t converged = 0;
    std::size_t cold_starts = 0;
    std::size_t iterations = 0;
    std::size_t mass_violations = 0; ///< fits whose output mass missed n_hat by more than 1e-9
    double max_mass_error = 0.0;

    void record(const FitOutcome& outcome, double n_hat);
    void merge(const FusionCounters& other);
};

/// Per-step state of the simulated peer-to-peer exchange.
struct DisseminationState {
    std::vector<Payload> nodes;     ///< current local mixtures
    int step = 0;
    int round = 0;
    std::vector<std::vector<std::size_t>> cost; ///< cost[round][node], real values broadcast

    /// Consensus weight-fit: component ids whose parameters a node already sent.
    std::vector<std::set<ProvenanceId>> sent;

    /// Flooding: per node, the original payload of every origin heard so far,
    /// and the origins received last round that still have to be forwarded.
    std::vector<std::map<std::size_t, Payload>> received;
    std::vector<std::vector<std::size_t>> fresh;

    [[nodiscard]] std::vector<std::size_t> node_costs() const;
    [[nodiscard]] std::size_t total_cost() const;
};

/// Tags each local mixture with provenance ids (sensor, step, index).
DisseminationState start_dissemination(std::vector<GaussianMixture> locals, int step);

/// One synchronous consensus iteration: every node with at least one neighbor
/// averages its neighbors' current mixtures with Metropolis weights and fits
/// its own mixture to the average. Cost per broadcasting node: one value in
/// cc-only mode; full parameters of every component in gm-fit mode; in
/// weight-fit mode full parameters for components it never sent before and a
/// single weight otherwise.
DisseminationState consensus_round(DisseminationState state, const Topology& topology, FitMode mode,
                                   const FitOptions& options, FusionCounters& counters);

/// One synchronous flooding iteration: each node forwards, once, every origin
/// payload it has not forwarded yet. Cost is full parameters per forwarded
/// component, or one value per forwarded origin in cc-only mode.
DisseminationState flooding_round(DisseminationState state, const Topology& topology, FitMode mode);
DisseminationState flooding_round(DisseminationState state, const Topology& topology);

/// Fuses everything a node has heard with uniform weights over the origins
/// and applies the fit once.
DisseminationState flooding_finalize(DisseminationState state, FitMode mode, const FitOptions& options,
                                     FusionCounters& counters);

/// The fused density a node would fit to after flooding: uniform average over
/// all origins it has heard, components ordered by provenance.
PhdAA flooding_aggregate(const DisseminationState& state, std::size_t node);

enum class CommMode { Consensus, Flooding };

std::string_view to_string(CommMode mode);

/// Runs `rounds` rounds of the selected protocol (plus the flooding finalize).
/// With zero rounds nothing is exchanged and the state is returned unchanged.
DisseminationState disseminate(std::vector<GaussianMixture> locals, int step, const Topology& topology, CommMode comm,
                               FitMode mode, int rounds, const FitOptions& options, FusionCounters& counters);

} // namespace aafusion
