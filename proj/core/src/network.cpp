#include "aafusion/network.hpp"

#include "aafusion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace aafusion {

namespace {

constexpr double kMassTolerance = 1e-9;

Eigen::Index state_dim(const std::vector<Payload>& nodes) {
    for (const auto& n : nodes) {
        if (!n.mixture.empty()) {
            return n.mixture.dim();
        }
    }
    return 0;
}

std::size_t gc_cost(Eigen::Index dim) { return dim > 0 ? comm_cost_per_gc(static_cast<std::size_t>(dim)) : 0; }

void check_sizes(const DisseminationState& state, const Topology& topology) {
    if (state.nodes.size() != topology.size()) {
        throw ConfigError("dissemination has " + std::to_string(state.nodes.size()) + " nodes but the topology has " +
                          std::to_string(topology.size()));
    }
}

FitOutcome cc_only(const GaussianMixture& local, double n_hat) {
    auto scaled = cc_scale(total_mass(local), n_hat, local);
    FitOutcome out{std::move(scaled.mixture), {}, false};
    out.report.iterations = 1;
    out.report.converged = true;
    return out;
}

} // namespace

Topology::Topology(std::vector<std::vector<std::size_t>> neighborhoods) : neighborhoods_(std::move(neighborhoods)) {
    if (neighborhoods_.empty()) {
        throw ConfigError("topology has no nodes");
    }
    for (const auto d : hop_distances(0)) {
        if (d < 0) {
            throw ConfigError("topology is not connected");
        }
    }
}

Topology::Topology(std::size_t node_count, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
    : Topology([&] {
          std::vector<std::set<std::size_t>> sets(node_count);
          for (std::size_t s = 0; s < node_count; ++s) {
              sets[s].insert(s);
          }
          for (const auto& [a, b] : edges) {
              if (a >= node_count || b >= node_count) {
                  throw ConfigError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") is out of range");
              }
              if (a == b) {
                  throw ConfigError("self-loop at node " + std::to_string(a));
              }
              sets[a].insert(b);
              sets[b].insert(a);
          }
          std::vector<std::vector<std::size_t>> out;
          out.reserve(node_count);
          for (const auto& s : sets) {
              out.emplace_back(s.begin(), s.end());
          }
          return out;
      }()) {}

Topology Topology::from_adjacency(const std::vector<std::vector<bool>>& adjacency) {
    const std::size_t n = adjacency.size();
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        if (adjacency[i].size() != n) {
            throw ConfigError("adjacency matrix is not square");
        }
        if (adjacency[i][i]) {
            throw ConfigError("adjacency matrix has a nonzero diagonal at " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (adjacency[i][j] != adjacency[j][i]) {
                throw ConfigError("adjacency matrix is not symmetric at (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
            }
            if (adjacency[i][j]) {
                edges.emplace_back(i, j);
            }
        }
    }
    return Topology(n, edges);
}

Topology Topology::fully_connected(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            edges.emplace_back(i, j);
        }
    }
    return Topology(n, edges);
}

Topology Topology::path(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        edges.emplace_back(i, i + 1);
    }
    return Topology(n, edges);
}

bool Topology::adjacent(std::size_t r, std::size_t s) const {
    return r != s && std::binary_search(neighborhoods_[s].begin(), neighborhoods_[s].end(), r);
}

std::vector<std::pair<std::size_t, std::size_t>> Topology::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t s = 0; s < size(); ++s) {
        for (const auto r : neighborhoods_[s]) {
            if (r > s) {
                out.emplace_back(s, r);
            }
        }
    }
    return out;
}

std::vector<int> Topology::hop_distances(std::size_t s) const {
    std::vector<int> dist(size(), -1);
    std::deque<std::size_t> queue{s};
    dist[s] = 0;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        for (const auto v : neighborhoods_[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

std::vector<std::size_t> Topology::hop_neighborhood(std::size_t s, int hops) const {
    const auto dist = hop_distances(s);
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < size(); ++r) {
        if (dist[r] >= 0 && dist[r] <= hops) {
            out.push_back(r);
        }
    }
    return out;
}

int Topology::diameter() const {
    int d = 0;
    for (std::size_t s = 0; s < size(); ++s) {
        const auto dist = hop_distances(s);
        d = std::max(d, *std::max_element(dist.begin(), dist.end()));
    }
    return d;
}

std::vector<std::pair<std::size_t, double>> metropolis_weights(const Topology& topology, std::size_t s) {
    const auto& hood = topology.neighborhood(s);
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(hood.size());
    double others = 0.0;
    for (const auto r : hood) {
        if (r == s) {
            continue;
        }
        const double w = 1.0 / static_cast<double>(std::max(hood.size(), topology.neighborhood(r).size()));
        out.emplace_back(r, w);
        others += w;
    }
    out.emplace_back(s, 1.0 - others);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t comm_cost_per_gc(std::size_t n_x) {
    if (n_x == 0) {
        throw std::invalid_argument("comm_cost_per_gc: n_x must be positive");
    }
    return 1 + n_x + n_x * (n_x + 1) / 2;
}

void FusionCounters::record(const FitOutcome& outcome, double n_hat) {
    ++fits;
    if (outcome.report.converged) {
        ++converged;
    }
    if (outcome.cold_start) {
        ++cold_starts;
    }
    iterations += static_cast<std::size_t>(outcome.report.iterations);
    const double err = std::abs(total_mass(outcome.mixture) - n_hat);
    max_mass_error = std::max(max_mass_error, err);
    if (err > kMassTolerance) {
        ++mass_violations;
    }
}

void FusionCounters::merge(const FusionCounters& other) {
    fits += other.fits;
    converged += other.converged;
    cold_starts += other.cold_starts;
    iterations += other.iterations;
    mass_violations += other.mass_violations;
    max_mass_error = std::max(max_mass_error, other.max_mass_error);
}

std::vector<std::size_t> DisseminationState::node_costs() const {
    std::vector<std::size_t> out(nodes.size(), 0);
    for (const auto& row : cost) {
        for (std::size_t s = 0; s < row.size(); ++s) {
            out[s] += row[s];
        }
    }
    return out;
}

std::size_t DisseminationState::total_cost() const {
    std::size_t t = 0;
    for (const auto c : node_costs()) {
        t += c;
    }
    return t;
}

DisseminationState start_dissemination(std::vector<GaussianMixture> locals, int step) {
    DisseminationState state;
    state.step = step;
    state.nodes.reserve(locals.size());
    for (std::size_t s = 0; s < locals.size(); ++s) {
        Payload p{std::move(locals[s]), {}};
        p.ids.reserve(p.mixture.size());
        for (std::size_t j = 0; j < p.mixture.size(); ++j) {
            p.ids.push_back(ProvenanceId{s, step, j});
        }
        state.nodes.push_back(std::move(p));
    }
    state.sent.resize(state.nodes.size());
    state.received.resize(state.nodes.size());
    state.fresh.resize(state.nodes.size());
    for (std::size_t s = 0; s < state.nodes.size(); ++s) {
        state.received[s].emplace(s, state.nodes[s]);
        state.fresh[s].push_back(s);
    }
    return state;
}

DisseminationState consensus_round(DisseminationState state, const Topology& topology, FitMode mode,
                                   const FitOptions& options, FusionCounters& counters) {
    check_sizes(state, topology);
    const auto per_gc = gc_cost(state_dim(state.nodes));
    const auto& snapshot = state.nodes;
    std::vector<Payload> next = snapshot;
    std::vector<std::size_t> costs(snapshot.size(), 0);

    for (std::size_t s = 0; s < snapshot.size(); ++s) {
        if (topology.neighborhood(s).size() == 1) {
            continue;
        }
        const auto& own = snapshot[s];
        switch (mode) {
        case FitMode::CcOnly:
            costs[s] = 1;
            break;
        case FitMode::GmFit:
            costs[s] = own.mixture.size() * per_gc;
            break;
        case FitMode::WeightFit:
            for (const auto& id : own.ids) {
                costs[s] += state.sent[s].insert(id).second ? per_gc : 1;
            }
            break;
        }
    }

    for (std::size_t s = 0; s < snapshot.size(); ++s) {
        if (topology.neighborhood(s).size() == 1) {
            continue;
        }
        const auto weights = metropolis_weights(topology, s);
        const auto& local = snapshot[s].mixture;
        if (mode == FitMode::CcOnly) {
            double n_hat = 0.0;
            for (const auto& [r, w] : weights) {
                n_hat += w * total_mass(snapshot[r].mixture);
            }
            if (local.empty() || !(total_mass(local) > 0.0)) {
                continue;
            }
            auto out = cc_only(local, n_hat);
            counters.record(out, n_hat);
            next[s].mixture = std::move(out.mixture);
            continue;
        }
        std::vector<FusionInput> inputs;
        std::vector<ProvenanceId> aa_ids;
        for (const auto& [r, w] : weights) {
            inputs.push_back(FusionInput{w, std::cref(snapshot[r].mixture)});
            aa_ids.insert(aa_ids.end(), snapshot[r].ids.begin(), snapshot[r].ids.end());
        }
        const PhdAA aa = weighted_phd_aa(inputs);
        auto out = fit_local(local, aa, mode, options);
        counters.record(out, aa.n_hat);
        next[s].mixture = std::move(out.mixture);
        if (out.cold_start) {
            next[s].ids = std::move(aa_ids);
        }
    }

    state.nodes = std::move(next);
    state.cost.push_back(std::move(costs));
    ++state.round;
    return state;
}

DisseminationState flooding_round(DisseminationState state, const Topology& topology, FitMode mode) {
    check_sizes(state, topology);
    const auto per_gc = gc_cost(state_dim(state.nodes));
    const std::size_t n = state.nodes.size();
    std::vector<std::size_t> costs(n, 0);
    std::vector<std::vector<std::size_t>> next_fresh(n);

    for (std::size_t s = 0; s < n; ++s) {
        if (topology.neighborhood(s).size() == 1) {
            continue;
        }
        for (const auto origin : state.fresh[s]) {
            const auto& payload = state.received[s].at(origin);
            costs[s] += mode == FitMode::CcOnly ? 1 : payload.mixture.size() * per_gc;
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (topology.neighborhood(s).size() == 1) {
            continue;
        }
        for (const auto origin : state.fresh[s]) {
            for (const auto r : topology.neighborhood(s)) {
                if (r == s || state.received[r].contains(origin)) {
                    continue;
                }
                state.received[r].emplace(origin, state.received[s].at(origin));
                next_fresh[r].push_back(origin);
            }
        }
    }
    for (auto& f : next_fresh) {
        std::sort(f.begin(), f.end());
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (topology.neighborhood(s).size() > 1) {
            state.fresh[s] = std::move(next_fresh[s]);
        }
    }
    state.cost.push_back(std::move(costs));
    ++state.round;
    return state;
}

DisseminationState flooding_round(DisseminationState state, const Topology& topology) {
    return flooding_round(std::move(state), topology, FitMode::GmFit);
}

PhdAA flooding_aggregate(const DisseminationState& state, std::size_t node) {
    const auto& heard = state.received.at(node);
    const double w = 1.0 / static_cast<double>(heard.size());
    std::vector<FusionInput> inputs;
    inputs.reserve(heard.size());
    for (const auto& [origin, payload] : heard) {
        inputs.push_back(FusionInput{w, std::cref(payload.mixture)});
    }
    return weighted_phd_aa(inputs);
}

DisseminationState flooding_finalize(DisseminationState state, FitMode mode, const FitOptions& options,
                                     FusionCounters& counters) {
    for (std::size_t s = 0; s < state.nodes.size(); ++s) {
        if (state.received[s].size() <= 1) {
            continue;
        }
        const PhdAA aa = flooding_aggregate(state, s);
        auto& node = state.nodes[s];
        if (mode == FitMode::CcOnly) {
            if (node.mixture.empty() || !(total_mass(node.mixture) > 0.0)) {
                continue;
            }
            auto out = cc_only(node.mixture, aa.n_hat);
            counters.record(out, aa.n_hat);
            node.mixture = std::move(out.mixture);
            continue;
        }
        auto out = fit_local(node.mixture, aa, mode, options);
        counters.record(out, aa.n_hat);
        node.mixture = std::move(out.mixture);
        if (out.cold_start) {
            node.ids.clear();
            for (const auto& [origin, payload] : state.received[s]) {
                node.ids.insert(node.ids.end(), payload.ids.begin(), payload.ids.end());
            }
        }
    }
    return state;
}

std::string_view to_string(CommMode mode) {
    switch (mode) {
    case CommMode::Consensus:
        return "consensus";
    case CommMode::Flooding:
        return "flooding";
    }
    return "?";
}

DisseminationState disseminate(std::vector<GaussianMixture> locals, int step, const Topology& topology, CommMode comm,
                               FitMode mode, int rounds, const FitOptions& options, FusionCounters& counters) {
    auto state = start_dissemination(std::move(locals), step);
    if (rounds <= 0) {
        return state;
    }
    for (int t = 0; t < rounds; ++t) {
        state = comm == CommMode::Consensus ? consensus_round(std::move(state), topology, mode, options, counters)
                                            : flooding_round(std::move(state), topology, mode);
    }
    if (comm == CommMode::Flooding) {
        state = flooding_finalize(std::move(state), mode, options, counters);
    }
    return state;
}

} // namespace aafusion
