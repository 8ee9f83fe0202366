// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.

#include "aafusion/bounds.hpp"
#include "aafusion/errors.hpp"
#include "aafusion/fusion.hpp"
#include "aafusion/io.hpp"
#include "aafusion/metrics.hpp"
#include "aafusion/network.hpp"
#include "aafusion/scenario.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace aafusion;
using namespace aafusion::testing;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------- tolerances
constexpr double kA1Tolerance = 1e-3;
constexpr int kA2Samples = 100000;
constexpr double kA2Sigmas = 3.0;
constexpr double kA4Slack = 1e-12;
constexpr double kA4ConvergedFraction = 0.99;
constexpr double kA5MassTolerance = 1e-9;
constexpr double kA6Reduction = 0.50;
constexpr double kA7Reduction = 0.30;
constexpr std::size_t kA9CostPerGc = 15;
constexpr double kA10Tolerance = 1e-9;
constexpr double kA11Tolerance = 1e-12;

constexpr int kRuns = 10;
constexpr int kMaxRounds = 4;
constexpr int kReferenceRounds = 3;

// ---------------------------------------------------------------- A1
Verdict a1_kl_quadrature() {
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto a = random_gaussian(rng, 1, 1.0, 1.0, 0.8);
        const auto b = random_gaussian(rng, 1, 1.0, 1.0, 0.8);
        const double sa = std::sqrt(a.cov(0, 0));
        const double q = quadrature_kl_1d(a.mean(0), a.cov(0, 0), b.mean(0), b.cov(0, 0), a.mean(0) - 12 * sa,
                                          a.mean(0) + 12 * sa, sa * 1e-3);
        worst = std::max(worst, std::abs(kl_gaussian(a, b) - q));
    }
    for (int i = 0; i < 100; ++i) {
        const auto a = random_gaussian(rng, 2, 1.0, 1.0, 0.8);
        const auto b = random_gaussian(rng, 2, 1.0, 1.0, 0.8);
        worst = std::max(worst, std::abs(kl_gaussian(a, b) - quadrature_kl_2d(a, b, 9.0, 600)));
    }
    return {worst < kA1Tolerance, "200 pairs, max |delta| = " + fmt(worst)};
}

// ---------------------------------------------------------------- A2
Verdict a2_vub_sandwich() {
    std::mt19937_64 rng(1002);
    std::uniform_int_distribution<int> dim(1, 4);
    std::uniform_int_distribution<std::size_t> count(1, 8);
    std::uniform_real_distribution<double> mass(0.5, 5.0);
    int failures = 0;
    double worst_low = -INFINITY;
    double worst_high = -INFINITY;
    std::string first_failure;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = dim(rng);
        const PhdAA aa = [&] {
            auto gm = random_mixture(rng, n, count(rng), mass(rng), 3.0);
            const double total = total_mass(gm);
            return PhdAA{std::move(gm), total};
        }();
        auto local = random_mixture(rng, n, count(rng), 1.0, 3.0);
        local.set_weights(gc_weight_fit(local, aa).weights);

        const double upper = vub(aa, local, assign_nearest(local, aa)) / aa.n_hat;
        const double lower = bound_d5(aa, local);
        const auto kl = sampled_kl(rng, aa.mixture, local, kA2Samples);
        const double margin = kA2Sigmas * kl.standard_error;
        const double low_gap = lower - margin - kl.mean;
        const double high_gap = kl.mean - upper - margin;
        worst_low = std::max(worst_low, low_gap);
        worst_high = std::max(worst_high, high_gap);
        if (low_gap > 0.0 || high_gap > 0.0) {
            ++failures;
            if (first_failure.empty()) {
                first_failure = "; first failure trial " + std::to_string(trial) + ": D5=" + fmt(lower, 6) +
                                " KL=" + fmt(kl.mean, 6) + "+-" + fmt(kl.standard_error, 3) + " VUB=" + fmt(upper, 6);
            }
        }
    }
    return {failures == 0, "100 pairs, violations = " + std::to_string(failures) + ", max(D5-3SE-KL) = " +
                               fmt(worst_low) + ", max(KL-VUB-3SE) = " + fmt(worst_high) + first_failure};
}

// ---------------------------------------------------------------- A3
Verdict a3_assignment_optimality() {
    std::mt19937_64 rng(1003);
    std::uniform_int_distribution<std::size_t> count(1, 3);
    std::uniform_int_distribution<int> dim(1, 4);
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Index n = dim(rng);
        auto gm = random_mixture(rng, n, count(rng), 2.0, 3.0);
        const PhdAA aa{gm, total_mass(gm)};
        const auto local = random_mixture(rng, n, count(rng), 2.0, 3.0);
        const double nearest = vub(aa, local, assign_nearest(local, aa));
        double best = INFINITY;
        for_each_map(aa.mixture.size(), local.size(), [&](const std::vector<std::size_t>& map) {
            Assignment h;
            for (std::size_t a = 0; a < map.size(); ++a) {
                h.target.emplace_back(map[a]);
                h.mass.push_back(aa.mixture[a].weight);
            }
            best = std::min(best, vub(aa, local, h));
        });
        if (nearest != best) {
            ++mismatches;
        }
    }
    return {mismatches == 0, "500 trials, inexact = " + std::to_string(mismatches)};
}

// ---------------------------------------------------------------- A4
Verdict a4_monotonicity() {
    std::mt19937_64 rng(1004);
    std::uniform_int_distribution<int> dim(1, 4);
    std::uniform_int_distribution<std::size_t> count(1, 8);
    std::uniform_real_distribution<double> mass(0.5, 5.0);
    int increases = 0;
    int converged = 0;
    const int calls = 1000;
    for (int trial = 0; trial < calls; ++trial) {
        const Eigen::Index n = dim(rng);
        const auto local = random_mixture(rng, n, count(rng), mass(rng), 4.0);
        const auto other = random_mixture(rng, n, count(rng), mass(rng), 4.0);
        const std::vector<FusionInput> in{{0.5, std::cref(local)}, {0.5, std::cref(other)}};
        const auto aa = weighted_phd_aa(in);
        try {
            const auto fit = gm_phd_fit(local, aa, 0.1, 10);
            const auto& k = fit.report.goodness;
            for (std::size_t i = 1; i < k.size(); ++i) {
                if (k[i] > k[i - 1] + kA4Slack * std::max(1.0, k[i - 1])) {
                    ++increases;
                    break;
                }
            }
            converged += fit.report.converged ? 1 : 0;
        } catch (const InvariantViolation&) {
            ++increases;
        }
    }
    const double fraction = static_cast<double>(converged) / calls;
    return {increases == 0 && fraction >= kA4ConvergedFraction,
            "1000 fits, increases = " + std::to_string(increases) + ", converged = " + fmt(100 * fraction) + "%"};
}

// ---------------------------------------------------------------- simulations (A5-A9)
struct Simulation {
    std::string label;
    MonteCarloResult result;
    std::size_t sensors = 0;
    int steps = 0;
    double seconds = 0.0;

    [[nodiscard]] double acc_value() const {
        return acc(result.total_cost(), static_cast<std::size_t>(kRuns), static_cast<std::size_t>(steps), sensors);
    }
};

class SimulationBank {
public:
    SimulationBank(ScenarioConfig base, ScenarioConfig hetero, Topology topology)
        : base_(std::move(base)), hetero_(std::move(hetero)), topology_(std::move(topology)) {}

    const Simulation& phd(std::optional<FitMode> fusion, CommMode comm, int rounds) {
        return run(base_, fusion, comm, rounds, "phd");
    }
    const Simulation& hetero(std::optional<FitMode> fusion, CommMode comm, int rounds) {
        return run(hetero_, fusion, comm, rounds, "hetero");
    }
    [[nodiscard]] const std::map<std::string, Simulation>& all() const { return cache_; }

private:
    const Simulation& run(const ScenarioConfig& base, std::optional<FitMode> fusion, CommMode comm, int rounds,
                          const std::string& tag) {
        const std::string key = tag + "/" + fusion_name(fusion) + "/" + std::string(to_string(comm)) + "/t=" +
                                std::to_string(rounds);
        if (auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
        auto config = base;
        config.fusion = fusion;
        config.comm = comm;
        config.rounds = rounds;
        config.runs = kRuns;
        const auto started = std::chrono::steady_clock::now();
        Simulation sim{key, run_monte_carlo(config, topology_), topology_.size(), config.duration, 0.0};
        sim.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::cout << "  sim " << key << ": mean OSPA " << fmt(sim.result.mean_ospa()) << ", ACC "
                  << fmt(sim.acc_value()) << ", " << fmt(sim.seconds, 3) << " s" << std::endl;
        return cache_.emplace(key, std::move(sim)).first->second;
    }

    ScenarioConfig base_;
    ScenarioConfig hetero_;
    Topology topology_;
    std::map<std::string, Simulation> cache_;
};

Verdict no_aborts(const SimulationBank& bank) {
    for (const auto& [key, sim] : bank.all()) {
        if (sim.result.any_aborted()) {
            return {false, key + " aborted a run"};
        }
    }
    return {true, ""};
}

Verdict a6_homogeneous(SimulationBank& bank) {
    const double none = bank.phd(std::nullopt, CommMode::Flooding, 0).result.mean_ospa();
    const double cc = bank.phd(FitMode::CcOnly, CommMode::Flooding, kReferenceRounds).result.mean_ospa();
    const double wf = bank.phd(FitMode::WeightFit, CommMode::Flooding, kReferenceRounds).result.mean_ospa();
    const double gm = bank.phd(FitMode::GmFit, CommMode::Flooding, kReferenceRounds).result.mean_ospa();
    double best_reduction = 0.0;
    for (int t = 1; t <= kMaxRounds; ++t) {
        best_reduction = std::max(best_reduction, 1.0 - bank.phd(FitMode::GmFit, CommMode::Flooding, t).result.mean_ospa() / none);
    }
    const double reduction_t3 = 1.0 - gm / none;
    const bool ordered = gm <= wf && wf <= cc && cc <= none;
    const auto aborted = no_aborts(bank);
    return {ordered && reduction_t3 >= kA6Reduction && aborted.pass,
            "t=3 flooding: gm-fit " + fmt(gm) + " <= weight-fit " + fmt(wf) + " <= cc-only " + fmt(cc) +
                " <= none " + fmt(none) + (ordered ? "" : " (order broken)") + "; gm-fit reduction t=3 " +
                fmt(100 * reduction_t3, 3) + "%, best over t=1..4 " + fmt(100 * best_reduction, 3) + "%" +
                (aborted.pass ? "" : "; " + aborted.detail)};
}

Verdict a7_heterogeneous(SimulationBank& bank) {
    const auto& base = bank.hetero(std::nullopt, CommMode::Flooding, 0).result;
    const auto& fused = bank.hetero(FitMode::GmFit, CommMode::Flooding, kReferenceRounds).result;
    bool pass = !base.any_aborted() && !fused.any_aborted();
    std::string detail;
    for (const auto type : {FilterType::Phd, FilterType::Mb, FilterType::Lmb}) {
        const double before = base.mean_ospa(type);
        const double after = fused.mean_ospa(type);
        const double reduction = 1.0 - after / before;
        pass = pass && reduction >= kA7Reduction;
        detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(type)) + " " + fmt(before) + " -> " +
                  fmt(after) + " (" + fmt(100 * reduction, 3) + "%)";
    }
    return {pass, detail};
}

Verdict a8_flooding_vs_consensus(SimulationBank& bank) {
    bool pass = true;
    std::string detail;
    for (int t = 1; t <= kMaxRounds; ++t) {
        const double f = bank.phd(FitMode::GmFit, CommMode::Flooding, t).result.mean_ospa();
        const double c = bank.phd(FitMode::GmFit, CommMode::Consensus, t).result.mean_ospa();
        pass = pass && f <= c;
        detail += std::string(detail.empty() ? "" : ", ") + "t=" + std::to_string(t) + " flooding " + fmt(f) +
                  (f <= c ? " <= " : " > ") + "consensus " + fmt(c);
    }
    return {pass, detail};
}

Verdict a9_acc(SimulationBank& bank) {
    bool pass = comm_cost_per_gc(4) == kA9CostPerGc;
    std::string detail = "cost per GC " + std::to_string(comm_cost_per_gc(4));
    for (int t = 2; t <= kMaxRounds; ++t) {
        const double wf = bank.phd(FitMode::WeightFit, CommMode::Consensus, t).acc_value();
        const double gm = bank.phd(FitMode::GmFit, CommMode::Consensus, t).acc_value();
        pass = pass && wf < gm;
        detail += ", t=" + std::to_string(t) + " weight-fit " + fmt(wf) + (wf < gm ? " < " : " >= ") + "gm-fit " +
                  fmt(gm);
    }
    return {pass, detail};
}

Verdict a5_mass_conservation(const SimulationBank& bank) {
    std::size_t fits = 0;
    std::size_t violations = 0;
    double worst = 0.0;
    for (const auto& [key, sim] : bank.all()) {
        fits += sim.result.counters.fits;
        violations += sim.result.counters.mass_violations;
        worst = std::max(worst, sim.result.counters.max_mass_error);
    }
    return {fits > 0 && violations == 0 && worst <= kA5MassTolerance,
            std::to_string(fits) + " fusion calls, violations = " + std::to_string(violations) +
                ", max |mass - n_hat| = " + fmt(worst)};
}

// ---------------------------------------------------------------- A10
Verdict a10_ospa_oracle() {
    std::mt19937_64 rng(1010);
    std::uniform_int_distribution<std::size_t> count(0, 6);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Vector> x(count(rng));
        std::vector<Vector> y(count(rng));
        for (auto& p : x) {
            p = random_vector(rng, 2, 150.0);
        }
        for (auto& p : y) {
            p = random_vector(rng, 2, 150.0);
        }
        worst = std::max(worst, std::abs(ospa(x, y) - brute_force_ospa(x, y, 100.0, 2.0)));
    }
    return {worst < kA10Tolerance, "1000 pairs, max |delta| = " + fmt(worst)};
}

// ---------------------------------------------------------------- A11
Verdict a11_metropolis() {
    std::mt19937_64 rng(1011);
    std::uniform_int_distribution<std::size_t> nodes(2, 20);
    std::uniform_real_distribution<double> density(0.0, 0.5);
    double worst_row = 0.0;
    bool nonnegative = true;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = nodes(rng);
        const Topology topo(n, random_connected_edges(rng, n, density(rng)));
        for (std::size_t s = 0; s < n; ++s) {
            double sum = 0.0;
            for (const auto& [r, w] : metropolis_weights(topo, s)) {
                nonnegative = nonnegative && w >= 0.0;
                sum += w;
            }
            worst_row = std::max(worst_row, std::abs(sum - 1.0));
        }
    }
    const auto end = metropolis_weights(Topology::path(3), 0);
    const bool example = end.size() == 2 && std::abs(end[0].second - 2.0 / 3.0) < kA11Tolerance &&
                         std::abs(end[1].second - 1.0 / 3.0) < kA11Tolerance;
    return {nonnegative && worst_row < kA11Tolerance && example,
            "100 graphs, max |row sum - 1| = " + fmt(worst_row) + ", path end node {" + fmt(end[1].second) + ", " +
                fmt(end[0].second) + "}"};
}

// ---------------------------------------------------------------- A12
std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict a12_determinism(const std::filesystem::path& data) {
    const auto root = std::filesystem::temp_directory_path() / ("aafusion_a12_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    std::filesystem::remove_all(root);
    const std::vector<std::string> invocations{
        "--scenario " + (data / "scenario_phd.json").string() + " --fusion gm-fit --comm flooding --t 2 --runs 2",
        "--scenario " + (data / "scenario_hetero.json").string() + " --fusion weight-fit --comm consensus --t 2 --runs 1",
    };
    std::string detail;
    bool pass = true;
    for (std::size_t i = 0; i < invocations.size(); ++i) {
        std::string csv[2];
        for (int rep = 0; rep < 2; ++rep) {
            const auto out = root / ("inv" + std::to_string(i) + "_" + std::to_string(rep));
            const std::string cmd = std::string("\"") + AAFUSION_SIM_PATH + "\" " + invocations[i] + " --topology " +
                                    (data / "network12.json").string() + " --seed 7 --out " + out.string() +
                                    " > /dev/null";
            const int rc = std::system(cmd.c_str());
            if (rc != 0) {
                return {false, "simulator exited with status " + std::to_string(rc)};
            }
            csv[rep] = slurp(out / "results.csv");
        }
        const bool same = !csv[0].empty() && csv[0] == csv[1];
        pass = pass && same;
        detail += std::string(detail.empty() ? "" : ", ") + "invocation " + std::to_string(i + 1) + ": " +
                  std::to_string(csv[0].size()) + " bytes " + (same ? "identical" : "DIFFERENT");
    }
    std::filesystem::remove_all(root);
    return {pass, detail};
}

} // namespace

int main() {
    const std::filesystem::path data = AAFUSION_DATA_DIR;
    int failures = 0;
    const auto report = [&](const char* id, const char* title, const std::function<Verdict()>& check) {
        const auto started = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << " " << title << ": " << v.detail << " ("
                  << fmt(seconds, 3) << " s)" << std::endl;
    };

    report("A1", "KL oracle agreement", a1_kl_quadrature);
    report("A2", "VUB sandwich", a2_vub_sandwich);
    report("A3", "assignment optimality", a3_assignment_optimality);
    report("A4", "fit monotonicity", a4_monotonicity);
    report("A10", "OSPA oracle", a10_ospa_oracle);
    report("A11", "Metropolis weights", a11_metropolis);

    SimulationBank bank(load_scenario(data / "scenario_phd.json"), load_scenario(data / "scenario_hetero.json"),
                        load_topology(data / "network12.json"));
    report("A6", "homogeneous PHD trend", [&] { return a6_homogeneous(bank); });
    report("A7", "heterogeneous trend", [&] { return a7_heterogeneous(bank); });
    report("A8", "flooding vs consensus", [&] { return a8_flooding_vs_consensus(bank); });
    report("A9", "ACC accounting", [&] { return a9_acc(bank); });
    report("A5", "mass conservation", [&] { return a5_mass_conservation(bank); });

    report("A12", "CLI determinism", [&] { return a12_determinism(data); });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
