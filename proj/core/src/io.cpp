#include "aafusion/io.hpp"

#include "aafusion/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace aafusion {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
}

Vector to_vector(const json& j, const char* what) {
    if (!j.is_array()) {
        throw ConfigError(std::string(what) + " must be an array");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Matrix to_matrix(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(std::string(what) + " must be a non-empty array of rows");
    }
    const auto n = static_cast<Eigen::Index>(j.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ConfigError(std::string(what) + " must be square");
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
        }
    }
    return m;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const char* what) {
    if (!j.is_object()) {
        throw ConfigError(std::string(what) + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(std::string("unknown key '") + key + "' in " + what);
        }
    }
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

BirthComponent parse_birth(const json& j) {
    check_keys(j, {"existence", "mean", "cov", "cov_diag"}, "birth component");
    BirthComponent b;
    read_if(j, "existence", b.existence);
    b.mean = to_vector(j.at("mean"), "birth mean");
    if (j.contains("cov")) {
        b.cov = to_matrix(j.at("cov"), "birth cov");
    } else if (j.contains("cov_diag")) {
        const Vector d = to_vector(j.at("cov_diag"), "birth cov_diag");
        b.cov = d.asDiagonal();
    } else {
        throw ConfigError("birth component needs cov or cov_diag");
    }
    return b;
}

TargetSpec parse_target(const json& j) {
    check_keys(j, {"birth_step", "death_step", "state"}, "target");
    TargetSpec t;
    read_if(j, "birth_step", t.birth_step);
    read_if(j, "death_step", t.death_step);
    t.initial_state = to_vector(j.at("state"), "target state");
    return t;
}

} // namespace

ScenarioConfig parse_scenario(std::string_view json_text) {
    const json j = parse_json(json_text);
    check_keys(j,
               {"duration", "dt", "roi", "sensor_filters", "fusion", "comm", "rounds", "survival_prob", "detect_prob",
                "clutter_rate", "measurement_std", "q_scale", "birth", "targets", "gamma_g", "max_iter", "gate",
                "ospa_cutoff", "ospa_order", "runs", "seed"},
               "scenario");
    ScenarioConfig c = default_scenario();
    try {
        read_if(j, "duration", c.duration);
        read_if(j, "dt", c.dt);
        if (j.contains("roi")) {
            const auto roi = j.at("roi").get<std::vector<double>>();
            if (roi.size() != 4) {
                throw ConfigError("roi must be [x_min, x_max, y_min, y_max]");
            }
            std::copy(roi.begin(), roi.end(), c.roi.begin());
        }
        if (j.contains("sensor_filters")) {
            c.sensor_filters.clear();
            for (const auto& f : j.at("sensor_filters")) {
                c.sensor_filters.push_back(parse_filter_type(f.get<std::string>()));
            }
        }
        if (j.contains("fusion")) {
            c.fusion = parse_fusion(j.at("fusion").get<std::string>());
        }
        if (j.contains("comm")) {
            c.comm = parse_comm(j.at("comm").get<std::string>());
        }
        read_if(j, "rounds", c.rounds);
        read_if(j, "survival_prob", c.survival_prob);
        read_if(j, "detect_prob", c.detect_prob);
        read_if(j, "clutter_rate", c.clutter_rate);
        read_if(j, "measurement_std", c.measurement_std);
        read_if(j, "q_scale", c.q_scale);
        if (j.contains("birth")) {
            c.birth.clear();
            for (const auto& b : j.at("birth")) {
                c.birth.push_back(parse_birth(b));
            }
        }
        if (j.contains("targets")) {
            c.targets.clear();
            for (const auto& t : j.at("targets")) {
                c.targets.push_back(parse_target(t));
            }
        }
        read_if(j, "gamma_g", c.fit.gamma_g);
        read_if(j, "max_iter", c.fit.max_iter);
        if (j.contains("gate") && !j.at("gate").is_null()) {
            c.fit.gate = j.at("gate").get<double>();
        }
        read_if(j, "ospa_cutoff", c.ospa.cutoff);
        read_if(j, "ospa_order", c.ospa.order);
        read_if(j, "runs", c.runs);
        read_if(j, "seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    c.validate(c.sensor_filters.size());
    return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

Topology parse_topology(std::string_view json_text) {
    const json j = parse_json(json_text);
    check_keys(j, {"nodes", "edges", "adjacency"}, "topology");
    try {
        if (j.contains("adjacency")) {
            std::vector<std::vector<bool>> adj;
            for (const auto& row : j.at("adjacency")) {
                std::vector<bool> r;
                for (const auto& v : row) {
                    r.push_back(v.is_boolean() ? v.get<bool>() : v.get<int>() != 0);
                }
                adj.push_back(std::move(r));
            }
            if (j.contains("nodes") && j.at("nodes").get<std::size_t>() != adj.size()) {
                throw ConfigError("topology: nodes does not match the adjacency size");
            }
            return Topology::from_adjacency(adj);
        }
        const auto n = j.at("nodes").get<std::size_t>();
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        if (j.contains("edges")) {
            for (const auto& e : j.at("edges")) {
                if (!e.is_array() || e.size() != 2) {
                    throw ConfigError("topology: every edge must be a pair");
                }
                edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
            }
        }
        return Topology(n, edges);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("topology: ") + e.what());
    }
}

Topology load_topology(const std::filesystem::path& path) { return parse_topology(read_file(path)); }

std::optional<FitMode> parse_fusion(std::string_view text) {
    if (text == "none") {
        return std::nullopt;
    }
    if (text == "cc-only") {
        return FitMode::CcOnly;
    }
    if (text == "weight-fit") {
        return FitMode::WeightFit;
    }
    if (text == "gm-fit") {
        return FitMode::GmFit;
    }
    if (text == "isd-cdm") {
        throw NotImplementedError("fusion method 'isd-cdm' is not implemented");
    }
    throw ConfigError("unknown fusion method '" + std::string(text) + "'");
}

CommMode parse_comm(std::string_view text) {
    if (text == "consensus") {
        return CommMode::Consensus;
    }
    if (text == "flooding") {
        return CommMode::Flooding;
    }
    throw ConfigError("unknown communication mode '" + std::string(text) + "'");
}

std::string fusion_name(const std::optional<FitMode>& fusion) {
    return fusion ? std::string(to_string(*fusion)) : std::string("none");
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_results_csv(std::ostream& out, const MonteCarloResult& result, const ScenarioConfig& config) {
    const std::string fusion = fusion_name(config.fusion);
    const std::string comm(to_string(config.comm));
    const std::string t = std::to_string(config.rounds);
    out << kResultsHeader << '\n';
    for (const auto& r : result.records) {
        out << r.run << ',' << r.step << ',' << r.sensor << ',' << to_string(r.filter) << ',' << fusion << ',' << comm
            << ',' << t << ',' << format_double(r.ospa) << ',' << format_double(r.n_hat) << ',' << r.n_true << ','
            << r.cost << '\n';
    }
}

void write_summary_json(std::ostream& out, const MonteCarloResult& result, const ScenarioConfig& config,
                        std::size_t sensors) {
    json j;
    j["fusion"] = fusion_name(config.fusion);
    j["comm"] = std::string(to_string(config.comm));
    j["t"] = config.rounds;
    j["runs"] = config.runs;
    j["steps"] = config.duration;
    j["sensors"] = sensors;
    j["seed"] = config.seed;
    j["gamma_g"] = config.fit.gamma_g;
    j["records"] = result.records.size();
    j["mean_ospa"] = result.mean_ospa();
    json by_type = json::object();
    for (const auto type : {FilterType::Phd, FilterType::Mb, FilterType::Lmb}) {
        bool present = false;
        for (std::size_t s = 0; s < sensors; ++s) {
            present = present || config.filter_for(s, sensors) == type;
        }
        if (present) {
            by_type[std::string(to_string(type))] = result.mean_ospa(type);
        }
    }
    j["mean_ospa_by_filter"] = by_type;
    j["acc"] = acc(result.total_cost(), static_cast<std::size_t>(config.runs), static_cast<std::size_t>(config.duration),
                   sensors);
    const auto& c = result.counters;
    j["counters"] = {{"fits", c.fits},
                     {"converged", c.converged},
                     {"cold_starts", c.cold_starts},
                     {"fit_iterations", c.iterations},
                     {"mass_violations", c.mass_violations},
                     {"max_mass_error", c.max_mass_error}};
    json runs = json::array();
    for (const auto& r : result.runs) {
        json e{{"run", r.run}, {"wall_seconds", r.wall_seconds}, {"aborted", r.aborted}};
        if (r.aborted) {
            e["abort_reason"] = r.abort_reason;
        }
        runs.push_back(std::move(e));
    }
    j["run_summaries"] = runs;
    out << j.dump(2) << '\n';
}

} // namespace aafusion
