#pragma once

#include "aafusion/fusion.hpp"
#include "aafusion/network.hpp"
#include "aafusion/scenario.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace aafusion {

/// Parses a scenario JSON document. Keys absent from the document keep the
/// values of default_scenario(); unknown keys are rejected. The result is
/// validated against its own sensor_filters count. Throws ConfigError.
ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Parses {"nodes": n, "edges": [[a, b], ...]} or {"adjacency": [[0, 1, ...], ...]}.
/// Throws ConfigError.
Topology parse_topology(std::string_view json_text);
Topology load_topology(const std::filesystem::path& path);

/// "none" maps to nullopt. "isd-cdm" throws NotImplementedError; anything else
/// unknown throws ConfigError.
std::optional<FitMode> parse_fusion(std::string_view text);
CommMode parse_comm(std::string_view text);
std::string fusion_name(const std::optional<FitMode>& fusion);

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

inline constexpr std::string_view kResultsHeader = "run,step,sensor,filter_type,fusion,comm,t,ospa,n_hat,n_true,cost";

/// One row per record, in record order, after kResultsHeader.
void write_results_csv(std::ostream& out, const MonteCarloResult& result, const ScenarioConfig& config);

/// Mean OSPA overall and per filter type, ACC, per-run abort flags and the
/// fusion counters.
void write_summary_json(std::ostream& out, const MonteCarloResult& result, const ScenarioConfig& config,
                        std::size_t sensors);

} // namespace aafusion
