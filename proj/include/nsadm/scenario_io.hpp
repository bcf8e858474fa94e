/// @file
/// @brief JSON (de)serialization of scenarios and metrics, and dotted-path
///        overrides ("env.ks_N_per_m=1e4", "fd_schedule.0.fy_N=-2.5").
#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "nsadm/sim.hpp"

namespace nsadm {

nlohmann::json scenario_to_json(const Scenario &sc);
/// Strict: unknown keys and type mismatches raise ConfigError.
Scenario scenario_from_json(const nlohmann::json &j);

nlohmann::json bench_to_json(const BenchScenario &b);
BenchScenario bench_from_json(const nlohmann::json &j);

/// True when the document describes the double-integrator benchmark.
bool is_bench_document(const nlohmann::json &j);

/// Sets the value at a dotted path. The path must already exist and the new
/// value must have a compatible type.
void apply_override(nlohmann::json &doc, const std::string &path,
                    const nlohmann::json &value);

/// Parses "key=value"; the value is read as JSON when possible, else string.
void apply_override(nlohmann::json &doc, const std::string &assignment);

nlohmann::json metrics_to_json(const Metrics &m);
nlohmann::json bench_metrics_to_json(const BenchMetrics &m);

nlohmann::json load_json_file(const std::string &path);
void save_json_file(const std::string &path, const nlohmann::json &j);

} // namespace nsadm
