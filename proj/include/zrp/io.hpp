#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "zrp/configuration.hpp"
#include "zrp/coupling.hpp"
#include "zrp/dynamics.hpp"
#include "zrp/environment.hpp"
#include "zrp/experiments.hpp"

namespace zrp {

using nlohmann::json;

// ---- JSON codecs ----------------------------------------------------------
// Environments serialize as {"x_lo": int, "floor_c": real, "rates": [...]};
// configurations as {"x_lo": int, "occ": [...]}.  `where` strings are JSON
// pointer paths used in ConfigError messages.

json env_to_json(const Environment& env);
Environment env_from_json(const json& j, const std::string& where);

json config_to_json(const Configuration& config);
Configuration config_from_json(const json& j, const std::string& where);

json env_spec_to_json(const EnvSpec& spec);
EnvSpec env_spec_from_json(const json& j, const std::string& where);

// An environment "source" is any of: {"file": path} pointing at another
// source, a direct environment object, or an iid spec object carrying
// "window": [lo, hi] and "env_seed".
Environment environment_from_source(const json& j, const std::filesystem::path& base_dir,
                                    const std::string& where);

json boundary_to_json(const BoundarySpec& b);
BoundarySpec boundary_from_json(const json& j, const std::string& where);

json rate_function_to_json(const RateFunctionSpec& g);
RateFunctionSpec rate_function_from_json(const json& j, const std::string& where);

// Initial condition descriptor: {"kind": "empty"} | {"kind": "constant",
// "value": k} | {"kind": "product", "v": fugacity} | {"kind": "explicit",
// "config": {...}} | {"kind": "explicit", "file": path}.
struct InitialCondition {
    enum class Kind { empty, constant, product, explicit_config };
    Kind kind = Kind::empty;
    std::int64_t value = 0;
    double v = 0.0;
    std::optional<Configuration> config;
};

InitialCondition initial_from_json(const json& j, const std::filesystem::path& base_dir,
                                   const std::string& where);
Configuration make_initial(const InitialCondition& init, const Environment& env,
                           std::uint64_t seed);

json stat_report_to_json(const StatReport& rep);
json burke_report_to_json(const BurkeReport& rep);
json speed_report_to_json(const SpeedReport& rep);
json convergence_report_to_json(const ConvergenceReport& rep);
json domination_report_to_json(const DominationReport& rep);

// ---- file helpers ----------------------------------------------------------

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Shortest round-trip decimal form; deterministic across runs.
std::string format_double(double x);

// ---- CSV artifacts ---------------------------------------------------------

void write_snapshots_csv(const std::filesystem::path& path, const SimResult& result);
void write_departures_csv(const std::filesystem::path& path, const SimResult& result);
void write_currents_csv(const std::filesystem::path& path, const SimResult& result);
void write_discrepancies_csv(const std::filesystem::path& path, const CoupledResult& result);
void write_tag_path_csv(const std::filesystem::path& path, const TagPath& path_data);
void write_marginals_csv(const std::filesystem::path& path, const ConvergenceReport& rep);
void write_tv_csv(const std::filesystem::path& path, const ConvergenceReport& rep);
void write_trapped_csv(const std::filesystem::path& path, const ConvergenceReport& rep);
void write_speed_csv(const std::filesystem::path& path, const SpeedReport& rep);

}  // namespace zrp
