#pragma once

#include "cohortsim/calibration.hpp"
#include "cohortsim/engine.hpp"
#include "cohortsim/rail_network.hpp"
#include "cohortsim/synthetic_city.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cohortsim {

struct CitySpec {
    std::string preset = "mumbai_like";
    std::size_t population = 100000;
    std::uint64_t seed = 7;
    std::string network = "mumbai_like_network.txt";
    std::string snapshot; ///< optional saved city; generated from the preset when empty
};

/// Dated phase as written in a config file. Unset fields inherit from the
/// previous phase (the first phase inherits from an open city).
struct PhaseSpec {
    std::string from; ///< YYYY-MM-DD, or a day offset such as "0"
    PolicyPhase values;
};

struct Config {
    CitySpec city;
    ScenarioConfig scenario;
    std::string policy_preset = "mumbai_2020"; ///< none, mumbai_2020 or custom
    std::vector<PhaseSpec> phases;             ///< used when the preset is custom
    CalibrationOptions calibration;
    std::string calibration_target = "india_fatalities_2020.csv";
    int calibration_horizon_days = 90;
    std::filesystem::path base_dir; ///< directory of the main config file, for relative paths

    /// Rebuilds scenario.policy from the preset or phase list.
    void resolve_policy();
    void validate() const;
};

/// A single `key=value` override. Keys are `section.field` or one of the
/// short aliases (cohort_size, crowding, beta_coach, isolation,
/// coach_strategy, one_off_ratio, station_detection, horizon, seed,
/// population, runs).
struct Override {
    std::string key;
    std::string value;
};

Override parse_override(const std::string& text);
/// Maps an alias onto its dotted key; dotted keys pass through. Throws
/// ValidationError for keys the schema does not know.
std::string canonical_key(const std::string& key);
std::vector<std::string> known_keys();

Config default_config();
Config parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);
/// Applies another file on top: only the keys it mentions change.
void apply_overlay(Config& config, const std::filesystem::path& path);
void apply_overlay_text(Config& config, const std::string& yaml_text);
/// Throws ValidationError on unknown keys, malformed values or out-of-range values.
void apply_overrides(Config& config, const std::vector<Override>& overrides);
std::string to_yaml(const Config& config);

/// Locates a data file: absolute, then relative to the config directory, then
/// the bundled data directory.
std::filesystem::path resolve_data_path(const Config& config, const std::string& name);
std::filesystem::path bundled_data_dir();

RailNetwork load_config_network(const Config& config);
City build_city(const Config& config, const RailNetwork& network);

} // namespace cohortsim
