#pragma once

#include "cohortsim/rng.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace cohortsim {

inline constexpr int kStepsPerDay = 4;

enum class DiseaseState : std::uint8_t {
    susceptible,
    exposed,
    presymptomatic,
    asymptomatic,
    symptomatic,
    hospitalised,
    critical,
    deceased,
    recovered,
};

inline constexpr std::size_t kDiseaseStateCount = 9;

std::string_view to_string(DiseaseState s);

/// Infective flag I(t): presymptomatic, asymptomatic and symptomatic agents
/// shed; hospitalised and critical agents are out of circulation.
constexpr bool is_infective(DiseaseState s)
{
    return s == DiseaseState::presymptomatic || s == DiseaseState::asymptomatic || s == DiseaseState::symptomatic;
}

constexpr bool is_absorbing(DiseaseState s) { return s == DiseaseState::deceased || s == DiseaseState::recovered; }

inline constexpr std::size_t kAgeBands = 9; ///< 0-9, 10-19, ..., 70-79, 80+

/// Age-stratified progression parameters. The default table is a documented
/// placeholder in 10-year bands; replace it from config for real studies.
struct ProgressionParams {
    std::array<double, kAgeBands> p_hospitalise{}; ///< symptomatic -> hospitalised
    std::array<double, kAgeBands> p_critical{};    ///< hospitalised -> critical
    std::array<double, kAgeBands> p_death{};       ///< critical -> deceased
    double asymptomatic_fraction = 0.33;

    // Mean residence times in days; durations are exponential around these.
    double mean_exposed_days = 3.5;
    double mean_presymptomatic_days = 1.0;
    double mean_asymptomatic_days = 5.0;
    double mean_symptomatic_days = 5.0;
    double mean_hospitalised_days = 8.0;
    double mean_critical_days = 8.0;

    double infectiousness_shape = 0.25;
    double infectiousness_scale = 4.0;
    double severity_probability = 0.5;

    static ProgressionParams defaults();
    static std::size_t band(int age);
    void validate() const;
};

struct AgentHealth {
    DiseaseState state = DiseaseState::susceptible;
    bool severe = false;           ///< C_n
    float infectiousness = 0.0f;   ///< rho_n, sampled at exposure
    std::int32_t entered_step = 0; ///< timestep the current state began
    std::int32_t next_step = 0;    ///< scheduled transition; ignored in absorbing / susceptible states
};

/// Moves a susceptible agent to exposed at `now`, drawing rho ~ Gamma(shape,
/// scale) and the severity flag, and schedules the end of the latent period.
void expose(AgentHealth& health, const ProgressionParams& params, Rng& rng, int now);

/// Advances along exposed -> presymptomatic -> {asymptomatic | symptomatic}
/// -> {recovered | hospitalised} -> {recovered | critical} -> {recovered |
/// deceased} once the scheduled step is reached. Susceptible, deceased and
/// recovered agents are returned unchanged.
AgentHealth advance_health(AgentHealth health, int age, const ProgressionParams& params, Rng& rng, int now);

/// Exponential duration in whole timesteps, at least one.
int sample_duration_steps(double mean_days, Rng& rng);

} // namespace cohortsim
