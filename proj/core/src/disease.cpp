#include "cohortsim/disease.hpp"

#include "cohortsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cohortsim {

std::string_view to_string(DiseaseState s)
{
    switch (s) {
    case DiseaseState::susceptible: return "susceptible";
    case DiseaseState::exposed: return "exposed";
    case DiseaseState::presymptomatic: return "presymptomatic";
    case DiseaseState::asymptomatic: return "asymptomatic";
    case DiseaseState::symptomatic: return "symptomatic";
    case DiseaseState::hospitalised: return "hospitalised";
    case DiseaseState::critical: return "critical";
    case DiseaseState::deceased: return "deceased";
    case DiseaseState::recovered: return "recovered";
    }
    return "unknown";
}

ProgressionParams ProgressionParams::defaults()
{
    ProgressionParams p;
    // Placeholder severity profile rising steeply with age.
    p.p_hospitalise = {0.001, 0.003, 0.012, 0.032, 0.049, 0.102, 0.166, 0.243, 0.273};
    p.p_critical = {0.050, 0.050, 0.050, 0.050, 0.063, 0.122, 0.274, 0.432, 0.709};
    p.p_death = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    return p;
}

std::size_t ProgressionParams::band(int age)
{
    return static_cast<std::size_t>(std::clamp(age / 10, 0, static_cast<int>(kAgeBands) - 1));
}

void ProgressionParams::validate() const
{
    const auto probability = [](double v) { return v >= 0.0 && v <= 1.0; };
    for (std::size_t b = 0; b < kAgeBands; ++b) {
        if (!probability(p_hospitalise[b]) || !probability(p_critical[b]) || !probability(p_death[b]))
            throw ValidationError("progression probability outside [0,1] in age band " + std::to_string(b));
    }
    if (!probability(asymptomatic_fraction)) throw ValidationError("asymptomatic fraction outside [0,1]");
    if (!probability(severity_probability)) throw ValidationError("severity probability outside [0,1]");
    for (const double d : {mean_exposed_days, mean_presymptomatic_days, mean_asymptomatic_days, mean_symptomatic_days,
                           mean_hospitalised_days, mean_critical_days}) {
        if (!(d > 0.0)) throw ValidationError("state durations must be positive");
    }
    if (!(infectiousness_shape > 0.0) || !(infectiousness_scale > 0.0))
        throw ValidationError("infectiousness gamma parameters must be positive");
}

int sample_duration_steps(double mean_days, Rng& rng)
{
    const double days = std::exponential_distribution<double>(1.0 / mean_days)(rng);
    return std::max(1, static_cast<int>(std::ceil(days * kStepsPerDay)));
}

void expose(AgentHealth& health, const ProgressionParams& params, Rng& rng, int now)
{
    health.state = DiseaseState::exposed;
    health.infectiousness = static_cast<float>(
        std::gamma_distribution<double>(params.infectiousness_shape, params.infectiousness_scale)(rng));
    health.severe = bernoulli(rng, params.severity_probability);
    health.entered_step = now;
    health.next_step = now + sample_duration_steps(params.mean_exposed_days, rng);
}

AgentHealth advance_health(AgentHealth health, int age, const ProgressionParams& params, Rng& rng, int now)
{
    if (health.state == DiseaseState::susceptible || is_absorbing(health.state) || now < health.next_step)
        return health;

    const auto band = ProgressionParams::band(age);
    auto enter = [&](DiseaseState next, double mean_days) {
        health.state = next;
        health.entered_step = now;
        health.next_step = now + (is_absorbing(next) ? 0 : sample_duration_steps(mean_days, rng));
    };
    switch (health.state) {
    case DiseaseState::exposed: enter(DiseaseState::presymptomatic, params.mean_presymptomatic_days); break;
    case DiseaseState::presymptomatic:
        if (bernoulli(rng, params.asymptomatic_fraction))
            enter(DiseaseState::asymptomatic, params.mean_asymptomatic_days);
        else
            enter(DiseaseState::symptomatic, params.mean_symptomatic_days);
        break;
    case DiseaseState::asymptomatic: enter(DiseaseState::recovered, 0.0); break;
    case DiseaseState::symptomatic:
        if (bernoulli(rng, params.p_hospitalise[band]))
            enter(DiseaseState::hospitalised, params.mean_hospitalised_days);
        else
            enter(DiseaseState::recovered, 0.0);
        break;
    case DiseaseState::hospitalised:
        if (bernoulli(rng, params.p_critical[band]))
            enter(DiseaseState::critical, params.mean_critical_days);
        else
            enter(DiseaseState::recovered, 0.0);
        break;
    case DiseaseState::critical:
        if (bernoulli(rng, params.p_death[band]))
            enter(DiseaseState::deceased, 0.0);
        else
            enter(DiseaseState::recovered, 0.0);
        break;
    default: break;
    }
    return health;
}

} // namespace cohortsim
