#pragma once

// Small hand-built inputs shared by the unit tests.

#include "cohortsim/cohorting.hpp"
#include "cohortsim/config.hpp"
#include "cohortsim/engine.hpp"
#include "cohortsim/rail_network.hpp"
#include "cohortsim/synthetic_city.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace fixtures {

using namespace cohortsim;

// Line 0 runs north through stations 0-4; line 1 branches east from station 2
// through 10 and 11.
inline const char* kTwoLineNetwork = R"(# two lines sharing station 2
[stations]
0, Alpha, 19.00, 72.85
1, Bravo, 19.02, 72.85
2, Charlie, 19.04, 72.85
3, Delta, 19.06, 72.85
4, Echo, 19.08, 72.85
10, Kilo, 19.04, 72.88
11, Lima, 19.04, 72.91
[lines]
0, 0 1 2 3 4
1, 2 10 11
[segment_times]
0, 2 3 4 5
1, 6 7
)";

inline RailNetwork two_line_network()
{
    std::istringstream in(kTwoLineNetwork);
    return precompute_routes(parse_network(in));
}

inline RailNetwork bundled_network()
{
    return precompute_routes(load_network(bundled_data_dir() / "mumbai_like_network.txt"));
}

// Twenty agents in five households of four over two wards (ward 0 dense).
// Workplace 0 has projects 0 and 1; workplace 1 has project 2; one school has
// classes 0 and 1. Agents 0, 1, 4, 5, 8 and 9 ride trains.
inline City twenty_agent_city()
{
    City city;
    city.wards.resize(2);
    city.wards[0] = {0, "dense", {19.02, 72.85}, 1.0, 0.5, DensityClass::high, {0.5, 0.5}};
    city.wards[1] = {1, "sparse", {19.06, 72.88}, 1.5, 0.5, DensityClass::other, {0.5, 0.5}};

    const int ages[20] = {34, 41, 9, 15, 29, 52, 12, 70, 45, 38, 8, 16, 33, 47, 13, 68, 56, 27, 81, 66};
    for (int i = 0; i < 20; ++i) {
        Agent a;
        a.id = i;
        a.age = static_cast<std::int16_t>(ages[i]);
        a.household = i / 4;
        a.ward = i < 8 ? 0 : 1;
        a.community_weight = 0.3 + 0.035 * i;
        city.agents.push_back(a);
    }
    for (int h = 0; h < 5; ++h) {
        Household hh;
        hh.id = h;
        hh.ward = h < 2 ? 0 : 1;
        hh.location = city.wards[static_cast<std::size_t>(hh.ward)].centroid;
        for (int k = 0; k < 4; ++k) hh.members.push_back(4 * h + k);
        city.households.push_back(hh);
    }

    const std::vector<std::vector<AgentId>> projects{{0, 4, 8}, {1, 5, 9}, {12, 13, 16, 17}};
    const SpaceId project_venue[3] = {0, 0, 1};
    city.workplaces = {{0, 0, {19.06, 72.85}, 6}, {1, 1, {19.04, 72.91}, 4}};
    for (SpaceId p = 0; p < 3; ++p) {
        city.projects.push_back({p, project_venue[p], projects[static_cast<std::size_t>(p)]});
        for (const AgentId m : projects[static_cast<std::size_t>(p)]) {
            city.agents[static_cast<std::size_t>(m)].workplace = project_venue[p];
            city.agents[static_cast<std::size_t>(m)].project = p;
        }
    }
    const std::vector<std::vector<AgentId>> classes{{2, 6, 10}, {3, 7, 11, 14}};
    city.schools = {{0, 1, {19.05, 72.87}, 7}};
    for (SpaceId c = 0; c < 2; ++c) {
        city.classes.push_back({c, 0, classes[static_cast<std::size_t>(c)]});
        for (const AgentId m : classes[static_cast<std::size_t>(c)]) {
            city.agents[static_cast<std::size_t>(m)].school = 0;
            city.agents[static_cast<std::size_t>(m)].school_class = c;
        }
    }
    const std::pair<AgentId, std::pair<StationId, StationId>> riders[] = {
        {0, {0, 4}}, {1, {0, 4}}, {4, {1, 3}}, {5, {0, 11}}, {8, {3, 0}}, {9, {10, 1}}};
    for (const auto& [agent, od] : riders) {
        auto& a = city.agents[static_cast<std::size_t>(agent)];
        a.commute = CommuteMode::train;
        a.origin_station = od.first;
        a.destination_station = od.second;
    }
    city.ward_population = {8, 12};
    return city;
}

// Deterministic, varied infection states for the twenty-agent city.
inline std::vector<AgentHealth> mixed_health(std::size_t n)
{
    const DiseaseState cycle[] = {DiseaseState::susceptible, DiseaseState::presymptomatic, DiseaseState::symptomatic,
                                  DiseaseState::exposed,     DiseaseState::asymptomatic,   DiseaseState::recovered,
                                  DiseaseState::susceptible};
    std::vector<AgentHealth> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].state = cycle[i % 7];
        out[i].infectiousness = static_cast<float>(0.25 + 0.17 * static_cast<double>(i % 5));
    }
    return out;
}

inline std::vector<Modulation> mixed_kappa(std::size_t n)
{
    std::vector<Modulation> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < kSpaceCount; ++s)
            out[i].k[s] = static_cast<float>(0.5 + 0.1 * static_cast<double>((i + 2 * s) % 6));
    }
    return out;
}

inline double rel_diff(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Scenario at desk scale for engine-level tests.
inline ScenarioConfig small_scenario(int horizon = 30)
{
    ScenarioConfig c;
    c.policy = PolicyTimeline::no_intervention();
    c.horizon_days = horizon;
    c.initial_exposed = 20;
    c.cohorting.cohort_size = 4;
    c.seed = 11;
    return c;
}

inline std::filesystem::path temp_path(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("cohortsim_test_" + name);
}

} // namespace fixtures
