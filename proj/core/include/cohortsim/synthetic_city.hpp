#pragma once

#include "cohortsim/geo.hpp"
#include "cohortsim/rail_network.hpp"
#include "cohortsim/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cohortsim {

using AgentId = std::int32_t;
using WardId = std::int32_t;
using SpaceId = std::int32_t; ///< index into one of the City space tables; -1 means none

inline constexpr SpaceId kNone = -1;

enum class CommuteMode : std::uint8_t { none, road, train };
enum class DensityClass : std::uint8_t { high, other };

struct Ward {
    WardId id = 0;
    std::string name;
    LatLon centroid;
    double radius_km = 1.0; ///< wards are modelled as disks around the centroid
    double population_share = 0.0;
    DensityClass density = DensityClass::other;
    std::vector<double> outflow; ///< probability of working in each ward, indexed like CityConfig::wards
};

struct AgeBand {
    int min_age = 0;
    int max_age = 0; ///< inclusive
    double share = 0.0;
};

struct SizeBin {
    int min_size = 1;
    int max_size = 1; ///< inclusive; a size is drawn uniformly inside the bin
    double share = 0.0;
};

struct CityConfig {
    std::size_t population = 0;
    std::vector<AgeBand> age_distribution;
    std::vector<double> household_size_distribution; ///< entry k is the share of households of size k+1
    double unemployment_ratio = 0.0;
    int school_age_min = 5;
    int school_age_max = 17;
    int working_age_min = 20;
    int working_age_max = 64;
    std::vector<SizeBin> school_sizes;
    std::vector<SizeBin> workplace_sizes;
    int class_size = 40;
    int project_size_min = 3;
    int project_size_max = 10;
    std::vector<Ward> wards;
    double road_speed_kmh = 21.6;
    double detour_index = 1.7;
    double walking_speed_kmh = 4.8;
    int candidate_station_count = 3;
    double kernel_a_km = 2.709;
    double kernel_b = 1.279;
    std::uint64_t seed = 1;

    /// Throws ValidationError on unnormalized distributions or inconsistent tables.
    void validate() const;
};

struct Household {
    SpaceId id = 0;
    WardId ward = 0;
    LatLon location;
    std::vector<AgentId> members;
};

/// A workplace or a school; `groups` are its project teams or classes.
struct Venue {
    SpaceId id = 0;
    WardId ward = 0;
    LatLon location;
    std::int32_t size = 0;
};

/// Project team (inside a workplace) or class (inside a school).
struct Subgroup {
    SpaceId id = 0;
    SpaceId venue = 0;
    std::vector<AgentId> members;
};

struct Agent {
    AgentId id = 0;
    std::int16_t age = 0;
    WardId ward = 0;
    SpaceId household = kNone;
    SpaceId workplace = kNone;
    SpaceId project = kNone;
    SpaceId school = kNone;
    SpaceId school_class = kNone;
    CommuteMode commute = CommuteMode::none;
    StationId origin_station = -1;
    StationId destination_station = -1;
    double community_weight = 1.0; ///< distance kernel of home to ward centroid
    double commute_km = 0.0;       ///< geodesic home-to-work distance, 0 for non-workers

    bool is_worker() const { return workplace != kNone; }
    bool is_student() const { return school != kNone; }
};

struct City {
    std::vector<Ward> wards;
    std::vector<Agent> agents;
    std::vector<Household> households;
    std::vector<Venue> workplaces;
    std::vector<Subgroup> projects;
    std::vector<Venue> schools;
    std::vector<Subgroup> classes;
    std::vector<std::int32_t> ward_population;

    std::size_t population() const { return agents.size(); }
    std::size_t train_commuters() const;
    double train_share() const;
};

struct CommuteChoice {
    CommuteMode mode = CommuteMode::road;
    StationId origin = -1;
    StationId destination = -1;
    double road_minutes = 0.0;
    std::optional<double> train_minutes; ///< best door-to-door train time, if any route exists
};

/// Door-to-door time comparison between road and rail. Road time is the
/// geodesic stretched by the detour index at road speed; rail time is the best
/// combination of walking access, the precomputed route, and walking egress
/// over the k nearest stations at each end.
CommuteChoice choose_commute_mode(LatLon home, LatLon work, const RailNetwork& network, const CityConfig& config);

/// k stations nearest to `p` by geodesic distance, nearest first.
std::vector<StationId> nearest_stations(const RailNetwork& network, LatLon p, int k);

double distance_kernel(double distance_km, double a_km, double b);

/// Builds the whole population. Pure function of (config, network): the
/// random stream is derived from config.seed.
City generate_city(const CityConfig& config, const RailNetwork& network);

/// Versioned binary snapshot so that sweeps reuse one generated city.
void save_city(const City& city, const std::filesystem::path& path);
City load_city(const std::filesystem::path& path);
void write_city(std::ostream& out, const City& city);
City read_city(std::istream& in);

/// Mumbai-like ward table and demographics; population is set by the caller.
CityConfig mumbai_like_city_config(std::size_t population, std::uint64_t seed = 1);

} // namespace cohortsim
