#include "cohortsim/synthetic_city.hpp"

#include <array>
#include <cmath>

namespace cohortsim {

namespace {

struct WardSeed {
    const char* name;
    double lat;
    double lon;
    double radius_km;
    double residents_2011; // thousands
    bool high_density;
    double jobs; // relative employment attractiveness
};

// 24 municipal wards as disks along the rail corridors. Resident counts follow
// the 2011 ward totals (thousands); job weights favour the island-city business
// districts, BKC and Andheri East.
constexpr std::array<WardSeed, 24> kWards{{
    {"A", 18.9375, 72.8314, 1.6, 185, false, 12.0},
    {"B", 18.9550, 72.8360, 0.8, 127, false, 3.0},
    {"C", 18.9480, 72.8210, 0.8, 166, false, 3.5},
    {"D", 18.9620, 72.8140, 1.3, 346, false, 3.5},
    {"E", 18.9750, 72.8330, 1.2, 393, false, 3.0},
    {"F/S", 19.0020, 72.8355, 1.2, 360, false, 4.0},
    {"F/N", 19.0300, 72.8580, 1.6, 529, false, 2.0},
    {"G/S", 18.9950, 72.8260, 1.4, 377, false, 9.0},
    {"G/N", 19.0300, 72.8430, 1.3, 599, true, 3.0},
    {"H/E", 19.0580, 72.8440, 1.5, 557, true, 8.0},
    {"H/W", 19.0650, 72.8370, 1.3, 307, false, 2.5},
    {"K/E", 19.1180, 72.8520, 1.9, 823, true, 7.0},
    {"K/W", 19.1280, 72.8440, 1.8, 748, false, 3.0},
    {"P/S", 19.1630, 72.8500, 1.4, 463, false, 2.5},
    {"P/N", 19.1900, 72.8480, 1.8, 941, true, 2.0},
    {"R/S", 19.2050, 72.8550, 1.4, 691, false, 1.5},
    {"R/C", 19.2300, 72.8580, 1.5, 562, false, 1.5},
    {"R/N", 19.2520, 72.8600, 1.2, 431, false, 1.0},
    {"L", 19.0680, 72.8830, 1.5, 902, true, 3.0},
    {"M/E", 19.0520, 72.9230, 1.8, 807, true, 1.0},
    {"M/W", 19.0600, 72.9000, 1.3, 412, false, 1.5},
    {"N", 19.0900, 72.9100, 1.6, 622, true, 2.0},
    {"S", 19.1300, 72.9320, 1.9, 743, true, 2.0},
    {"T", 19.1700, 72.9550, 1.4, 341, false, 1.5},
}};

constexpr double kCommuteLengthKm = 40.0; // gravity-model distance decay
constexpr double kHomeWardRetention = 0.02;
// Residents cluster along the rail corridors, so the modelled disk is tighter
// than the administrative ward.
constexpr double kRadiusScale = 0.35;

} // namespace

CityConfig mumbai_like_city_config(std::size_t population, std::uint64_t seed)
{
    CityConfig c;
    c.population = population;
    c.seed = seed;
    c.age_distribution = {
        {0, 4, 0.070},   {5, 9, 0.070},   {10, 14, 0.075}, {15, 19, 0.085}, {20, 24, 0.100}, {25, 29, 0.105},
        {30, 34, 0.090}, {35, 39, 0.085}, {40, 44, 0.070}, {45, 49, 0.060}, {50, 54, 0.050}, {55, 59, 0.040},
        {60, 64, 0.030}, {65, 69, 0.025}, {70, 74, 0.020}, {75, 79, 0.010}, {80, 99, 0.015},
    };
    c.household_size_distribution = {0.07, 0.12, 0.17, 0.27, 0.19, 0.09, 0.05, 0.04};
    c.unemployment_ratio = 0.15;
    c.school_sizes = {{100, 300, 0.4}, {301, 800, 0.4}, {801, 1500, 0.2}};
    c.workplace_sizes = {{1, 9, 0.50}, {10, 49, 0.30}, {50, 199, 0.15}, {200, 500, 0.05}};

    double total_residents = 0.0;
    for (const auto& w : kWards) total_residents += w.residents_2011;

    for (std::size_t i = 0; i < kWards.size(); ++i) {
        const auto& s = kWards[i];
        Ward w;
        w.id = static_cast<WardId>(i);
        w.name = s.name;
        w.centroid = {s.lat, s.lon};
        w.radius_km = s.radius_km * kRadiusScale;
        w.population_share = s.residents_2011 / total_residents;
        w.density = s.high_density ? DensityClass::high : DensityClass::other;
        c.wards.push_back(std::move(w));
    }
    // Gravity model: P(work ward | home ward) ~ jobs * exp(-d / L), plus a
    // fixed share of residents who work in their own ward.
    for (std::size_t h = 0; h < kWards.size(); ++h) {
        std::vector<double> row(kWards.size(), 0.0);
        double sum = 0.0;
        for (std::size_t w = 0; w < kWards.size(); ++w) {
            const double d = geodesic_km(c.wards[h].centroid, c.wards[w].centroid);
            row[w] = kWards[w].jobs * std::exp(-d / kCommuteLengthKm);
            sum += row[w];
        }
        for (std::size_t w = 0; w < kWards.size(); ++w) row[w] = (1.0 - kHomeWardRetention) * row[w] / sum;
        row[h] += kHomeWardRetention;
        // Exact renormalisation against rounding.
        double total = 0.0;
        for (const double v : row) total += v;
        for (double& v : row) v /= total;
        c.wards[h].outflow = std::move(row);
    }
    // Shares must sum to one exactly enough for validation.
    double share_sum = 0.0;
    for (const auto& w : c.wards) share_sum += w.population_share;
    for (auto& w : c.wards) w.population_share /= share_sum;
    return c;
}

} // namespace cohortsim
