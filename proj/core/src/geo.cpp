#include "cohortsim/geo.hpp"

#include <cmath>
#include <numbers>

namespace cohortsim {

namespace {
constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
} // namespace

double geodesic_km(LatLon a, LatLon b)
{
    const double dlat = deg2rad(b.lat - a.lat);
    const double dlon = deg2rad(b.lon - a.lon);
    const double s = std::sin(dlat / 2);
    const double t = std::sin(dlon / 2);
    const double h = s * s + std::cos(deg2rad(a.lat)) * std::cos(deg2rad(b.lat)) * t * t;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

LatLon offset_km(LatLon origin, double north_km, double east_km)
{
    const double dlat = north_km / kEarthRadiusKm * 180.0 / std::numbers::pi;
    const double dlon = east_km / (kEarthRadiusKm * std::cos(deg2rad(origin.lat))) * 180.0 / std::numbers::pi;
    return {origin.lat + dlat, origin.lon + dlon};
}

} // namespace cohortsim
