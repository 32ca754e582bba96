#pragma once

namespace cohortsim {

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0088;

/// Great-circle distance in kilometres (haversine).
double geodesic_km(LatLon a, LatLon b);

/// Point displaced from `origin` by the given north/east offsets, using a
/// local equirectangular approximation (accurate to well under 1% for the
/// few-kilometre offsets used when placing households in a ward).
LatLon offset_km(LatLon origin, double north_km, double east_km);

} // namespace cohortsim
