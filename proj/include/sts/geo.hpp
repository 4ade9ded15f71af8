#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace sts {

// A point on the degree-space search plane. Comparison is exact numeric
// equality; distinct image records may legally share a coordinate.
struct Coordinate {
    double lat = 0.0;  // decimal degrees, [-90, 90]
    double lon = 0.0;  // decimal degrees, [-180, 180]

    friend bool operator==(const Coordinate& a, const Coordinate& b) {
        return a.lat == b.lat && a.lon == b.lon;
    }
    friend bool operator!=(const Coordinate& a, const Coordinate& b) {
        return !(a == b);
    }
};

inline bool is_valid(const Coordinate& c) {
    return std::isfinite(c.lat) && std::isfinite(c.lon) &&
           c.lat >= -90.0 && c.lat <= 90.0 &&
           c.lon >= -180.0 && c.lon <= 180.0;
}

inline Coordinate make_coordinate(double lat, double lon) {
    Coordinate c{lat, lon};
    if (!is_valid(c)) {
        throw std::invalid_argument("coordinate out of range: lat=" +
                                    std::to_string(lat) + " lon=" +
                                    std::to_string(lon));
    }
    return c;
}

// DegreeEuclidean is the reference metric: the neighbor threshold is quoted
// in raw degrees, with no correction for meridian convergence. HaversineKm
// takes thresholds in kilometers instead.
enum class DistanceMetric { DegreeEuclidean, HaversineKm };

inline constexpr double kEarthRadiusKm = 6371.0;

inline double degree_distance(const Coordinate& a, const Coordinate& b) {
    const double dlat = a.lat - b.lat;
    const double dlon = a.lon - b.lon;
    return std::sqrt(dlat * dlat + dlon * dlon);
}

inline double haversine_km(const Coordinate& a, const Coordinate& b) {
    constexpr double deg = 3.141592653589793238462643383279502884 / 180.0;
    const double phi1 = a.lat * deg;
    const double phi2 = b.lat * deg;
    const double dphi = (b.lat - a.lat) * deg;
    const double dlam = (b.lon - a.lon) * deg;
    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

inline double distance(DistanceMetric metric, const Coordinate& a,
                       const Coordinate& b) {
    return metric == DistanceMetric::DegreeEuclidean ? degree_distance(a, b)
                                                     : haversine_km(a, b);
}

inline std::string metric_name(DistanceMetric metric) {
    return metric == DistanceMetric::DegreeEuclidean ? "degree"
                                                     : "haversine-km";
}

inline DistanceMetric parse_metric(const std::string& name) {
    if (name == "degree") return DistanceMetric::DegreeEuclidean;
    if (name == "haversine-km") return DistanceMetric::HaversineKm;
    throw std::invalid_argument("unknown distance metric: " + name);
}

}  // namespace sts
