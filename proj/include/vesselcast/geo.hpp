#pragma once

#include <cmath>
#include <span>
#include <string>

#include "vesselcast/common.hpp"

namespace vesselcast::geo {

// Position in decimal degrees, lon in [-180, 180), lat in [-90, 90].
struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

struct EarthModel {
  double radius_m = kEarthRadiusM;
};

inline bool is_finite(const GeoPoint& p) {
  return std::isfinite(p.lon) && std::isfinite(p.lat);
}

// Wrap longitude into [-180, 180).
inline double wrap_lon(double lon) {
  double w = std::fmod(lon + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

// Wrap an angle in degrees into [0, 360).
inline double wrap_deg360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  // fmod of a tiny negative can round back up to 360.0 exactly
  if (w >= 360.0) w = 0.0;
  return w;
}

// Great-circle distance, haversine formulation:
//   d = 2R asin sqrt( sin^2(dlat/2) + cos(lat1) cos(lat2) sin^2(dlon/2) )
inline double haversine_distance(const GeoPoint& a, const GeoPoint& b,
                                 const EarthModel& earth = {}) {
  if (!is_finite(a) || !is_finite(b))
    throw InvalidInput("haversine_distance: non-finite coordinate");
  const double lat1 = deg2rad(a.lat), lat2 = deg2rad(b.lat);
  const double dlat = lat2 - lat1;
  const double dlon = deg2rad(b.lon - a.lon);
  const double sl = std::sin(0.5 * dlat);
  const double so = std::sin(0.5 * dlon);
  double h = sl * sl + std::cos(lat1) * std::cos(lat2) * so * so;
  if (h > 1.0) h = 1.0;  // guard rounding at antipodes
  return 2.0 * earth.radius_m * std::asin(std::sqrt(h));
}

struct Bearing {
  double degrees = 0.0;  // forward azimuth from north, clockwise, [0, 360)
  bool degenerate = false;  // coincident endpoints; degrees fixed to 0
};

// Initial great-circle bearing from one point toward another:
//   atan2( sin(dlon) cos(lat2), cos(lat1) sin(lat2) - sin(lat1) cos(lat2) cos(dlon) )
// Coincident points report 0 with the degenerate flag set so derivative
// chains over stationary jitter never abort.
inline Bearing initial_bearing(const GeoPoint& from, const GeoPoint& to) {
  if (!is_finite(from) || !is_finite(to))
    throw InvalidInput("initial_bearing: non-finite coordinate");
  if (from.lon == to.lon && from.lat == to.lat) return {0.0, true};
  const double lat1 = deg2rad(from.lat), lat2 = deg2rad(to.lat);
  const double dlon = deg2rad(to.lon - from.lon);
  const double y = std::sin(dlon) * std::cos(lat2);
  const double x = std::cos(lat1) * std::sin(lat2) -
                   std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
  return {wrap_deg360(rad2deg(std::atan2(y, x))), false};
}

// Signed smallest rotation from angle a to angle b, degrees in (-180, 180].
inline double angular_difference(double a_deg, double b_deg) {
  if (!std::isfinite(a_deg) || !std::isfinite(b_deg))
    throw InvalidInput("angular_difference: non-finite angle");
  double d = std::fmod(b_deg - a_deg, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

// Sum of successive haversine distances. A single point has length 0.
inline double path_length(std::span<const GeoPoint> points,
                          const EarthModel& earth = {}) {
  if (points.empty()) throw InvalidInput("path_length: empty point sequence");
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    total += haversine_distance(points[i - 1], points[i], earth);
  return total;
}

// Destination point after travelling `dist_m` on the initial bearing
// `bearing_deg` from `start` along a great circle.
inline GeoPoint destination_point(const GeoPoint& start, double bearing_deg,
                                  double dist_m, const EarthModel& earth = {}) {
  const double lat1 = deg2rad(start.lat);
  const double lon1 = deg2rad(start.lon);
  const double brg = deg2rad(bearing_deg);
  const double ad = dist_m / earth.radius_m;  // angular distance
  const double lat2 = std::asin(std::sin(lat1) * std::cos(ad) +
                                std::cos(lat1) * std::sin(ad) * std::cos(brg));
  const double lon2 =
      lon1 + std::atan2(std::sin(brg) * std::sin(ad) * std::cos(lat1),
                        std::cos(ad) - std::sin(lat1) * std::sin(lat2));
  return {wrap_lon(rad2deg(lon2)), rad2deg(lat2)};
}

// Equirectangular projection about a reference point; adequate for
// encounter-scale separations (tens of km). x east, y north, meters.
struct LocalFrame {
  GeoPoint origin;
  double radius_m = kEarthRadiusM;
  double cos_lat0 = 1.0;

  explicit LocalFrame(const GeoPoint& o, const EarthModel& earth = {})
      : origin(o), radius_m(earth.radius_m),
        cos_lat0(std::cos(deg2rad(o.lat))) {}

  struct Xy {
    double x = 0.0;
    double y = 0.0;
  };

  Xy to_local(const GeoPoint& p) const {
    return {radius_m * deg2rad(angular_difference(origin.lon, p.lon)) * cos_lat0,
            radius_m * deg2rad(p.lat - origin.lat)};
  }

  GeoPoint to_geo(const Xy& q) const {
    return {wrap_lon(origin.lon + rad2deg(q.x / (radius_m * cos_lat0))),
            origin.lat + rad2deg(q.y / radius_m)};
  }
};

// Commutative midpoint: swapping the arguments yields bit-identical output,
// which keeps pairwise computations built on a shared frame symmetric.
inline GeoPoint midpoint(const GeoPoint& a, const GeoPoint& b) {
  double lon = 0.5 * (a.lon + b.lon);
  if (std::abs(a.lon - b.lon) > 180.0) lon = wrap_lon(lon + 180.0);
  return {lon, 0.5 * (a.lat + b.lat)};
}

}  // namespace vesselcast::geo
