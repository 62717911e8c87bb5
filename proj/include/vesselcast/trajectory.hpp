#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vesselcast/common.hpp"
#include "vesselcast/geo.hpp"

namespace vesselcast {

// Model feature order. Column indices are load-bearing: the forecaster's
// kinematic stream reads kLon..kCog and its physics stream kAcc..kBearingRate.
enum FeatureIndex : int {
  kLon = 0,
  kLat = 1,
  kSog = 2,          // m/s
  kCog = 3,          // degrees [0, 360)
  kAcc = 4,          // m/s^2
  kCogRate = 5,      // deg/s
  kJerk = 6,         // m/s^3
  kBearing = 7,      // degrees [0, 360)
  kBearingRate = 8,  // deg/s
};
inline constexpr int kFeatureCount = 9;

inline const std::array<const char*, kFeatureCount> kFeatureNames = {
    "lon", "lat", "sog", "cog", "acc", "cog_rate", "jerk", "bearing",
    "bearing_rate"};

// One resampled trajectory sample: timestamp plus the nine model features.
struct TrajectoryPoint {
  double t = 0.0;  // UTC seconds
  double x = 0.0;  // lon, degrees
  double y = 0.0;  // lat, degrees
  double v = 0.0;  // SOG, m/s
  double psi = 0.0;  // COG, degrees [0, 360)
  double a = 0.0;
  double psi_dot = 0.0;
  double j = 0.0;
  double beta = 0.0;
  double beta_dot = 0.0;

  double feature(int idx) const {
    switch (idx) {
      case kLon: return x;
      case kLat: return y;
      case kSog: return v;
      case kCog: return psi;
      case kAcc: return a;
      case kCogRate: return psi_dot;
      case kJerk: return j;
      case kBearing: return beta;
      case kBearingRate: return beta_dot;
      default: throw ShapeError("TrajectoryPoint: feature index out of range");
    }
  }

  geo::GeoPoint position() const { return {x, y}; }
};

// Fixed-interval voyage segment for one vessel. Consecutive samples are
// exactly interval_s apart.
struct TrajectorySegment {
  std::int64_t mmsi = 0;
  double interval_s = kSampleIntervalS;
  std::vector<TrajectoryPoint> points;

  double t_start() const { return points.empty() ? 0.0 : points.front().t; }
  double t_end() const { return points.empty() ? 0.0 : points.back().t; }
  double span_s() const { return points.empty() ? 0.0 : t_end() - t_start(); }
  std::size_t size() const { return points.size(); }
};

struct Dataset {
  double interval_s = kSampleIntervalS;
  std::vector<TrajectorySegment> segments;

  std::size_t total_points() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.points.size();
    return n;
  }
};

}  // namespace vesselcast
