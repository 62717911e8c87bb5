#pragma once

#include <span>
#include <vector>

#include "vesselcast/geo.hpp"
#include "vesselcast/model.hpp"
#include "vesselcast/trajectory.hpp"

namespace vesselcast::baselines {

// Reference predictors evaluated alongside the trained model. Both read only
// the observed window and emit the same horizon grid as the forecaster.

// Repeats the last observed position.
inline std::vector<TimedPosition> constant_position(
    std::span<const TrajectoryPoint> window, std::int64_t horizon,
    double interval_s = kSampleIntervalS) {
  if (window.empty()) throw InvalidInput("constant_position: empty window");
  const auto& last = window.back();
  std::vector<TimedPosition> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t k = 1; k <= horizon; ++k)
    out.push_back({last.t + static_cast<double>(k) * interval_s, last.position()});
  return out;
}

// Dead reckoning: holds the last SOG and COG and advances along the
// great circle.
inline std::vector<TimedPosition> constant_velocity(
    std::span<const TrajectoryPoint> window, std::int64_t horizon,
    double interval_s = kSampleIntervalS,
    const geo::EarthModel& earth = {}) {
  if (window.empty()) throw InvalidInput("constant_velocity: empty window");
  const auto& last = window.back();
  std::vector<TimedPosition> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const double dist = last.v * static_cast<double>(k) * interval_s;
    out.push_back({last.t + static_cast<double>(k) * interval_s,
                   geo::destination_point(last.position(), last.psi, dist, earth)});
  }
  return out;
}

}  // namespace vesselcast::baselines
