#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselcast/common.hpp"
#include "vesselcast/geo.hpp"
#include "vesselcast/model.hpp"
#include "vesselcast/parallel.hpp"
#include "vesselcast/trajectory.hpp"

namespace vesselcast::scene {

// One vessel's history resampled onto the shared anchor grid: points at
// anchor_t - (n-1)*dt ... anchor_t.
struct AlignedHistory {
  std::int64_t mmsi = 0;
  std::vector<TrajectoryPoint> points;

  geo::GeoPoint position_at_anchor() const {
    return points.back().position();
  }
};

// All vessels time-aligned to a common anchor instant.
struct FleetSnapshot {
  double anchor_t = 0.0;
  double interval_s = kSampleIntervalS;
  std::vector<AlignedHistory> vessels;  // sorted by mmsi

  const AlignedHistory* find(std::int64_t mmsi) const {
    for (const auto& v : vessels)
      if (v.mmsi == mmsi) return &v;
    return nullptr;
  }
};

namespace detail {

inline double lerp(double a, double b, double s) { return a + (b - a) * s; }

// Linear interpolation of one segment at time t; the segment grid is uniform
// so the bracketing index is direct.
inline std::optional<TrajectoryPoint> sample_segment(const TrajectorySegment& seg,
                                                     double t) {
  if (seg.points.empty() || t < seg.t_start() - 1e-9 || t > seg.t_end() + 1e-9)
    return std::nullopt;
  const double pos = (t - seg.t_start()) / seg.interval_s;
  const auto lo = static_cast<std::size_t>(std::clamp(
      std::floor(pos), 0.0, static_cast<double>(seg.points.size() - 1)));
  const auto hi = std::min(lo + 1, seg.points.size() - 1);
  const double s = std::clamp(pos - static_cast<double>(lo), 0.0, 1.0);
  const auto& a = seg.points[lo];
  const auto& b = seg.points[hi];
  TrajectoryPoint p;
  p.t = t;
  p.x = geo::wrap_lon(a.x + geo::angular_difference(a.x, b.x) * s);
  p.y = lerp(a.y, b.y, s);
  p.v = lerp(a.v, b.v, s);
  p.psi = geo::wrap_deg360(a.psi + geo::angular_difference(a.psi, b.psi) * s);
  p.a = lerp(a.a, b.a, s);
  p.psi_dot = lerp(a.psi_dot, b.psi_dot, s);
  p.j = lerp(a.j, b.j, s);
  p.beta = geo::wrap_deg360(a.beta + geo::angular_difference(a.beta, b.beta) * s);
  p.beta_dot = lerp(a.beta_dot, b.beta_dot, s);
  return p;
}

}  // namespace detail

// Builds the snapshot from a dataset: each vessel with a segment covering
// [anchor_t - (history_steps-1)*dt, anchor_t] contributes an aligned history
// on the anchor grid. Vessels with several covering segments use the first.
inline FleetSnapshot build_snapshot(const Dataset& ds, double anchor_t,
                                    std::size_t history_steps) {
  FleetSnapshot snap;
  snap.anchor_t = anchor_t;
  snap.interval_s = ds.interval_s;
  std::map<std::int64_t, AlignedHistory> per_vessel;
  for (const auto& seg : ds.segments) {
    if (per_vessel.count(seg.mmsi)) continue;
    const double t_first =
        anchor_t - static_cast<double>(history_steps - 1) * ds.interval_s;
    if (seg.t_start() > t_first + 1e-9 || seg.t_end() < anchor_t - 1e-9) continue;
    AlignedHistory hist;
    hist.mmsi = seg.mmsi;
    bool complete = true;
    for (std::size_t k = 0; k < history_steps; ++k) {
      const double t = t_first + static_cast<double>(k) * ds.interval_s;
      auto p = detail::sample_segment(seg, t);
      if (!p) {
        complete = false;
        break;
      }
      hist.points.push_back(*p);
    }
    if (complete) per_vessel.emplace(seg.mmsi, std::move(hist));
  }
  for (auto& [mmsi, hist] : per_vessel) snap.vessels.push_back(std::move(hist));
  return snap;
}

// Buffer radius: twice the distance traveled over the trailing lookback_s
// seconds of the history.
struct RadiusOutcome {
  bool ok = false;
  std::string reason;
  double radius_m = 0.0;
};

inline RadiusOutcome buffer_radius(const AlignedHistory& target,
                                   double lookback_s,
                                   const geo::EarthModel& earth = {}) {
  RadiusOutcome out;
  if (target.points.empty()) {
    out.reason = "empty-history";
    return out;
  }
  const double t_anchor = target.points.back().t;
  const double t_from = t_anchor - lookback_s;
  if (target.points.front().t > t_from + 1e-9) {
    out.reason = "insufficient-history";
    return out;
  }
  std::vector<geo::GeoPoint> trail;
  for (const auto& p : target.points)
    if (p.t >= t_from - 1e-9) trail.push_back(p.position());
  out.ok = true;
  out.radius_m = 2.0 * geo::path_length(trail, earth);
  return out;
}

struct NeighborScan {
  std::vector<std::int64_t> neighbors;          // qualifying, sorted by mmsi
  std::vector<std::int64_t> excluded_short;     // in radius, too little history
};

// All vessels other than the target whose anchor-time distance is within the
// radius (inclusive). Vessels inside the radius but without w_in aligned
// steps are reported separately.
inline NeighborScan find_neighbors(const FleetSnapshot& snap, std::int64_t target,
                                   double radius_m, std::size_t w_in,
                                   const geo::EarthModel& earth = {}) {
  const auto* t = snap.find(target);
  if (!t) throw InvalidInput("find_neighbors: target not in snapshot");
  NeighborScan out;
  const auto t_pos = t->position_at_anchor();
  for (const auto& v : snap.vessels) {
    if (v.mmsi == target) continue;
    const double d = geo::haversine_distance(v.position_at_anchor(), t_pos, earth);
    if (d > radius_m) continue;
    if (v.points.size() >= w_in)
      out.neighbors.push_back(v.mmsi);
    else
      out.excluded_short.push_back(v.mmsi);
  }
  return out;
}

struct VesselForecast {
  std::int64_t mmsi = 0;
  bool ok = false;
  std::string error;
  std::vector<TimedPosition> points;
};

struct Scene {
  double anchor_t = 0.0;
  std::int64_t target_mmsi = 0;
  double buffer_radius_m = 0.0;
  std::vector<AlignedHistory> vessels;  // target first, then neighbors by mmsi
  std::vector<VesselForecast> forecasts;  // parallel to vessels once predicted
  bool partial = false;  // any per-vessel prediction failure
};

// Assembles the scene for a target: computes the buffer radius over the
// trailing lookback window, scans neighbors, and collects the aligned
// observation windows (w_in trailing steps per vessel).
inline Scene build_scene(const FleetSnapshot& snap, std::int64_t target,
                         double lookback_s, std::size_t w_in,
                         const geo::EarthModel& earth = {}) {
  const auto* t = snap.find(target);
  if (!t) throw InvalidInput("build_scene: target not in snapshot");
  if (t->points.size() < w_in)
    throw InvalidInput("build_scene: target history shorter than the window");
  auto radius = buffer_radius(*t, lookback_s, earth);
  if (!radius.ok) throw InvalidInput("build_scene: " + radius.reason);

  Scene scene;
  scene.anchor_t = snap.anchor_t;
  scene.target_mmsi = target;
  scene.buffer_radius_m = radius.radius_m;

  auto tail = [&](const AlignedHistory& h) {
    AlignedHistory out;
    out.mmsi = h.mmsi;
    out.points.assign(h.points.end() - static_cast<std::ptrdiff_t>(w_in),
                      h.points.end());
    return out;
  };
  scene.vessels.push_back(tail(*t));
  auto scan = find_neighbors(snap, target, radius.radius_m, w_in, earth);
  for (auto mmsi : scan.neighbors) scene.vessels.push_back(tail(*snap.find(mmsi)));
  return scene;
}

// Predicts every vessel in the scene concurrently. Results are stored in
// per-vessel slots and merged in vessel order, so the output is identical
// for any worker count; the model weights are shared read-only.
template <typename T>
Scene predict_scene(Scene scene, const ForecastModel<T>& model,
                    unsigned workers = 1) {
  scene.forecasts.assign(scene.vessels.size(), {});
  parallel_for(scene.vessels.size(), workers, [&](std::size_t i) {
    VesselForecast& out = scene.forecasts[i];
    out.mmsi = scene.vessels[i].mmsi;
    try {
      auto res = model.predict_trajectory(scene.vessels[i].points);
      if (!res.ok) {
        out.error = res.reason;
        return;
      }
      out.ok = true;
      out.points = std::move(res.points);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });
  scene.partial = false;
  for (const auto& f : scene.forecasts) scene.partial |= !f.ok;
  return scene;
}

// GeoJSON feature collection: one LineString per history and one per
// prediction, tagged with the vessel role.
inline nlohmann::json scene_geojson(const Scene& scene) {
  nlohmann::json features = nlohmann::json::array();
  auto line = [](const auto& pts, auto&& coord) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& p : pts) coords.push_back(coord(p));
    return coords;
  };
  for (std::size_t i = 0; i < scene.vessels.size(); ++i) {
    const auto& v = scene.vessels[i];
    const std::string role = v.mmsi == scene.target_mmsi ? "target" : "neighbor";
    features.push_back(
        {{"type", "Feature"},
         {"properties",
          {{"mmsi", v.mmsi}, {"role", role}, {"kind", "history"}}},
         {"geometry",
          {{"type", "LineString"},
           {"coordinates", line(v.points, [](const TrajectoryPoint& p) {
              return nlohmann::json::array({p.x, p.y});
            })}}}});
    if (i < scene.forecasts.size() && scene.forecasts[i].ok)
      features.push_back(
          {{"type", "Feature"},
           {"properties",
            {{"mmsi", v.mmsi}, {"role", role}, {"kind", "prediction"}}},
           {"geometry",
            {{"type", "LineString"},
             {"coordinates",
              line(scene.forecasts[i].points, [](const TimedPosition& p) {
                return nlohmann::json::array({p.position.lon, p.position.lat});
              })}}}});
  }
  return {{"type", "FeatureCollection"},
          {"properties",
           {{"anchor_t", scene.anchor_t},
            {"target", scene.target_mmsi},
            {"buffer_radius_m", scene.buffer_radius_m}}},
          {"features", features}};
}

}  // namespace vesselcast::scene
