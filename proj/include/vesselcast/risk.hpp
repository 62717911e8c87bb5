#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselcast/common.hpp"
#include "vesselcast/geo.hpp"
#include "vesselcast/model.hpp"
#include "vesselcast/scene.hpp"

namespace vesselcast::risk {

enum class CpaMethod { kTrajectoryScan, kConstantVelocity };

inline const char* to_string(CpaMethod m) {
  return m == CpaMethod::kTrajectoryScan ? "trajectory-scan" : "constant-velocity";
}

struct CpaResult {
  std::int64_t mmsi_a = 0;
  std::int64_t mmsi_b = 0;
  double dcpa_m = 0.0;
  double tcpa_s = 0.0;  // seconds from the anchor instant
  CpaMethod method = CpaMethod::kTrajectoryScan;
  bool flagged = false;
};

struct RiskConfig {
  double d_safe_m = 500.0;
  CpaMethod method = CpaMethod::kTrajectoryScan;
  bool substep_refine = true;  // refine between samples along linear chords

  void validate() const {
    if (d_safe_m <= 0.0) throw ConfigError("RiskConfig: d_safe_m must be > 0");
  }
};

namespace detail {

// Closest approach of two linearly moving points on a local tangent plane.
// Returns (tau in [0, dt], distance at tau) for positions pa0->pa1, pb0->pb1
// traversed over dt seconds.
inline std::pair<double, double> segment_cpa(const geo::GeoPoint& pa0,
                                             const geo::GeoPoint& pa1,
                                             const geo::GeoPoint& pb0,
                                             const geo::GeoPoint& pb1, double dt,
                                             const geo::EarthModel& earth) {
  const geo::LocalFrame frame(geo::midpoint(pa0, pb0), earth);
  const auto a0 = frame.to_local(pa0);
  const auto a1 = frame.to_local(pa1);
  const auto b0 = frame.to_local(pb0);
  const auto b1 = frame.to_local(pb1);
  const double rx = b0.x - a0.x, ry = b0.y - a0.y;
  const double wx = (b1.x - b0.x - (a1.x - a0.x)) / dt;
  const double wy = (b1.y - b0.y - (a1.y - a0.y)) / dt;
  const double w2 = wx * wx + wy * wy;
  double tau = 0.0;
  if (w2 > 0.0) tau = std::clamp(-(rx * wx + ry * wy) / w2, 0.0, dt);
  // evaluate the chord positions at tau and measure with the haversine so
  // every reported distance shares one metric
  const double s = tau / dt;
  const geo::GeoPoint pa{
      geo::wrap_lon(pa0.lon + geo::angular_difference(pa0.lon, pa1.lon) * s),
      pa0.lat + (pa1.lat - pa0.lat) * s};
  const geo::GeoPoint pb{
      geo::wrap_lon(pb0.lon + geo::angular_difference(pb0.lon, pb1.lon) * s),
      pb0.lat + (pb1.lat - pb0.lat) * s};
  return {tau, geo::haversine_distance(pa, pb, earth)};
}

}  // namespace detail

// Minimum separation over two time-aligned predicted tracks: the per-step
// haversine scan refined inside every interval along linear chords of both
// tracks. The result is never above any sampled separation.
inline CpaResult cpa_trajectory_scan(std::span<const TimedPosition> traj_a,
                                     std::span<const TimedPosition> traj_b,
                                     double anchor_t,
                                     const geo::EarthModel& earth = {},
                                     bool substep_refine = true) {
  if (traj_a.size() != traj_b.size() || traj_a.empty())
    throw InvalidInput("cpa_trajectory_scan: tracks must share length");
  for (std::size_t i = 0; i < traj_a.size(); ++i)
    if (traj_a[i].t != traj_b[i].t)
      throw InvalidInput("cpa_trajectory_scan: misaligned timestamps");

  CpaResult res;
  res.method = CpaMethod::kTrajectoryScan;
  res.dcpa_m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj_a.size(); ++i) {
    const double d =
        geo::haversine_distance(traj_a[i].position, traj_b[i].position, earth);
    if (d < res.dcpa_m) {
      res.dcpa_m = d;
      res.tcpa_s = traj_a[i].t - anchor_t;
    }
  }
  if (substep_refine) {
    for (std::size_t i = 0; i + 1 < traj_a.size(); ++i) {
      const double dt = traj_a[i + 1].t - traj_a[i].t;
      if (dt <= 0.0) continue;
      const auto [tau, d] = detail::segment_cpa(
          traj_a[i].position, traj_a[i + 1].position, traj_b[i].position,
          traj_b[i + 1].position, dt, earth);
      if (d < res.dcpa_m) {
        res.dcpa_m = d;
        res.tcpa_s = traj_a[i].t + tau - anchor_t;
      }
    }
  }
  return res;
}

struct MotionState {
  geo::GeoPoint position;
  double sog_ms = 0.0;   // m/s
  double cog_deg = 0.0;  // degrees from north
};

// Closed-form CPA under constant course and speed on a local tangent plane:
// TCPA = max(0, -(r.w)/|w|^2) and DCPA = |r + w TCPA|. The frame is placed
// at the pair midpoint and then recentered once at the estimated closest
// point, which keeps the planar metric faithful where the separation is
// actually measured. Identical velocities give TCPA 0 with the current
// separation; an optional horizon clamps the look-ahead.
inline CpaResult cpa_constant_velocity(const MotionState& a, const MotionState& b,
                                       std::optional<double> horizon_s = {},
                                       const geo::EarthModel& earth = {}) {
  if (!std::isfinite(a.sog_ms) || !std::isfinite(b.sog_ms) ||
      !std::isfinite(a.cog_deg) || !std::isfinite(b.cog_deg))
    throw InvalidInput("cpa_constant_velocity: non-finite state");
  auto velocity = [](const MotionState& s) {
    return std::pair{s.sog_ms * std::sin(deg2rad(s.cog_deg)),
                     s.sog_ms * std::cos(deg2rad(s.cog_deg))};
  };
  const auto [vax, vay] = velocity(a);
  const auto [vbx, vby] = velocity(b);
  const double wx = vbx - vax, wy = vby - vay;
  const double w2 = wx * wx + wy * wy;

  geo::GeoPoint center = geo::midpoint(a.position, b.position);
  CpaResult res;
  res.method = CpaMethod::kConstantVelocity;
  for (int pass = 0; pass < 2; ++pass) {
    const geo::LocalFrame frame(center, earth);
    const auto pa = frame.to_local(a.position);
    const auto pb = frame.to_local(b.position);
    const double rx = pb.x - pa.x, ry = pb.y - pa.y;
    double tcpa = w2 > 0.0 ? std::max(0.0, -(rx * wx + ry * wy) / w2) : 0.0;
    if (horizon_s) tcpa = std::min(tcpa, *horizon_s);
    res.tcpa_s = tcpa;
    const double dx = rx + wx * tcpa, dy = ry + wy * tcpa;
    res.dcpa_m = std::sqrt(dx * dx + dy * dy);
    // recenter at the midpoint of the projected closest-approach positions
    const auto qa = frame.to_geo({pa.x + vax * tcpa, pa.y + vay * tcpa});
    const auto qb = frame.to_geo({pb.x + vbx * tcpa, pb.y + vby * tcpa});
    center = geo::midpoint(qa, qb);
  }
  return res;
}

struct RiskReport {
  double anchor_t = 0.0;
  std::int64_t target = 0;
  double d_safe_m = 500.0;
  double horizon_s = 0.0;
  CpaMethod method = CpaMethod::kTrajectoryScan;
  std::vector<CpaResult> pairs;  // sorted by dcpa, then neighbor mmsi
  std::vector<std::pair<std::int64_t, std::string>> errors;

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : pairs)
      rows.push_back({{"mmsi", p.mmsi_b},
                      {"dcpa_m", p.dcpa_m},
                      {"tcpa_s", p.tcpa_s},
                      {"flagged", p.flagged}});
    nlohmann::json errs = nlohmann::json::array();
    for (const auto& [mmsi, what] : errors)
      errs.push_back({{"mmsi", mmsi}, {"error", what}});
    nlohmann::json j{{"anchor_t", anchor_t},
                     {"target", target},
                     {"d_safe_m", d_safe_m},
                     {"horizon_s", horizon_s},
                     {"method", to_string(method)},
                     {"pairs", rows}};
    if (!errors.empty()) j["errors"] = errs;
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "target,mmsi,dcpa_m,tcpa_s,flagged\n";
    for (const auto& p : pairs)
      os << target << ',' << p.mmsi_b << ',' << p.dcpa_m << ',' << p.tcpa_s
         << ',' << (p.flagged ? 1 : 0) << "\n";
    return os.str();
  }
};

// CPA for every target-neighbor pair of a predicted scene. Pairs whose
// prediction failed become error entries and the report is marked partial
// by their presence.
inline RiskReport assess_scene_risk(const scene::Scene& sc,
                                    const RiskConfig& cfg = {},
                                    const geo::EarthModel& earth = {}) {
  cfg.validate();
  if (sc.forecasts.size() != sc.vessels.size())
    throw StateError("assess_scene_risk: scene has no predictions");

  RiskReport report;
  report.anchor_t = sc.anchor_t;
  report.target = sc.target_mmsi;
  report.d_safe_m = cfg.d_safe_m;
  report.method = cfg.method;

  const auto& target_fc = sc.forecasts.front();
  if (!target_fc.ok) {
    report.errors.push_back({sc.target_mmsi, target_fc.error.empty()
                                                 ? "prediction-missing"
                                                 : target_fc.error});
    return report;
  }
  report.horizon_s = target_fc.points.empty()
                         ? 0.0
                         : target_fc.points.back().t - sc.anchor_t;

  for (std::size_t i = 1; i < sc.vessels.size(); ++i) {
    const auto& fc = sc.forecasts[i];
    if (!fc.ok) {
      report.errors.push_back(
          {sc.vessels[i].mmsi, fc.error.empty() ? "prediction-missing" : fc.error});
      continue;
    }
    CpaResult pair;
    if (cfg.method == CpaMethod::kTrajectoryScan) {
      pair = cpa_trajectory_scan(target_fc.points, fc.points, sc.anchor_t, earth,
                                 cfg.substep_refine);
    } else {
      const auto& ta = sc.vessels.front().points.back();
      const auto& tb = sc.vessels[i].points.back();
      pair = cpa_constant_velocity(
          MotionState{ta.position(), ta.v, ta.psi},
          MotionState{tb.position(), tb.v, tb.psi}, report.horizon_s, earth);
    }
    pair.mmsi_a = sc.target_mmsi;
    pair.mmsi_b = sc.vessels[i].mmsi;
    pair.flagged = pair.dcpa_m <= cfg.d_safe_m;
    report.pairs.push_back(pair);
  }
  std::sort(report.pairs.begin(), report.pairs.end(),
            [](const CpaResult& a, const CpaResult& b) {
              if (a.dcpa_m != b.dcpa_m) return a.dcpa_m < b.dcpa_m;
              return a.mmsi_b < b.mmsi_b;
            });
  return report;
}

}  // namespace vesselcast::risk
