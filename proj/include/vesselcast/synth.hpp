#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselcast/ais.hpp"
#include "vesselcast/common.hpp"
#include "vesselcast/geo.hpp"

namespace vesselcast::synth {

enum class Archetype { kConstantVelocity, kConstantTurn, kSpeedRamp, kCrossingPair };

inline const char* to_string(Archetype a) {
  switch (a) {
    case Archetype::kConstantVelocity: return "constant-velocity";
    case Archetype::kConstantTurn: return "constant-turn";
    case Archetype::kSpeedRamp: return "speed-ramp";
    case Archetype::kCrossingPair: return "crossing-pair";
  }
  return "unknown";
}

struct SyntheticFleetSpec {
  std::size_t vessels = 40;
  double lon_min = -64.0, lon_max = -63.0;
  double lat_min = 44.0, lat_max = 45.0;
  double duration_s = 6.0 * 3600.0;
  double report_interval_s = 60.0;
  double t0 = 1700000000.0;
  double noise_pos_m = 0.0;   // gaussian position jitter
  double noise_sog_kn = 0.0;  // gaussian SOG jitter
  std::uint64_t seed = 0;
  // archetype mix; crossing pairs consume two vessel slots each
  double frac_constant_velocity = 0.30;
  double frac_constant_turn = 0.40;
  double frac_speed_ramp = 0.20;

  void validate() const {
    if (vessels < 2) throw ConfigError("SyntheticFleetSpec: need >= 2 vessels");
    if (lon_min >= lon_max || lat_min >= lat_max)
      throw ConfigError("SyntheticFleetSpec: empty region");
    if (duration_s <= 0 || report_interval_s <= 0)
      throw ConfigError("SyntheticFleetSpec: bad duration or interval");
  }
};

inline void from_json(const nlohmann::json& j, SyntheticFleetSpec& s) {
  s.vessels = j.value("vessels", s.vessels);
  s.lon_min = j.value("lon_min", s.lon_min);
  s.lon_max = j.value("lon_max", s.lon_max);
  s.lat_min = j.value("lat_min", s.lat_min);
  s.lat_max = j.value("lat_max", s.lat_max);
  s.duration_s = j.value("duration_s", s.duration_s);
  s.report_interval_s = j.value("report_interval_s", s.report_interval_s);
  s.t0 = j.value("t0", s.t0);
  s.noise_pos_m = j.value("noise_pos_m", s.noise_pos_m);
  s.noise_sog_kn = j.value("noise_sog_kn", s.noise_sog_kn);
  s.seed = j.value("seed", s.seed);
  s.frac_constant_velocity = j.value("frac_constant_velocity", s.frac_constant_velocity);
  s.frac_constant_turn = j.value("frac_constant_turn", s.frac_constant_turn);
  s.frac_speed_ramp = j.value("frac_speed_ramp", s.frac_speed_ramp);
}

inline void to_json(nlohmann::json& j, const SyntheticFleetSpec& s) {
  j = {{"vessels", s.vessels},
       {"lon_min", s.lon_min},
       {"lon_max", s.lon_max},
       {"lat_min", s.lat_min},
       {"lat_max", s.lat_max},
       {"duration_s", s.duration_s},
       {"report_interval_s", s.report_interval_s},
       {"t0", s.t0},
       {"noise_pos_m", s.noise_pos_m},
       {"noise_sog_kn", s.noise_sog_kn},
       {"seed", s.seed},
       {"frac_constant_velocity", s.frac_constant_velocity},
       {"frac_constant_turn", s.frac_constant_turn},
       {"frac_speed_ramp", s.frac_speed_ramp}};
}

struct SyntheticFleet {
  std::vector<ais::AisRecord> records;
  nlohmann::json truth;  // per-vessel archetypes plus analytic crossing CPA
};

namespace detail {

struct VesselPlan {
  std::int64_t mmsi = 0;
  Archetype archetype = Archetype::kConstantVelocity;
  geo::GeoPoint start;
  double heading_deg = 0.0;
  double sog_kn = 12.0;
  double turn_rate_dps = 0.0;   // constant-turn
  double sog_ramp_kn_s = 0.0;   // speed-ramp
  // gentle speed oscillation so acceleration and jerk span honest ranges;
  // zero for crossing pairs, whose analytic CPA needs exact constant speed
  double sog_wobble_kn = 0.0;
  double sog_wobble_period_s = 1800.0;
  double sog_wobble_phase = 0.0;
  // crossing pairs move linearly on a tangent plane at the conflict point so
  // the recorded analytic closest approach is exact
  geo::GeoPoint cross_point;
  double cross_t = 0.0;
  double vx_ms = 0.0;
  double vy_ms = 0.0;
};

}  // namespace detail

// Deterministic synthetic AIS fleet. Motion integrates heading/speed per
// report interval along great-circle steps; crossing pairs are constructed
// through a shared conflict point with a small time offset, and their
// analytic closest approach is recorded in the sidecar truth.
inline SyntheticFleet generate_fleet(const SyntheticFleetSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto in_region = [&](double margin) {
    const double lon_m = (spec.lon_max - spec.lon_min) * margin;
    const double lat_m = (spec.lat_max - spec.lat_min) * margin;
    return geo::GeoPoint{
        spec.lon_min + lon_m + u01(rng) * (spec.lon_max - spec.lon_min - 2 * lon_m),
        spec.lat_min + lat_m + u01(rng) * (spec.lat_max - spec.lat_min - 2 * lat_m)};
  };

  std::size_t n_cv = static_cast<std::size_t>(
      std::llround(spec.frac_constant_velocity * static_cast<double>(spec.vessels)));
  std::size_t n_turn = static_cast<std::size_t>(
      std::llround(spec.frac_constant_turn * static_cast<double>(spec.vessels)));
  std::size_t n_ramp = static_cast<std::size_t>(
      std::llround(spec.frac_speed_ramp * static_cast<double>(spec.vessels)));
  while (n_cv + n_turn + n_ramp > spec.vessels) {
    if (n_turn > 0) --n_turn;
    else if (n_cv > 0) --n_cv;
    else --n_ramp;
  }
  std::size_t n_cross = spec.vessels - n_cv - n_turn - n_ramp;
  if (n_cross % 2 == 1) {  // crossing vessels come in pairs
    if (n_turn > 0) { --n_turn; ++n_cross; }
    else if (n_cv > 0) { --n_cv; ++n_cross; }
    else { --n_cross; }
  }

  std::vector<detail::VesselPlan> plans;
  std::int64_t next_mmsi = 316000001;
  auto base_plan = [&](Archetype a) {
    detail::VesselPlan p;
    p.mmsi = next_mmsi++;
    p.archetype = a;
    p.start = in_region(0.15);
    p.heading_deg = 360.0 * u01(rng);
    p.sog_kn = 8.0 + 8.0 * u01(rng);
    p.sog_wobble_kn = 0.15 + 0.25 * u01(rng);
    p.sog_wobble_period_s = 1200.0 + 1800.0 * u01(rng);
    p.sog_wobble_phase = 2.0 * kPi * u01(rng);
    return p;
  };
  for (std::size_t i = 0; i < n_cv; ++i)
    plans.push_back(base_plan(Archetype::kConstantVelocity));
  for (std::size_t i = 0; i < n_turn; ++i) {
    auto p = base_plan(Archetype::kConstantTurn);
    const double mag = 0.02 + 0.04 * u01(rng);  // deg/s
    p.turn_rate_dps = u01(rng) < 0.5 ? mag : -mag;
    plans.push_back(p);
  }
  for (std::size_t i = 0; i < n_ramp; ++i) {
    auto p = base_plan(Archetype::kSpeedRamp);
    p.sog_ramp_kn_s = (u01(rng) < 0.5 ? 1.0 : -1.0) * (4.0 / spec.duration_s) *
                      (0.5 + u01(rng));
    plans.push_back(p);
  }

  nlohmann::json truth;
  truth["vessels"] = nlohmann::json::array();
  truth["crossings"] = nlohmann::json::array();

  // crossing pairs: both tracks pass through a conflict point, offset by a
  // small lag so the analytic closest approach is tight
  for (std::size_t c = 0; c < n_cross / 2; ++c) {
    const auto cross_point = in_region(0.3);
    const double t_cross = spec.t0 + spec.duration_s * (0.4 + 0.3 * u01(rng));
    const double course_a = 360.0 * u01(rng);
    const double course_b =
        geo::wrap_deg360(course_a + 60.0 + 60.0 * u01(rng));  // 60..120 apart
    const double va = (9.0 + 5.0 * u01(rng)) * kKnotsToMs;  // m/s
    const double vb = (9.0 + 5.0 * u01(rng)) * kKnotsToMs;
    const double lag_s = 20.0 + 40.0 * u01(rng);  // B reaches the point later

    detail::VesselPlan a;
    a.mmsi = next_mmsi++;
    a.archetype = Archetype::kCrossingPair;
    a.heading_deg = course_a;
    a.sog_kn = va / kKnotsToMs;
    a.cross_point = cross_point;
    a.cross_t = t_cross;
    a.vx_ms = va * std::sin(deg2rad(course_a));
    a.vy_ms = va * std::cos(deg2rad(course_a));
    detail::VesselPlan b = a;
    b.mmsi = next_mmsi++;
    b.heading_deg = course_b;
    b.sog_kn = vb / kKnotsToMs;
    b.cross_t = t_cross + lag_s;
    b.vx_ms = vb * std::sin(deg2rad(course_b));
    b.vy_ms = vb * std::cos(deg2rad(course_b));
    plans.push_back(a);
    plans.push_back(b);

    // analytic CPA on the tangent plane at the conflict point:
    // r(t) = w (t - t_cross) - vb lag ub, with w = vb ub - va ua
    const double ca = deg2rad(course_a), cb = deg2rad(course_b);
    const double uax = std::sin(ca), uay = std::cos(ca);
    const double ubx = std::sin(cb), uby = std::cos(cb);
    const double wx = vb * ubx - va * uax, wy = vb * uby - va * uay;
    const double w2 = wx * wx + wy * wy;
    const double r0x = -vb * lag_s * ubx, r0y = -vb * lag_s * uby;
    const double dt_star = w2 > 0.0 ? -(r0x * wx + r0y * wy) / w2 : 0.0;
    const double dx = r0x + wx * dt_star, dy = r0y + wy * dt_star;
    truth["crossings"].push_back(
        {{"mmsi_a", a.mmsi},
         {"mmsi_b", b.mmsi},
         {"t_star", t_cross + dt_star},
         {"dcpa_m", std::sqrt(dx * dx + dy * dy)},
         {"cross_lon", cross_point.lon},
         {"cross_lat", cross_point.lat}});
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  SyntheticFleet fleet;
  const auto steps =
      static_cast<std::size_t>(spec.duration_s / spec.report_interval_s) + 1;
  for (const auto& plan : plans) {
    truth["vessels"].push_back(
        {{"mmsi", plan.mmsi}, {"archetype", to_string(plan.archetype)}});
    geo::GeoPoint pos = plan.start;
    double heading = plan.heading_deg;
    double sog_kn = plan.sog_kn;
    const geo::LocalFrame cross_frame(plan.cross_point);
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = spec.t0 + static_cast<double>(k) * spec.report_interval_s;
      const double wobble =
          plan.sog_wobble_kn *
          std::sin(2.0 * kPi * (t - spec.t0) / plan.sog_wobble_period_s +
                   plan.sog_wobble_phase);
      const double sog_now = std::max(2.0, sog_kn + wobble);
      if (plan.archetype == Archetype::kCrossingPair) {
        const double dt = t - plan.cross_t;
        pos = cross_frame.to_geo({plan.vx_ms * dt, plan.vy_ms * dt});
      }
      ais::AisRecord rec;
      rec.mmsi = plan.mmsi;
      rec.timestamp = t;
      rec.position = pos;
      rec.sog_kn = std::max(2.0, sog_now + spec.noise_sog_kn * gauss(rng));
      rec.cog_deg = geo::wrap_deg360(heading);
      rec.ship_type = "tanker";
      if (spec.noise_pos_m > 0.0) {
        rec.position = geo::destination_point(
            rec.position, 360.0 * u01(rng), std::abs(gauss(rng)) * spec.noise_pos_m);
      }
      fleet.records.push_back(rec);

      // advance to the next report
      pos = geo::destination_point(pos, heading,
                                   sog_now * kKnotsToMs * spec.report_interval_s);
      if (plan.archetype == Archetype::kConstantTurn)
        heading = geo::wrap_deg360(heading +
                                   plan.turn_rate_dps * spec.report_interval_s);
      if (plan.archetype == Archetype::kSpeedRamp)
        sog_kn = std::clamp(sog_kn + plan.sog_ramp_kn_s * spec.report_interval_s,
                            4.0, 20.0);
    }
  }
  fleet.truth = std::move(truth);
  return fleet;
}

inline std::string fleet_csv(const SyntheticFleet& fleet) {
  std::ostringstream os;
  os.precision(12);
  os << "mmsi,timestamp,lat,lon,sog,cog,ship_type\n";
  for (const auto& r : fleet.records)
    os << r.mmsi << ',' << r.timestamp << ',' << r.position.lat << ','
       << r.position.lon << ',' << r.sog_kn << ',' << r.cog_deg << ','
       << r.ship_type << "\n";
  return os.str();
}

}  // namespace vesselcast::synth
