#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vesselcast/ais.hpp"
#include "vesselcast/common.hpp"
#include "vesselcast/geo.hpp"
#include "vesselcast/hermite.hpp"
#include "vesselcast/parallel.hpp"
#include "vesselcast/trajectory.hpp"

namespace vesselcast::pipeline {

using vesselcast::kKnotsToMs;

// Splits a voyage wherever successive timestamps differ by more than
// gap_threshold_s (strict: a gap of exactly the threshold does not split).
// The concatenation of the outputs equals the input.
inline std::vector<ais::Voyage> segment_trips(const ais::Voyage& voyage,
                                              double gap_threshold_s = 3600.0) {
  std::vector<ais::Voyage> trips;
  for (const auto& r : voyage.records) {
    if (trips.empty() ||
        r.timestamp - trips.back().records.back().timestamp > gap_threshold_s) {
      trips.push_back({voyage.mmsi, {}});
    }
    trips.back().records.push_back(r);
  }
  return trips;
}

struct InterpOutcome {
  bool ok = false;
  std::string reason;  // "too-few-points" when rejected
  TrajectorySegment segment;
};

// Resamples one trip onto a fixed grid t_start, t_start + interval, ... using
// cubic Hermite splines. Longitude and COG are unwrapped before interpolation
// and rewrapped after; SOG is converted from knots to m/s first. A sample
// falling exactly on a source timestamp reproduces the source values.
// Physics fields are left zeroed for derive_physics.
inline InterpOutcome interpolate_hermite(const ais::Voyage& trip,
                                         double interval_s = kSampleIntervalS) {
  InterpOutcome out;
  if (trip.records.size() < 4) {
    out.reason = "too-few-points";
    return out;
  }
  const std::size_t n = trip.records.size();
  std::vector<double> t(n), lon(n), lat(n), sog(n), cog(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = trip.records[i];
    t[i] = r.timestamp;
    lat[i] = r.position.lat;
    sog[i] = r.sog_kn * kKnotsToMs;
    // unwrap lon and cog so the splines never see a 360-degree jump
    if (i == 0) {
      lon[i] = r.position.lon;
      cog[i] = r.cog_deg;
    } else {
      lon[i] = lon[i - 1] + geo::angular_difference(trip.records[i - 1].position.lon,
                                                    r.position.lon);
      cog[i] = cog[i - 1] +
               geo::angular_difference(trip.records[i - 1].cog_deg, r.cog_deg);
    }
  }
  const CubicHermite fx(t, lon), fy(t, lat), fv(t, sog), fpsi(t, cog);

  TrajectorySegment seg;
  seg.mmsi = trip.mmsi;
  seg.interval_s = interval_s;
  std::size_t src = 0;
  for (std::size_t k = 0;; ++k) {
    const double tq = t.front() + static_cast<double>(k) * interval_s;
    if (tq > t.back() + 1e-9) break;
    while (src + 1 < n && t[src] < tq) ++src;
    TrajectoryPoint p;
    p.t = tq;
    if (t[src] == tq) {  // knot hit: emit source values bit-exactly
      p.x = trip.records[src].position.lon;
      p.y = lat[src];
      p.v = sog[src];
      p.psi = trip.records[src].cog_deg;
    } else {
      p.x = geo::wrap_lon(fx(tq));
      p.y = fy(tq);
      p.v = fv(tq);
      p.psi = geo::wrap_deg360(fpsi(tq));
    }
    seg.points.push_back(p);
  }
  out.ok = true;
  out.segment = std::move(seg);
  return out;
}

// Fills the physics features by backward differences over the fixed grid:
//   a_i    = (v_i - v_{i-1}) / dt
//   j_i    = (a_i - a_{i-1}) / dt
//   psi'_i = angdiff(psi_{i-1}, psi_i) / dt
//   beta_i = bearing(p_{i-1}, p_i)
//   beta'_i = angdiff(beta_{i-1}, beta_i) / dt
// Values whose backward difference reaches an undefined leading value are 0:
// everything at index 0, plus j and beta' at index 1.
inline TrajectorySegment derive_physics(TrajectorySegment seg) {
  auto& pts = seg.points;
  if (pts.empty()) return seg;
  const double dt = seg.interval_s;
  pts[0].a = pts[0].j = pts[0].psi_dot = pts[0].beta = pts[0].beta_dot = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    pts[i].a = (pts[i].v - pts[i - 1].v) / dt;
    pts[i].psi_dot = geo::angular_difference(pts[i - 1].psi, pts[i].psi) / dt;
    pts[i].beta = geo::initial_bearing(pts[i - 1].position(), pts[i].position())
                      .degrees;
    pts[i].j = (i >= 2) ? (pts[i].a - pts[i - 1].a) / dt : 0.0;
    pts[i].beta_dot =
        (i >= 2) ? geo::angular_difference(pts[i - 1].beta, pts[i].beta) / dt
                 : 0.0;
  }
  return seg;
}

// Retains physics-annotated segments whose time span is at least min_duration.
inline Dataset build_dataset(std::vector<TrajectorySegment> segments,
                             double min_duration_s = 18000.0) {
  Dataset ds;
  for (auto& s : segments) {
    if (!s.points.empty() && s.span_s() >= min_duration_s)
      ds.segments.push_back(std::move(s));
  }
  if (!ds.segments.empty()) ds.interval_s = ds.segments.front().interval_s;
  return ds;
}

struct PipelineConfig {
  ais::FilterConfig filter;
  double gap_threshold_s = 3600.0;
  double interval_s = kSampleIntervalS;
  double min_duration_s = 18000.0;
};

struct PipelineStats {
  std::size_t rows_parsed = 0;
  std::size_t rows_skipped = 0;
  std::size_t voyages_total = 0;
  std::size_t voyages_invalid_mmsi = 0;
  std::size_t voyages_too_short = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t low_sog_dropped = 0;
  std::size_t trips_total = 0;
  std::size_t trips_too_few_points = 0;
  std::size_t segments_interpolated = 0;
  std::size_t segments_below_min_duration = 0;
  std::size_t segments_final = 0;
  std::size_t points_final = 0;
};

// Full preprocessing chain over parsed records. Voyages are processed in
// parallel with per-voyage result slots, so the output is identical for any
// worker count.
inline std::pair<Dataset, PipelineStats> run_pipeline(
    std::vector<ais::AisRecord> records, const PipelineConfig& cfg = {},
    unsigned workers = 1) {
  PipelineStats stats;
  auto voyages = ais::group_by_vessel(std::move(records));
  stats.voyages_total = voyages.size();

  struct VoyageResult {
    ais::FilterOutcome filtered;
    std::size_t trips = 0;
    std::size_t too_few = 0;
    std::vector<TrajectorySegment> segments;
  };
  std::vector<VoyageResult> slots(voyages.size());

  parallel_for(voyages.size(), workers, [&](std::size_t i) {
    VoyageResult& res = slots[i];
    res.filtered = ais::filter_noise(voyages[i], cfg.filter);
    if (!res.filtered.accepted()) return;
    for (const auto& trip :
         segment_trips(res.filtered.voyage, cfg.gap_threshold_s)) {
      ++res.trips;
      auto interp = interpolate_hermite(trip, cfg.interval_s);
      if (!interp.ok) {
        ++res.too_few;
        continue;
      }
      res.segments.push_back(derive_physics(std::move(interp.segment)));
    }
  });

  std::vector<TrajectorySegment> all;
  for (auto& res : slots) {
    stats.duplicates_dropped += res.filtered.duplicates_dropped;
    stats.low_sog_dropped += res.filtered.low_sog_dropped;
    if (res.filtered.reject == ais::RejectReason::kInvalidMmsi)
      ++stats.voyages_invalid_mmsi;
    if (res.filtered.reject == ais::RejectReason::kTooShort)
      ++stats.voyages_too_short;
    stats.trips_total += res.trips;
    stats.trips_too_few_points += res.too_few;
    for (auto& s : res.segments) all.push_back(std::move(s));
  }
  stats.segments_interpolated = all.size();

  Dataset ds = build_dataset(std::move(all), cfg.min_duration_s);
  ds.interval_s = cfg.interval_s;
  stats.segments_final = ds.segments.size();
  stats.segments_below_min_duration =
      stats.segments_interpolated - stats.segments_final;
  stats.points_final = ds.total_points();
  return {std::move(ds), stats};
}

}  // namespace vesselcast::pipeline
