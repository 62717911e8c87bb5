#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"

#include "vesselcast/risk.hpp"

using namespace vesselcast;
using geo::GeoPoint;
using risk::CpaMethod;
using risk::MotionState;

namespace {

// constant-velocity track sampled every dt seconds
std::vector<TimedPosition> cv_track(GeoPoint start, double bearing_deg,
                                    double speed_ms, double t0, std::size_t n,
                                    double dt = 120.0) {
  std::vector<TimedPosition> out;
  GeoPoint pos = start;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({t0 + dt * static_cast<double>(i), pos});
    pos = geo::destination_point(pos, bearing_deg, speed_ms * dt);
  }
  return out;
}

// 1-second-resolution brute force over linear chords of both tracks
std::pair<double, double> brute_force_cpa(const std::vector<TimedPosition>& a,
                                          const std::vector<TimedPosition>& b,
                                          double anchor_t) {
  double best = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    const double dt = a[i + 1].t - a[i].t;
    for (int s = 0; s <= static_cast<int>(dt); ++s) {
      const double f = s / dt;
      auto lerp_pos = [&](const TimedPosition& p, const TimedPosition& q) {
        return GeoPoint{p.position.lon + (q.position.lon - p.position.lon) * f,
                        p.position.lat + (q.position.lat - p.position.lat) * f};
      };
      const double d = geo::haversine_distance(lerp_pos(a[i], a[i + 1]),
                                               lerp_pos(b[i], b[i + 1]));
      if (d < best) {
        best = d;
        best_t = a[i].t + s - anchor_t;
      }
    }
  }
  return {best, best_t};
}

}  // namespace

TEST_CASE("identical trajectories have zero dcpa at time zero") {
  auto track = cv_track({-63.0, 44.0}, 70.0, 8.0, 1000.0, 30);
  auto res = risk::cpa_trajectory_scan(track, track, 1000.0);
  CHECK(res.dcpa_m == 0.0);
  CHECK(res.tcpa_s == 0.0);
}

TEST_CASE("parallel offset tracks report the offset as dcpa") {
  auto a = cv_track({-63.0, 44.0}, 90.0, 8.0, 0.0, 40);
  const auto start_b = geo::destination_point({-63.0, 44.0}, 0.0, 1500.0);
  auto b = cv_track(start_b, 90.0, 8.0, 0.0, 40);
  auto res = risk::cpa_trajectory_scan(a, b, 0.0);
  CHECK_THAT(res.dcpa_m, Catch::Matchers::WithinAbs(1500.0, 0.5));
}

TEST_CASE("perpendicular crossing matches the dense brute-force oracle") {
  // vessel A eastbound through the crossing point, vessel B northbound,
  // arriving slightly later
  const GeoPoint cross{-63.0, 44.0};
  const double speed = 8.0;
  auto start_a = geo::destination_point(cross, 270.0, speed * 1800.0);
  auto start_b = geo::destination_point(cross, 180.0, speed * 2100.0);
  auto a = cv_track(start_a, 90.0, speed, 0.0, 40);
  auto b = cv_track(start_b, 0.0, speed, 0.0, 40);

  auto res = risk::cpa_trajectory_scan(a, b, 0.0);
  auto [oracle_d, oracle_t] = brute_force_cpa(a, b, 0.0);
  CHECK_THAT(res.dcpa_m, Catch::Matchers::WithinAbs(oracle_d, 1.0));
  CHECK_THAT(res.tcpa_s, Catch::Matchers::WithinAbs(oracle_t, 60.0));

  // the refined minimum never exceeds any sampled separation
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(res.dcpa_m <=
          geo::haversine_distance(a[i].position, b[i].position) + 1e-9);
}

TEST_CASE("trajectory scan is exactly symmetric") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> brg(0.0, 360.0);
  std::uniform_real_distribution<double> off(-0.05, 0.05);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = cv_track({-63.0 + off(rng), 44.0 + off(rng)}, brg(rng), 7.0, 0.0, 25);
    auto b = cv_track({-63.0 + off(rng), 44.0 + off(rng)}, brg(rng), 9.0, 0.0, 25);
    auto ab = risk::cpa_trajectory_scan(a, b, 0.0);
    auto ba = risk::cpa_trajectory_scan(b, a, 0.0);
    CHECK(ab.dcpa_m == ba.dcpa_m);
    CHECK(ab.tcpa_s == ba.tcpa_s);
  }
}

TEST_CASE("scan rejects misaligned inputs") {
  auto a = cv_track({-63.0, 44.0}, 90.0, 8.0, 0.0, 10);
  auto b = cv_track({-63.0, 44.1}, 90.0, 8.0, 60.0, 10);
  CHECK_THROWS_AS(risk::cpa_trajectory_scan(a, b, 0.0), InvalidInput);
  auto c = cv_track({-63.0, 44.1}, 90.0, 8.0, 0.0, 9);
  CHECK_THROWS_AS(risk::cpa_trajectory_scan(a, c, 0.0), InvalidInput);
}

TEST_CASE("closed form: head-on and matched-velocity cases") {
  // head-on along the equator (a shared great circle), closing at
  // 5 + 5 m/s over a 10 km gap
  const GeoPoint ea{0.0, 0.0};
  const auto eb = geo::destination_point(ea, 90.0, 10000.0);
  auto head_on = risk::cpa_constant_velocity(MotionState{ea, 5.0, 90.0},
                                             MotionState{eb, 5.0, 270.0});
  CHECK_THAT(head_on.tcpa_s, Catch::Matchers::WithinAbs(1000.0, 1.0));
  CHECK_THAT(head_on.dcpa_m, Catch::Matchers::WithinAbs(0.0, 1.0));

  const GeoPoint pa{-63.0, 44.0};
  const auto pb = geo::destination_point(pa, 90.0, 10000.0);

  // identical velocities: relative speed zero
  auto matched = risk::cpa_constant_velocity(MotionState{pa, 7.0, 45.0},
                                             MotionState{pb, 7.0, 45.0});
  CHECK(matched.tcpa_s == 0.0);
  CHECK_THAT(matched.dcpa_m, Catch::Matchers::WithinAbs(10000.0, 1.0));

  // diverging pair: closest point is now
  auto diverging = risk::cpa_constant_velocity(MotionState{pa, 5.0, 270.0},
                                               MotionState{pb, 5.0, 90.0});
  CHECK(diverging.tcpa_s == 0.0);
  CHECK_THAT(diverging.dcpa_m, Catch::Matchers::WithinAbs(10000.0, 1.0));

  CHECK_THROWS_AS(
      risk::cpa_constant_velocity(
          MotionState{pa, std::numeric_limits<double>::quiet_NaN(), 0.0},
          MotionState{pb, 5.0, 90.0}),
      InvalidInput);
}

namespace {

// Random encounter with both tracks moving as straight lines on a shared
// tangent plane, the motion model the closed form assumes.
struct Encounter {
  std::vector<TimedPosition> ta, tb;
  MotionState sa, sb;
  double horizon_s = 0.0;
};

Encounter make_linear_encounter(std::mt19937_64& rng, const GeoPoint& center,
                                double max_gap_m, std::size_t steps) {
  std::uniform_real_distribution<double> brg(0.0, 360.0);
  std::uniform_real_distribution<double> spd(4.0, 10.0);
  std::uniform_real_distribution<double> gap(2000.0, max_gap_m);
  const geo::LocalFrame frame(center);
  const double sep = gap(rng);
  const double sep_dir = oracles::d2r(brg(rng));
  const geo::LocalFrame::Xy a0{-0.5 * sep * std::sin(sep_dir),
                               -0.5 * sep * std::cos(sep_dir)};
  const geo::LocalFrame::Xy b0{0.5 * sep * std::sin(sep_dir),
                               0.5 * sep * std::cos(sep_dir)};
  const double ca = oracles::d2r(brg(rng)), cb = oracles::d2r(brg(rng));
  const double va = spd(rng), vb = spd(rng);
  const double vax = va * std::sin(ca), vay = va * std::cos(ca);
  const double vbx = vb * std::sin(cb), vby = vb * std::cos(cb);

  Encounter e;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = 120.0 * static_cast<double>(i);
    e.ta.push_back({t, frame.to_geo({a0.x + vax * t, a0.y + vay * t})});
    e.tb.push_back({t, frame.to_geo({b0.x + vbx * t, b0.y + vby * t})});
  }
  e.sa = MotionState{e.ta.front().position, va, oracles::r2d(ca)};
  e.sb = MotionState{e.tb.front().position, vb, oracles::r2d(cb)};
  e.horizon_s = 120.0 * static_cast<double>(steps);
  return e;
}

}  // namespace

TEST_CASE("closed form agrees with the scan on exact constant-velocity tracks") {
  // near the equator the planar model is metrically faithful, so the two
  // methods must coincide tightly
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    auto e = make_linear_encounter(rng, {-30.0, 0.0}, 25000.0, 30);
    auto cv = risk::cpa_constant_velocity(e.sa, e.sb, e.horizon_s);
    if (cv.tcpa_s <= 60.0 || cv.tcpa_s >= e.horizon_s - 120.0)
      continue;  // keep minima strictly inside the track
    ++checked;
    auto scan = risk::cpa_trajectory_scan(e.ta, e.tb, 0.0);
    CHECK_THAT(scan.dcpa_m, Catch::Matchers::WithinAbs(cv.dcpa_m, 1.0));
    CHECK_THAT(scan.tcpa_s, Catch::Matchers::WithinAbs(cv.tcpa_s, 10.0));
  }
  CHECK(checked > 10);
}

TEST_CASE("closed form distortion stays bounded at mid-latitudes") {
  // at 44 N the planar metric deviates from the sphere; the gap must stay
  // within tens of meters for encounter-scale geometry
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto e = make_linear_encounter(rng, {-63.0, 44.0}, 20000.0, 30);
    auto cv = risk::cpa_constant_velocity(e.sa, e.sb, e.horizon_s);
    if (cv.tcpa_s <= 60.0 || cv.tcpa_s >= e.horizon_s - 120.0) continue;
    ++checked;
    auto scan = risk::cpa_trajectory_scan(e.ta, e.tb, 0.0);
    CHECK_THAT(scan.dcpa_m, Catch::Matchers::WithinAbs(cv.dcpa_m, 50.0));
    CHECK_THAT(scan.tcpa_s, Catch::Matchers::WithinAbs(cv.tcpa_s, 60.0));
  }
  CHECK(checked > 5);
}

namespace {

scene::Scene make_predicted_scene(const std::vector<std::int64_t>& mmsis,
                                  const std::vector<std::vector<TimedPosition>>& tracks,
                                  double anchor_t) {
  scene::Scene sc;
  sc.anchor_t = anchor_t;
  sc.target_mmsi = mmsis.front();
  for (std::size_t v = 0; v < mmsis.size(); ++v) {
    scene::AlignedHistory h;
    h.mmsi = mmsis[v];
    TrajectoryPoint p;
    p.t = anchor_t;
    p.x = tracks[v].front().position.lon;
    p.y = tracks[v].front().position.lat;
    p.v = 8.0;
    p.psi = 90.0;
    h.points.assign(10, p);
    sc.vessels.push_back(h);
    scene::VesselForecast f;
    f.mmsi = mmsis[v];
    f.ok = true;
    f.points = tracks[v];
    sc.forecasts.push_back(std::move(f));
  }
  return sc;
}

}  // namespace

TEST_CASE("scene risk report: thresholds, sorting and empty scenes") {
  const GeoPoint base{-63.0, 44.0};
  auto target = cv_track(base, 90.0, 8.0, 0.0, 30);
  auto near = cv_track(geo::destination_point(base, 0.0, 400.0), 90.0, 8.0, 0.0, 30);
  auto mid = cv_track(geo::destination_point(base, 0.0, 600.0), 90.0, 8.0, 0.0, 30);
  auto far = cv_track(geo::destination_point(base, 0.0, 9000.0), 90.0, 8.0, 0.0, 30);

  auto sc = make_predicted_scene({316000001, 316000002, 316000003, 316000004},
                                 {target, far, near, mid}, 0.0);
  auto report = risk::assess_scene_risk(sc, {});
  REQUIRE(report.pairs.size() == 3);
  // sorted by dcpa: near (~400), mid (~600), far (~9000)
  CHECK(report.pairs[0].mmsi_b == 316000003);
  CHECK(report.pairs[1].mmsi_b == 316000004);
  CHECK(report.pairs[2].mmsi_b == 316000002);
  CHECK(report.pairs[0].flagged);
  CHECK_FALSE(report.pairs[1].flagged);  // 600 m > 500 m threshold
  CHECK_FALSE(report.pairs[2].flagged);
  for (const auto& p : report.pairs)
    CHECK(p.flagged == (p.dcpa_m <= report.d_safe_m));

  // no neighbors: empty report
  auto lonely = make_predicted_scene({316000001}, {target}, 0.0);
  auto empty = risk::assess_scene_risk(lonely, {});
  CHECK(empty.pairs.empty());

  // a vessel without prediction becomes an error entry
  sc.forecasts[1].ok = false;
  sc.forecasts[1].error = "insufficient-history";
  auto partial = risk::assess_scene_risk(sc, {});
  CHECK(partial.pairs.size() == 2);
  REQUIRE(partial.errors.size() == 1);
  CHECK(partial.errors[0].first == 316000002);

  risk::RiskConfig bad;
  bad.d_safe_m = 0.0;
  CHECK_THROWS_AS(risk::assess_scene_risk(sc, bad), ConfigError);
}

TEST_CASE("risk report serialization carries the schema fields") {
  risk::RiskReport report;
  report.anchor_t = 1700000000.0;
  report.target = 316000001;
  report.d_safe_m = 500.0;
  report.horizon_s = 7200.0;
  report.method = CpaMethod::kTrajectoryScan;
  // representative flagged encounter: 226 m well inside the 500 m threshold,
  // closest approach at 101.6 minutes
  risk::CpaResult pair;
  pair.mmsi_a = 316000001;
  pair.mmsi_b = 316013946;
  pair.dcpa_m = 226.0;
  pair.tcpa_s = 101.6 * 60.0;
  pair.flagged = pair.dcpa_m <= report.d_safe_m;
  report.pairs.push_back(pair);

  auto j = report.to_json();
  CHECK(j["target"] == 316000001);
  CHECK(j["d_safe_m"] == 500.0);
  CHECK(j["method"] == "trajectory-scan");
  REQUIRE(j["pairs"].size() == 1);
  CHECK(j["pairs"][0]["mmsi"] == 316013946);
  CHECK(j["pairs"][0]["dcpa_m"] == 226.0);
  CHECK(j["pairs"][0]["flagged"] == true);
  CHECK_THAT(j["pairs"][0]["tcpa_s"].get<double>(),
             Catch::Matchers::WithinAbs(6096.0, 1e-9));

  auto csv = report.to_csv();
  CHECK(csv.find("target,mmsi,dcpa_m,tcpa_s,flagged") == 0);
  CHECK(csv.find("316013946") != std::string::npos);
}
