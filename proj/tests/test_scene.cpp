#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "vesselcast/scene.hpp"

using namespace vesselcast;
using geo::GeoPoint;

namespace {

// straight cruise segment on the 2-min grid ending at t_end
TrajectorySegment cruise_segment(std::int64_t mmsi, GeoPoint start,
                                 double bearing_deg, double speed_ms,
                                 double t_start, std::size_t n) {
  TrajectorySegment seg;
  seg.mmsi = mmsi;
  GeoPoint pos = start;
  for (std::size_t i = 0; i < n; ++i) {
    TrajectoryPoint p;
    p.t = t_start + 120.0 * static_cast<double>(i);
    p.x = pos.lon;
    p.y = pos.lat;
    p.v = speed_ms;
    p.psi = bearing_deg;
    p.beta = bearing_deg;
    seg.points.push_back(p);
    pos = geo::destination_point(pos, bearing_deg, speed_ms * 120.0);
  }
  return seg;
}

ModelConfig toy_config() {
  ModelConfig cfg;
  cfg.w_in = 10;
  cfg.horizon = 10;
  cfg.d_model = 8;
  cfg.conv_layers = 1;
  cfg.conv_kernel = 3;
  cfg.encoder_layers = 1;
  cfg.heads = 2;
  cfg.d_ff = 16;
  cfg.dropout = 0.0;
  cfg.init_seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("buffer radius doubles the trailing path length") {
  // per-step distance chosen so the trailing hour covers 10 km
  const double step_m = 10000.0 / 30.0;
  scene::AlignedHistory hist;
  hist.mmsi = 316000001;
  GeoPoint pos{-63.0, 0.0};
  for (int i = 0; i <= 30; ++i) {
    TrajectoryPoint p;
    p.t = 120.0 * i;
    p.x = pos.lon;
    p.y = pos.lat;
    hist.points.push_back(p);
    pos = geo::destination_point(pos, 90.0, step_m);
  }
  auto out = scene::buffer_radius(hist, 3600.0);
  REQUIRE(out.ok);
  CHECK_THAT(out.radius_m, Catch::Matchers::WithinAbs(20000.0, 1e-3));

  // stationary target
  scene::AlignedHistory still;
  for (int i = 0; i <= 30; ++i) {
    TrajectoryPoint p;
    p.t = 120.0 * i;
    p.x = -63.0;
    p.y = 44.0;
    still.points.push_back(p);
  }
  auto zero = scene::buffer_radius(still, 3600.0);
  REQUIRE(zero.ok);
  CHECK(zero.radius_m == 0.0);

  // not enough trailing history
  scene::AlignedHistory shallow;
  for (int i = 0; i < 5; ++i) {
    TrajectoryPoint p;
    p.t = 120.0 * i;
    shallow.points.push_back(p);
  }
  auto bad = scene::buffer_radius(shallow, 3600.0);
  CHECK_FALSE(bad.ok);
  CHECK(bad.reason == "insufficient-history");
}

TEST_CASE("exact radius equals twice path length on the aligned window") {
  scene::AlignedHistory hist;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  GeoPoint pos{-63.0, 44.0};
  std::vector<GeoPoint> geom;
  for (int i = 0; i <= 20; ++i) {
    TrajectoryPoint p;
    p.t = 120.0 * i;
    p.x = pos.lon;
    p.y = pos.lat;
    hist.points.push_back(p);
    geom.push_back(pos);
    pos = geo::destination_point(pos, 45.0 + jitter(rng) * 100.0, 900.0);
  }
  auto out = scene::buffer_radius(hist, 20 * 120.0);
  REQUIRE(out.ok);
  CHECK(out.radius_m == 2.0 * geo::path_length(geom));
}

TEST_CASE("snapshot aligns vessels to the anchor grid") {
  Dataset ds;
  ds.segments.push_back(cruise_segment(316000001, {-63.0, 44.0}, 90.0, 8.0, 0.0, 60));
  // phase-shifted vessel: samples at odd minutes
  ds.segments.push_back(cruise_segment(316000002, {-63.1, 44.1}, 45.0, 7.0, 60.0, 60));
  const double anchor = 120.0 * 40;
  auto snap = scene::build_snapshot(ds, anchor, 10);
  REQUIRE(snap.vessels.size() == 2);
  for (const auto& v : snap.vessels) {
    REQUIRE(v.points.size() == 10);
    CHECK(v.points.back().t == anchor);
    for (std::size_t i = 1; i < v.points.size(); ++i)
      CHECK(v.points[i].t - v.points[i - 1].t == 120.0);
  }
  // vessel without coverage at the anchor is absent
  auto late = scene::build_snapshot(ds, 120.0 * 100, 10);
  CHECK(late.vessels.empty());
}

TEST_CASE("neighbor scan boundary and exclusion rules") {
  const double anchor = 120.0 * 30;
  Dataset ds;
  ds.segments.push_back(cruise_segment(316000001, {-63.0, 44.0}, 90.0, 8.0, 0.0, 40));
  auto snap = scene::build_snapshot(ds, anchor, 10);
  REQUIRE(snap.vessels.size() == 1);

  // place a second vessel exactly at a known distance from the target anchor
  const auto target_pos = snap.vessels[0].position_at_anchor();
  const double d = 5000.0;
  auto other_start = geo::destination_point(target_pos, 0.0, d);
  scene::AlignedHistory other;
  other.mmsi = 316000002;
  for (int i = 0; i < 10; ++i) {
    TrajectoryPoint p;
    p.t = anchor - 120.0 * (9 - i);
    p.x = other_start.lon;
    p.y = other_start.lat;
    other.points.push_back(p);
  }
  snap.vessels.push_back(other);

  const double exact = geo::haversine_distance(
      snap.vessels[1].position_at_anchor(), target_pos);
  auto at_boundary = scene::find_neighbors(snap, 316000001, exact, 10);
  CHECK(at_boundary.neighbors == std::vector<std::int64_t>{316000002});
  auto below = scene::find_neighbors(snap, 316000001, exact - 0.001, 10);
  CHECK(below.neighbors.empty());
  auto zero = scene::find_neighbors(snap, 316000001, 0.0, 10);
  CHECK(zero.neighbors.empty());

  // shorter history than the window: reported separately
  snap.vessels[1].points.erase(snap.vessels[1].points.begin(),
                               snap.vessels[1].points.begin() + 5);
  auto shorted = scene::find_neighbors(snap, 316000001, exact, 10);
  CHECK(shorted.neighbors.empty());
  CHECK(shorted.excluded_short == std::vector<std::int64_t>{316000002});

  CHECK_THROWS_AS(scene::find_neighbors(snap, 999, 1000.0, 10), InvalidInput);
}

TEST_CASE("neighbor sets match a brute-force all-pairs scan") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lon(-63.2, -62.8);
  std::uniform_real_distribution<double> lat(43.9, 44.3);
  std::uniform_real_distribution<double> brg(0.0, 360.0);
  Dataset ds;
  for (int v = 0; v < 12; ++v)
    ds.segments.push_back(cruise_segment(316000001 + v, {lon(rng), lat(rng)},
                                         brg(rng), 8.0, 0.0, 40));
  const double anchor = 120.0 * 35;
  // 31 aligned steps: the trailing 3600 s radius lookback is fully covered
  auto snap = scene::build_snapshot(ds, anchor, 31);
  REQUIRE(snap.vessels.size() == 12);

  for (const auto& target : snap.vessels) {
    auto radius = scene::buffer_radius(target, 3600.0);
    REQUIRE(radius.ok);
    auto scan = scene::find_neighbors(snap, target.mmsi, radius.radius_m, 31);
    std::vector<std::int64_t> oracle;
    for (const auto& other : snap.vessels) {
      if (other.mmsi == target.mmsi) continue;
      if (geo::haversine_distance(other.position_at_anchor(),
                                  target.position_at_anchor()) <= radius.radius_m)
        oracle.push_back(other.mmsi);
    }
    CHECK(scan.neighbors == oracle);
  }
}

TEST_CASE("scene prediction is independent of worker count") {
  Dataset ds;
  ds.segments.push_back(cruise_segment(316000001, {-63.0, 44.0}, 90.0, 8.0, 0.0, 40));
  ds.segments.push_back(cruise_segment(316000002, {-63.01, 44.01}, 70.0, 8.0, 0.0, 40));
  ds.segments.push_back(cruise_segment(316000003, {-62.99, 43.99}, 110.0, 8.0, 0.0, 40));
  const double anchor = 120.0 * 35;
  // 12 aligned steps cover the 1200 s lookback; windows use the trailing 10
  auto snap = scene::build_snapshot(ds, anchor, 12);
  REQUIRE(snap.vessels.size() == 3);

  ForecastModel<float> model(toy_config());
  model.set_scaler(FeatureScaler::fit(ds.segments));

  auto sc = scene::build_scene(snap, 316000001, 1200.0, 10);
  REQUIRE(sc.vessels.size() == 3);  // buffer covers both nearby vessels

  auto r1 = scene::predict_scene(sc, model, 1);
  auto r4 = scene::predict_scene(sc, model, 4);
  REQUIRE(r1.forecasts.size() == 3);
  REQUIRE(r4.forecasts.size() == 3);
  for (std::size_t v = 0; v < 3; ++v) {
    REQUIRE(r1.forecasts[v].ok);
    REQUIRE(r1.forecasts[v].points.size() == 10);
    REQUIRE(r1.forecasts[v].points.size() == r4.forecasts[v].points.size());
    for (std::size_t k = 0; k < r1.forecasts[v].points.size(); ++k) {
      CHECK(r1.forecasts[v].points[k].position.lon ==
            r4.forecasts[v].points[k].position.lon);
      CHECK(r1.forecasts[v].points[k].position.lat ==
            r4.forecasts[v].points[k].position.lat);
      CHECK(r1.forecasts[v].points[k].t == r4.forecasts[v].points[k].t);
    }
  }

  // scene predictions equal direct per-vessel calls
  for (std::size_t v = 0; v < 3; ++v) {
    auto solo = model.predict_trajectory(sc.vessels[v].points);
    REQUIRE(solo.ok);
    for (std::size_t k = 0; k < solo.points.size(); ++k) {
      CHECK(solo.points[k].position.lon == r1.forecasts[v].points[k].position.lon);
      CHECK(solo.points[k].position.lat == r1.forecasts[v].points[k].position.lat);
    }
  }

  auto geojson = scene::scene_geojson(r1);
  CHECK(geojson["type"] == "FeatureCollection");
  CHECK(geojson["features"].size() == 6);  // history + prediction per vessel
}
