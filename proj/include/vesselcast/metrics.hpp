#pragma once

#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselcast/common.hpp"
#include "vesselcast/geo.hpp"

namespace vesselcast::metrics {

// K predicted trajectory samples for one vessel over H steps. The forecaster
// is deterministic (K = 1) but the metric definitions carry the sample
// dimension so mean-over-samples aggregation stays explicit.
struct SampledTrajectory {
  std::size_t samples = 0;  // K
  std::size_t horizon = 0;  // H
  std::vector<geo::GeoPoint> points;  // [K * H], sample-major

  const geo::GeoPoint& at(std::size_t k, std::size_t t) const {
    return points[k * horizon + t];
  }

  static SampledTrajectory single(std::span<const geo::GeoPoint> track) {
    SampledTrajectory s;
    s.samples = 1;
    s.horizon = track.size();
    s.points.assign(track.begin(), track.end());
    return s;
  }
};

// Mean over samples of the per-step haversine displacement, averaged over
// the horizon.
inline double ade(const SampledTrajectory& pred,
                  std::span<const geo::GeoPoint> truth,
                  const geo::EarthModel& earth = {}) {
  if (pred.horizon != truth.size() || pred.samples == 0)
    throw ShapeError("ade: prediction horizon does not match truth");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.samples; ++k)
    for (std::size_t t = 0; t < pred.horizon; ++t)
      sum += geo::haversine_distance(pred.at(k, t), truth[t], earth);
  return sum / static_cast<double>(pred.samples * pred.horizon);
}

// Mean over samples of the final-step displacement.
inline double fde(const SampledTrajectory& pred,
                  std::span<const geo::GeoPoint> truth,
                  const geo::EarthModel& earth = {}) {
  if (pred.horizon != truth.size() || pred.samples == 0 || pred.horizon == 0)
    throw ShapeError("fde: prediction horizon does not match truth");
  double sum = 0.0;
  const std::size_t last = pred.horizon - 1;
  for (std::size_t k = 0; k < pred.samples; ++k)
    sum += geo::haversine_distance(pred.at(k, last), truth[last], earth);
  return sum / static_cast<double>(pred.samples);
}

namespace detail {

inline void check_scene(std::span<const SampledTrajectory> preds,
                        std::span<const std::vector<geo::GeoPoint>> truths) {
  if (preds.empty() || preds.size() != truths.size())
    throw ShapeError("joint metrics: need matching non-empty vessel lists");
  for (std::size_t v = 0; v < preds.size(); ++v) {
    if (preds[v].samples != preds[0].samples)
      throw ShapeError("joint metrics: inconsistent sample count across vessels");
    if (preds[v].horizon != preds[0].horizon ||
        truths[v].size() != preds[v].horizon)
      throw ShapeError("joint metrics: inconsistent horizon across vessels");
  }
}

}  // namespace detail

// Joint displacement over a scene: sum over vessels and steps inside the
// sample mean, divided by H*N.
inline double jade(std::span<const SampledTrajectory> preds,
                   std::span<const std::vector<geo::GeoPoint>> truths,
                   const geo::EarthModel& earth = {}) {
  detail::check_scene(preds, truths);
  const std::size_t K = preds[0].samples, H = preds[0].horizon,
                    N = preds.size();
  double mean_k = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double sum = 0.0;
    for (std::size_t v = 0; v < N; ++v)
      for (std::size_t t = 0; t < H; ++t)
        sum += geo::haversine_distance(preds[v].at(k, t), truths[v][t], earth);
    mean_k += sum;
  }
  return mean_k / static_cast<double>(K) / static_cast<double>(H * N);
}

inline double jfde(std::span<const SampledTrajectory> preds,
                   std::span<const std::vector<geo::GeoPoint>> truths,
                   const geo::EarthModel& earth = {}) {
  detail::check_scene(preds, truths);
  const std::size_t K = preds[0].samples, H = preds[0].horizon,
                    N = preds.size();
  if (H == 0) throw ShapeError("jfde: empty horizon");
  double mean_k = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double sum = 0.0;
    for (std::size_t v = 0; v < N; ++v)
      sum += geo::haversine_distance(preds[v].at(k, H - 1), truths[v][H - 1],
                                     earth);
    mean_k += sum;
  }
  return mean_k / static_cast<double>(K) / static_cast<double>(N);
}

struct VesselError {
  std::int64_t mmsi = 0;
  double ade_m = 0.0;
  double fde_m = 0.0;
};

struct EvalReport {
  std::vector<VesselError> vessels;
  double jade_m = 0.0;
  double jfde_m = 0.0;
  std::size_t horizon = 0;
  std::size_t samples = 1;

  nlohmann::json to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& v : vessels)
      per.push_back({{"mmsi", v.mmsi}, {"ade_m", v.ade_m}, {"fde_m", v.fde_m}});
    return {{"vessels", per},
            {"jade_m", jade_m},
            {"jfde_m", jfde_m},
            {"n_vessels", vessels.size()},
            {"horizon", horizon},
            {"samples", samples}};
  }

  // one flat row per scene for aggregation across runs
  std::string to_csv_row() const {
    std::ostringstream os;
    os << vessels.size() << ',' << horizon << ',' << samples << ',' << jade_m
       << ',' << jfde_m;
    for (const auto& v : vessels)
      os << ',' << v.mmsi << ',' << v.ade_m << ',' << v.fde_m;
    return os.str();
  }
};

inline EvalReport evaluate_scene(std::span<const std::int64_t> mmsis,
                                 std::span<const SampledTrajectory> preds,
                                 std::span<const std::vector<geo::GeoPoint>> truths,
                                 const geo::EarthModel& earth = {}) {
  detail::check_scene(preds, truths);
  if (mmsis.size() != preds.size())
    throw ShapeError("evaluate_scene: vessel id list mismatch");
  EvalReport report;
  report.horizon = preds[0].horizon;
  report.samples = preds[0].samples;
  for (std::size_t v = 0; v < preds.size(); ++v)
    report.vessels.push_back({mmsis[v], ade(preds[v], truths[v], earth),
                              fde(preds[v], truths[v], earth)});
  report.jade_m = jade(preds, truths, earth);
  report.jfde_m = jfde(preds, truths, earth);
  return report;
}

}  // namespace vesselcast::metrics
