#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <vector>

#include <json.hpp>

#include "vesselcast/common.hpp"
#include "vesselcast/trajectory.hpp"

namespace vesselcast {

// Per-feature min-max scaler over the nine model features. Zero-range
// features transform to the constant 0 and invert back to their minimum, so
// degenerate coordinates stay pinned instead of producing NaNs. Values far
// outside the fitted range clamp at a few range-widths: a near-degenerate
// training range must not turn an unseen value into an unbounded activation.
class FeatureScaler {
 public:
  FeatureScaler() {
    min_.fill(0.0);
    max_.fill(1.0);
  }

  static FeatureScaler fit(std::span<const TrajectorySegment> segments) {
    if (segments.empty())
      throw InvalidInput("FeatureScaler::fit: empty training set");
    FeatureScaler s;
    s.min_.fill(std::numeric_limits<double>::infinity());
    s.max_.fill(-std::numeric_limits<double>::infinity());
    bool any = false;
    for (const auto& seg : segments) {
      for (const auto& p : seg.points) {
        any = true;
        for (int f = 0; f < kFeatureCount; ++f) {
          const double v = p.feature(f);
          s.min_[f] = std::min(s.min_[f], v);
          s.max_[f] = std::max(s.max_[f], v);
        }
      }
    }
    if (!any) throw InvalidInput("FeatureScaler::fit: no points in segments");
    return s;
  }

  double transform(int feature, double v) const {
    const double range = max_[feature] - min_[feature];
    if (range == 0.0) return 0.0;
    return std::clamp((v - min_[feature]) / range, -kClampWidths,
                      1.0 + kClampWidths);
  }

  double inverse(int feature, double u) const {
    const double range = max_[feature] - min_[feature];
    if (range == 0.0) return min_[feature];
    return min_[feature] + u * range;
  }

  double feature_min(int f) const { return min_[f]; }
  double feature_max(int f) const { return max_[f]; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["feature_order"] = kFeatureNames;
    j["min"] = min_;
    j["max"] = max_;
    return j;
  }

  static FeatureScaler from_json(const nlohmann::json& j) {
    FeatureScaler s;
    const auto mn = j.at("min").get<std::vector<double>>();
    const auto mx = j.at("max").get<std::vector<double>>();
    if (mn.size() != kFeatureCount || mx.size() != kFeatureCount)
      throw SchemaError("FeatureScaler: wrong feature count in scaler json");
    for (int f = 0; f < kFeatureCount; ++f) {
      if (mn[f] > mx[f]) throw SchemaError("FeatureScaler: min > max");
      s.min_[f] = mn[f];
      s.max_[f] = mx[f];
    }
    return s;
  }

 private:
  static constexpr double kClampWidths = 5.0;

  std::array<double, kFeatureCount> min_;
  std::array<double, kFeatureCount> max_;
};

}  // namespace vesselcast
