#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "vesselcast/common.hpp"
#include "vesselcast/scaler.hpp"
#include "vesselcast/trajectory.hpp"

namespace vesselcast {

// One training pair: w_in rows of 9 normalized features and w_out rows of
// normalized (lon, lat) targets starting one interval after the input ends.
struct WindowPair {
  std::int64_t mmsi = 0;
  double anchor_t = 0.0;  // timestamp of the last input row
  std::size_t w_in = 0;
  std::size_t w_out = 0;
  std::vector<double> x;  // row-major [w_in x 9]
  std::vector<double> y;  // row-major [w_out x 2]
};

enum class SplitMode { kRandom, kSpatialLon };

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Whole-segment split; windows never leak across subsets. Random mode
// shuffles with the seed; spatial mode orders segments by mean longitude and
// assigns contiguous blocks (east block becomes the test set).
inline DatasetSplit split_dataset(const Dataset& ds,
                                  std::array<double, 3> fractions = {0.72, 0.18,
                                                                     0.10},
                                  std::uint64_t seed = 0,
                                  SplitMode mode = SplitMode::kRandom) {
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split_dataset: fractions must sum to 1");
  const std::size_t n = ds.segments.size();
  if (n < 3) throw InvalidInput("split_dataset: need at least 3 segments");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode == SplitMode::kRandom) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  } else {
    auto mean_lon = [&](std::size_t i) {
      double s = 0.0;
      for (const auto& p : ds.segments[i].points) s += p.x;
      return s / static_cast<double>(ds.segments[i].points.size());
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return mean_lon(a) < mean_lon(b);
    });
  }

  std::size_t n_test = static_cast<std::size_t>(
      std::llround(fractions[2] * static_cast<double>(n)));
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(fractions[1] * static_cast<double>(n)));
  n_test = std::max<std::size_t>(1, std::min(n_test, n - 2));
  n_val = std::max<std::size_t>(1, std::min(n_val, n - n_test - 1));

  DatasetSplit split;
  split.seed = seed;
  split.test.assign(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());
  split.validation.assign(
      order.end() - static_cast<std::ptrdiff_t>(n_test + n_val),
      order.end() - static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(order.begin(),
                     order.end() - static_cast<std::ptrdiff_t>(n_test + n_val));
  return split;
}

// Sliding windows over one segment. Too-short segments yield an empty list.
// Window count: floor((n - w_in - w_out) / stride) + 1.
inline std::vector<WindowPair> slide_windows(const TrajectorySegment& seg,
                                             std::size_t w_in, std::size_t w_out,
                                             const FeatureScaler& scaler,
                                             std::size_t stride = 1) {
  if (w_in == 0 || w_out == 0 || stride == 0)
    throw ConfigError("slide_windows: w_in, w_out, stride must be positive");
  std::vector<WindowPair> out;
  const std::size_t n = seg.points.size();
  if (n < w_in + w_out) return out;
  const std::size_t count = (n - w_in - w_out) / stride + 1;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t start = w * stride;
    WindowPair pair;
    pair.mmsi = seg.mmsi;
    pair.w_in = w_in;
    pair.w_out = w_out;
    pair.anchor_t = seg.points[start + w_in - 1].t;
    pair.x.resize(w_in * kFeatureCount);
    pair.y.resize(w_out * 2);
    for (std::size_t i = 0; i < w_in; ++i) {
      const auto& p = seg.points[start + i];
      for (int f = 0; f < kFeatureCount; ++f)
        pair.x[i * kFeatureCount + f] = scaler.transform(f, p.feature(f));
    }
    for (std::size_t i = 0; i < w_out; ++i) {
      const auto& p = seg.points[start + w_in + i];
      pair.y[i * 2 + 0] = scaler.transform(kLon, p.x);
      pair.y[i * 2 + 1] = scaler.transform(kLat, p.y);
    }
    out.push_back(std::move(pair));
  }
  return out;
}

inline std::vector<WindowPair> slide_windows_over(
    const Dataset& ds, const std::vector<std::size_t>& segment_ids,
    std::size_t w_in, std::size_t w_out, const FeatureScaler& scaler,
    std::size_t stride = 1) {
  std::vector<WindowPair> out;
  for (std::size_t id : segment_ids) {
    auto w = slide_windows(ds.segments.at(id), w_in, w_out, scaler, stride);
    out.insert(out.end(), std::make_move_iterator(w.begin()),
               std::make_move_iterator(w.end()));
  }
  return out;
}

}  // namespace vesselcast
