#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vesselcast {

// Mean earth radius (IUGG), meters. Shared by every distance computation in
// the library so metric tables stay internally consistent.
inline constexpr double kEarthRadiusM = 6371008.8;

// Fixed resampling interval of the trajectory pipeline, seconds.
inline constexpr double kSampleIntervalS = 120.0;

// International knot in m/s.
inline constexpr double kKnotsToMs = 0.514444;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

// Error taxonomy. The CLI maps each family to a distinct exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vesselcast
