#pragma once

#include <cstddef>
#include <vector>

#include "vesselcast/common.hpp"

namespace vesselcast {

// Piecewise cubic Hermite interpolant over a strictly increasing knot grid.
// Tangents use the three-point finite-difference rule
//   m_i = (h_i * d_{i-1} + h_{i-1} * d_i) / (h_{i-1} + h_i)
// with one-sided slopes at the ends, so the interpolant reproduces knots
// exactly and is exact on linear data.
class CubicHermite {
 public:
  CubicHermite(std::vector<double> t, std::vector<double> y)
      : t_(std::move(t)), y_(std::move(y)) {
    if (t_.size() != y_.size() || t_.size() < 2)
      throw InvalidInput("CubicHermite: need >= 2 matching knots");
    for (std::size_t i = 1; i < t_.size(); ++i)
      if (!(t_[i] > t_[i - 1]))
        throw InvalidInput("CubicHermite: knots must strictly increase");
    const std::size_t n = t_.size();
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      slope[i] = (y_[i + 1] - y_[i]) / (t_[i + 1] - t_[i]);
    m_.resize(n);
    m_.front() = slope.front();
    m_.back() = slope.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = t_[i] - t_[i - 1];
      const double h1 = t_[i + 1] - t_[i];
      m_[i] = (h1 * slope[i - 1] + h0 * slope[i]) / (h0 + h1);
    }
  }

  double operator()(double tq) const {
    // knot queries return the stored value bit-exactly
    const std::size_t k = interval(tq);
    if (tq == t_[k]) return y_[k];
    if (tq == t_[k + 1]) return y_[k + 1];
    const double h = t_[k + 1] - t_[k];
    const double s = (tq - t_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
  }

 private:
  std::size_t interval(double tq) const {
    // clamped extrapolation uses the boundary cubic
    if (tq <= t_.front()) return 0;
    if (tq >= t_.back()) return t_.size() - 2;
    std::size_t lo = 0, hi = t_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (t_[mid] <= tq ? lo : hi) = mid;
    }
    return lo;
  }

  std::vector<double> t_, y_, m_;
};

}  // namespace vesselcast
