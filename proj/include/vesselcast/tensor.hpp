#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vesselcast/common.hpp"

namespace vesselcast::nn {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& s) {
  std::int64_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

// Dense row-major tensor. All layer math runs on float for training and on
// double for finite-difference verification, so everything here is templated
// on the scalar type.
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(shape_numel(shape)), T{0});
  }
  Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<std::int64_t>(data.size()) != shape_numel(shape))
      throw ShapeError("Tensor: data length does not match shape " +
                       shape_str(shape));
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  std::int64_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rank() const { return shape.size(); }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  static Tensor zeros(Shape s) { return Tensor(std::move(s)); }

  static Tensor full(Shape s, T v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      out.data[i] = static_cast<U>(data[i]);
    return out;
  }

  // leading dims collapsed to rows, last dim as columns
  std::int64_t last_dim() const {
    if (shape.empty()) throw ShapeError("Tensor: scalar has no last dim");
    return shape.back();
  }
  std::int64_t rows_flat() const {
    return shape.empty() ? 1 : numel() / shape.back();
  }
};

template <typename T>
using MatRM =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using MapC = Eigen::Map<const MatRM<T>>;

template <typename T>
MapC<T> as_matrix(const Tensor<T>& t, std::int64_t rows, std::int64_t cols) {
  if (rows * cols != t.numel())
    throw ShapeError("as_matrix: cannot view " + shape_str(t.shape) + " as " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  return MapC<T>(t.data.data(), rows, cols);
}

template <typename T>
MapM<T> as_matrix(Tensor<T>& t, std::int64_t rows, std::int64_t cols) {
  if (rows * cols != t.numel())
    throw ShapeError("as_matrix: cannot view " + shape_str(t.shape) + " as " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  return MapM<T>(t.data.data(), rows, cols);
}

}  // namespace vesselcast::nn
