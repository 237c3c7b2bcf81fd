#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tada/core/errors.hpp"

namespace tada {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

/// Dense row-major N-D array. Video-shaped values use [N, C, T, H, W].
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != data_.size()) {
      throw DimensionError("tensor: shape " + shape_str(shape_) + " holds " +
                           std::to_string(shape_numel(shape_)) + " elements, got " +
                           std::to_string(data_.size()));
    }
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), T(0)); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), T(1)); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
      throw DimensionError("tensor: axis " + std::to_string(axis) + " out of range for " +
                           shape_str(shape_));
    }
    return shape_[axis];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& vec() const noexcept { return data_; }

  T& flat(std::size_t i) {
    check_flat(i);
    return data_[i];
  }
  const T& flat(std::size_t i) const {
    check_flat(i);
    return data_[i];
  }

  template <class... Idx>
  T& at(Idx... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <class... Idx>
  const T& at(Idx... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape_.size()) {
      throw DimensionError("tensor: rank-" + std::to_string(idx.size()) + " index into " +
                           shape_str(shape_));
    }
    std::size_t off = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx) {
      if (i >= shape_[axis]) {
        throw DimensionError("tensor: index " + std::to_string(i) + " out of bounds on axis " +
                             std::to_string(axis) + " of " + shape_str(shape_));
      }
      off = off * shape_[axis] + i;
      ++axis;
    }
    return off;
  }

  Tensor reshaped(Shape shape) const {
    if (shape_numel(shape) != numel()) {
      throw DimensionError("reshape: " + shape_str(shape_) + " -> " + shape_str(shape));
    }
    return Tensor(std::move(shape), data_);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <class U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  Tensor& operator+=(const Tensor& other) {
    require_same_shape(other, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Tensor& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  void require_same_shape(const Tensor& other, const char* what) const {
    if (other.shape_ != shape_) {
      throw DimensionError(std::string(what) + ": shape " + shape_str(shape_) + " vs " +
                           shape_str(other.shape_));
    }
  }

 private:
  void check_flat(std::size_t i) const {
    if (i >= data_.size()) {
      throw DimensionError("tensor: flat index " + std::to_string(i) + " out of bounds (" +
                           std::to_string(data_.size()) + ")");
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

template <class T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  a.require_same_shape(b, "max_abs_diff");
  T worst = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    worst = std::max(worst, a.data()[i] > b.data()[i] ? a.data()[i] - b.data()[i]
                                                      : b.data()[i] - a.data()[i]);
  }
  return worst;
}

template <class T>
T max_abs(const Tensor<T>& a) {
  T worst = 0;
  for (T v : a.data()) worst = std::max(worst, v < 0 ? -v : v);
  return worst;
}

/// Extents of a [N, C, T, H, W] tensor.
struct VideoDims {
  std::size_t n, c, t, h, w;
};

template <class T>
VideoDims video_dims(const Tensor<T>& x, const char* what) {
  if (x.rank() != 5) {
    throw DimensionError(std::string(what) + ": expected [N,C,T,H,W], got " +
                         shape_str(x.shape()));
  }
  const auto& s = x.shape();
  return {s[0], s[1], s[2], s[3], s[4]};
}

}  // namespace tada
