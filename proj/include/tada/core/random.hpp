#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tada/core/tensor.hpp"

namespace tada {

using Rng = std::mt19937_64;

template <class T>
Tensor<T> random_uniform(Shape shape, Rng& rng, T lo = T(-1), T hi = T(1)) {
  Tensor<T> t(std::move(shape));
  std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

template <class T>
Tensor<T> random_normal(Shape shape, Rng& rng, T stddev = T(1)) {
  Tensor<T> t(std::move(shape));
  std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

/// He-style uniform init for ReLU networks: U(-b, b), b = sqrt(6 / fan_in).
template <class T>
void kaiming_uniform(Tensor<T>& w, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in ? fan_in : 1));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : w.data()) v = static_cast<T>(dist(rng));
}

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace tada
