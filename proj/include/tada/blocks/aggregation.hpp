#pragma once

// Temporal feature aggregation after a calibrated convolution:
//   x = ReLU(BN1(x~) + BN2(Pool_k(x~)))
// with BN2 zero-initialized so the branch contributes nothing at init.

#include <cstddef>
#include <string>
#include <vector>

#include "tada/core/ops.hpp"

namespace tada {

enum class PoolKind { avg, max, mix };

inline const char* to_string(PoolKind p) {
  switch (p) {
    case PoolKind::avg: return "avg";
    case PoolKind::max: return "max";
    case PoolKind::mix: return "mix";
  }
  return "?";
}

/// Which terms of the aggregation formula are active.
///   use_aggregation=false                  ReLU(BN1(x~))
///   use_aggregation, !use_shortcut_branch  ReLU(BN1(Pool(x~)))
///   shortcut, !separate_bn                 ReLU(BN1(x~ + Pool(x~)))
///   shortcut, separate_bn                  ReLU(BN1(x~) + BN2(Pool(x~)))
struct BlockVariantFlags {
  bool use_aggregation = true;
  bool use_shortcut_branch = true;
  bool separate_bn = true;

  void validate() const {
    if (separate_bn && !use_shortcut_branch) {
      throw ConfigError("aggregation: separate BN requires the shortcut branch");
    }
    if (use_shortcut_branch && !use_aggregation) {
      throw ConfigError("aggregation: shortcut branch requires aggregation");
    }
  }

  static BlockVariantFlags none() { return {false, false, false}; }
};

template <class T>
struct AggregationParams {
  BatchNorm<T> bn1;
  BatchNorm<T> bn2;
  PoolKind pool = PoolKind::avg;
  std::size_t k = 3;

  AggregationParams() = default;
  /// bn1 is named `bn1_name` so it lines up with the BN that follows a
  /// plain convolution in the equivalent static block.
  AggregationParams(const std::string& bn1_name, const std::string& bn2_name, std::size_t channels,
                    PoolKind kind = PoolKind::avg, std::size_t window = 3)
      : bn1(bn1_name, channels), bn2(bn2_name, channels), pool(kind), k(window) {
    bn2.zero();
  }
};

template <class T>
Var<T> temporal_pool(Var<T> x, PoolKind kind, std::size_t k) {
  switch (kind) {
    case PoolKind::avg: return temporal_avg_pool(x, k);
    case PoolKind::max: return temporal_max_pool(x, k);
    case PoolKind::mix: return scale(add(temporal_avg_pool(x, k), temporal_max_pool(x, k)), T(0.5));
  }
  throw ConfigError("aggregation: unknown pool kind");
}

template <class T>
Var<T> aggregate(Var<T> x, AggregationParams<T>& p, const BlockVariantFlags& flags, Mode mode) {
  flags.validate();
  if (x.value().rank() < 3) throw DimensionError("aggregate: need [N,C,T,...]");
  if (p.k > x.dim(2)) throw ParameterError("aggregate: pooling window larger than T");
  if (!flags.use_aggregation) return relu(batchnorm(x, p.bn1, mode));
  Var<T> pooled = temporal_pool(x, p.pool, p.k);
  if (!flags.use_shortcut_branch) return relu(batchnorm(pooled, p.bn1, mode));
  if (!flags.separate_bn) return relu(batchnorm(add(x, pooled), p.bn1, mode));
  return relu(add(batchnorm(x, p.bn1, mode), batchnorm(pooled, p.bn2, mode)));
}

}  // namespace tada
