#pragma once

// Static temporal operators that the calibrated convolution is measured
// against: depthwise temporal conv, (2+1)D, 3D conv and temporal shift.

#include <cstddef>
#include <string>

#include "tada/core/ops.hpp"

namespace tada {

/// Per-channel 1-D temporal kernel beta[C, kt] (kt odd).
template <class T>
struct TemporalKernel {
  Tensor<T> beta;

  std::size_t channels() const { return beta.dim(0); }
  std::size_t size() const { return beta.dim(1); }
};

/// y_t = sum_j beta[:, j] * x_{t + j - (kt-1)/2}, per channel, zero padded in T.
template <class T>
Var<T> depthwise_temporal_conv(Var<T> x, Var<T> beta) {
  Tape<T>& tape = detail::same_tape(x, beta, "depthwise_temporal_conv");
  auto y = kernels::depthwise_temporal(x.value(), beta.value());
  return tape.record(std::move(y), {x.id, beta.id}, [x, beta](Tape<T>& tp, const Tensor<T>& gy) {
    kernels::depthwise_temporal_backward(tp.value(x.id), tp.value(beta.id), gy,
                                         tp.grad_buffer(x.id), tp.grad_buffer(beta.id));
  });
}

/// 3-D convolution with the same stride and zero padding on T, H and W.
template <class T>
Var<T> conv3d(Var<T> x, Var<T> w, std::size_t stride, std::size_t pad) {
  return conv3d(x, w, kernels::Conv3dGeometry{{stride, stride, stride}, {pad, pad, pad}});
}

/// Delays the first floor(fraction_fwd * C) channels by one frame and
/// advances the next floor(fraction_bwd * C); zero fill at clip boundaries.
template <class T>
Var<T> temporal_shift(Var<T> x, double fraction_fwd, double fraction_bwd) {
  if (x.value().rank() < 3) throw DimensionError("temporal_shift: need at least [N,C,T]");
  const auto groups = kernels::shift_groups(x.dim(1), fraction_fwd, fraction_bwd);
  auto y = kernels::temporal_shift(x.value(), groups);
  return x.tape->record(std::move(y), {x.id}, [x, groups](Tape<T>& tp, const Tensor<T>& gy) {
    tp.accumulate(x.id, kernels::temporal_shift(gy, groups, /*transpose=*/true));
  });
}

/// Spatial conv (stride 1, same padding) followed by a depthwise temporal
/// conv, optionally with ReLU in between:
///   x~_t = sum_j beta_j . act(W * x_{t+j-(kt-1)/2})
template <class T>
Var<T> r2plus1d_forward(Var<T> x, Var<T> w_spatial, Var<T> beta, bool with_activation) {
  const auto& ws = w_spatial.value();
  if (ws.rank() != 4 || ws.dim(2) % 2 == 0) {
    throw DimensionError("r2plus1d_forward: spatial kernel must be [Co,Ci,k,k] with k odd");
  }
  if (beta.value().rank() != 2 || beta.value().dim(0) != ws.dim(0)) {
    throw DimensionError("r2plus1d_forward: beta must be [Co, kt]");
  }
  Var<T> z = conv2d_per_frame(x, w_spatial, 1, (ws.dim(2) - 1) / 2);
  if (with_activation) z = relu(z);
  return depthwise_temporal_conv(z, beta);
}

}  // namespace tada
