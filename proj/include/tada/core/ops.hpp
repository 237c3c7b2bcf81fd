#pragma once

// Differentiable operators recorded on a Tape. Each forward is a kernel from
// kernels.hpp; each backward accumulates into the gradients of its inputs.

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "tada/core/kernels.hpp"
#include "tada/core/tape.hpp"

namespace tada {

namespace detail {
template <class T>
Tape<T>& same_tape(const Var<T>& a, const Var<T>& b, const char* what) {
  if (a.tape != b.tape || a.tape == nullptr) {
    throw UsageError(std::string(what) + ": operands live on different tapes");
  }
  return *a.tape;
}
}  // namespace detail

// --- convolutions -----------------------------------------------------------

template <class T>
Var<T> conv3d(Var<T> x, Var<T> w, const kernels::Conv3dGeometry& g) {
  Tape<T>& tape = detail::same_tape(x, w, "conv3d");
  auto y = kernels::conv3d_forward(x.value(), w.value(), g);
  return tape.record(std::move(y), {x.id, w.id}, [x, w, g](Tape<T>& tp, const Tensor<T>& gy) {
    kernels::conv3d_backward(tp.value(x.id), tp.value(w.id), g, gy, tp.grad_buffer(x.id),
                             tp.grad_buffer(w.id));
  });
}

/// Spatial convolution applied to every frame with the same kernel
/// w[Co, Ci, k, k]. Output extent (H + 2 pad - k) / stride + 1.
template <class T>
Var<T> conv2d_per_frame(Var<T> x, Var<T> w, std::size_t stride, std::size_t pad) {
  Tape<T>& tape = detail::same_tape(x, w, "conv2d_per_frame");
  const auto& ws = w.value();
  if (ws.rank() != 4) throw DimensionError("conv2d_per_frame: kernel must be [Co,Ci,k,k]");
  if (x.value().rank() == 5 && ws.dim(1) != x.dim(1)) {
    throw DimensionError("conv2d_per_frame: kernel expects " + std::to_string(ws.dim(1)) +
                         " input channels, input has " + std::to_string(x.dim(1)));
  }
  const Shape w5{ws.dim(0), ws.dim(1), 1, ws.dim(2), ws.dim(3)};
  const kernels::Conv3dGeometry g{{1, stride, stride}, {0, pad, pad}};
  auto y = kernels::conv3d_forward(x.value(), ws.reshaped(w5), g);
  return tape.record(std::move(y), {x.id, w.id}, [x, w, g, w5](Tape<T>& tp, const Tensor<T>& gy) {
    const auto& wv = tp.value(w.id);
    Tensor<T>* gw = tp.grad_buffer(w.id);
    Tensor<T> gw5;
    if (gw) gw5 = Tensor<T>::zeros(w5);
    kernels::conv3d_backward(tp.value(x.id), wv.reshaped(w5), g, gy, tp.grad_buffer(x.id),
                             gw ? &gw5 : nullptr);
    if (gw) *gw += gw5.reshaped(wv.shape());
  });
}

/// 1-D convolution along T of a [N, C, T] sequence with w[Co, C, k].
template <class T>
Var<T> conv1d_temporal(Var<T> v, Var<T> w, std::size_t stride, std::size_t pad) {
  Tape<T>& tape = detail::same_tape(v, w, "conv1d_temporal");
  const auto& vs = v.value();
  const auto& ws = w.value();
  if (vs.rank() != 3) throw DimensionError("conv1d_temporal: input must be [N,C,T]");
  if (ws.rank() != 3) throw DimensionError("conv1d_temporal: kernel must be [Co,C,k]");
  if (ws.dim(1) != vs.dim(1)) {
    throw DimensionError("conv1d_temporal: kernel expects " + std::to_string(ws.dim(1)) +
                         " channels, input has " + std::to_string(vs.dim(1)));
  }
  if (ws.dim(2) % 2 == 0) throw ParameterError("conv1d_temporal: kernel size must be odd");
  const Shape x5{vs.dim(0), vs.dim(1), vs.dim(2), 1, 1};
  const Shape w5{ws.dim(0), ws.dim(1), ws.dim(2), 1, 1};
  const kernels::Conv3dGeometry g{{stride, 1, 1}, {pad, 0, 0}};
  auto y5 = kernels::conv3d_forward(vs.reshaped(x5), ws.reshaped(w5), g);
  Shape ys{y5.dim(0), y5.dim(1), y5.dim(2)};
  return tape.record(y5.reshaped(ys), {v.id, w.id},
                     [v, w, g, x5, w5](Tape<T>& tp, const Tensor<T>& gy) {
                       const auto& vv = tp.value(v.id);
                       const auto& wv = tp.value(w.id);
                       Tensor<T>* gv = tp.grad_buffer(v.id);
                       Tensor<T>* gw = tp.grad_buffer(w.id);
                       Tensor<T> gv5, gw5;
                       if (gv) gv5 = Tensor<T>::zeros(x5);
                       if (gw) gw5 = Tensor<T>::zeros(w5);
                       Shape gys{gy.dim(0), gy.dim(1), gy.dim(2), 1, 1};
                       kernels::conv3d_backward(vv.reshaped(x5), wv.reshaped(w5), g,
                                                gy.reshaped(gys), gv ? &gv5 : nullptr,
                                                gw ? &gw5 : nullptr);
                       if (gv) *gv += gv5.reshaped(vv.shape());
                       if (gw) *gw += gw5.reshaped(wv.shape());
                     });
}

/// Per-frame convolution with a distinct kernel per (n, t):
/// kernels[N, T, Co, Ci, k, k].
template <class T>
Var<T> dynamic_conv2d(Var<T> x, Var<T> kernels_var, std::size_t stride, std::size_t pad) {
  Tape<T>& tape = detail::same_tape(x, kernels_var, "dynamic_conv2d");
  auto y = kernels::dynamic_conv2d_forward(x.value(), kernels_var.value(), stride, pad);
  return tape.record(std::move(y), {x.id, kernels_var.id},
                     [x, kernels_var, stride, pad](Tape<T>& tp, const Tensor<T>& gy) {
                       kernels::dynamic_conv2d_backward(
                           tp.value(x.id), tp.value(kernels_var.id), stride, pad, gy,
                           tp.grad_buffer(x.id), tp.grad_buffer(kernels_var.id));
                     });
}

// --- pooling ----------------------------------------------------------------

namespace detail {
template <class T>
Var<T> mean_keep(Var<T> x, std::size_t keep) {
  auto y = kernels::mean_trailing(x.value(), keep);
  const std::size_t inner = y.numel() ? x.value().numel() / y.numel() : 1;
  return x.tape->record(std::move(y), {x.id}, [x, inner](Tape<T>& tp, const Tensor<T>& gy) {
    if (Tensor<T>* gx = tp.grad_buffer(x.id))
      kernels::spread_trailing(gy, T(1) / static_cast<T>(inner), *gx);
  });
}
}  // namespace detail

/// [N, C, T, H, W] -> [N, C, T], mean over each frame.
template <class T>
Var<T> gap_spatial(Var<T> x) {
  const auto d = video_dims(x.value(), "gap_spatial");
  if (d.h < 1 || d.w < 1) throw DimensionError("gap_spatial: empty frame");
  return detail::mean_keep(x, 3);
}

/// [N, C, T, H, W] -> [N, C], mean over the whole clip.
template <class T>
Var<T> gap_spatiotemporal(Var<T> x) {
  const auto d = video_dims(x.value(), "gap_spatiotemporal");
  if (d.t < 1 || d.h < 1 || d.w < 1) throw DimensionError("gap_spatiotemporal: empty clip");
  const std::size_t inner = d.t * d.h * d.w;
  return x.tape->record(kernels::clip_mean(x.value()), {x.id}, [x, inner](Tape<T>& tp, const Tensor<T>& gy) {
    if (Tensor<T>* gx = tp.grad_buffer(x.id))
      kernels::spread_trailing(gy, T(1) / static_cast<T>(inner), *gx);
  });
}

/// Same-length strided-window temporal pooling; see kernels::temporal_avg_pool.
template <class T>
Var<T> temporal_avg_pool(Var<T> x, std::size_t k) {
  auto y = kernels::temporal_avg_pool(x.value(), k);
  return x.tape->record(std::move(y), {x.id}, [x, k](Tape<T>& tp, const Tensor<T>& gy) {
    if (Tensor<T>* gx = tp.grad_buffer(x.id)) kernels::temporal_avg_pool_backward(gy, k, *gx);
  });
}

template <class T>
Var<T> temporal_max_pool(Var<T> x, std::size_t k) {
  auto arg = std::make_shared<std::vector<std::size_t>>();
  double margin = 0;
  auto y = kernels::temporal_max_pool(x.value(), k, arg.get(), &margin);
  x.tape->note_kink(margin);
  return x.tape->record(std::move(y), {x.id}, [x, arg](Tape<T>& tp, const Tensor<T>& gy) {
    if (Tensor<T>* gx = tp.grad_buffer(x.id))
      for (std::size_t i = 0; i < gy.numel(); ++i) gx->data()[(*arg)[i]] += gy.data()[i];
  });
}

// --- normalization ----------------------------------------------------------

enum class Mode { train, eval };

/// Affine batch normalization over every axis except the channel axis (1).
template <class T>
struct BatchNorm {
  Parameter<T> gamma;
  Parameter<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  T eps = T(1e-5);
  T momentum = T(0.9);  // running <- momentum * running + (1 - momentum) * batch

  BatchNorm() = default;
  BatchNorm(std::string name, std::size_t channels)
      : gamma(name + ".gamma", Tensor<T>::ones({channels})),
        beta(name + ".beta", Tensor<T>::zeros({channels})),
        running_mean(Tensor<T>::zeros({channels})),
        running_var(Tensor<T>::ones({channels})) {}

  std::size_t channels() const { return gamma.value.numel(); }

  /// Zero scale and shift: the layer outputs exactly 0.
  void zero() {
    gamma.value.fill(T(0));
    beta.value.fill(T(0));
  }
};

template <class T>
Var<T> batchnorm(Var<T> x, BatchNorm<T>& bn, Mode mode) {
  if (!(bn.eps > T(0))) throw ParameterError("batchnorm: eps must be > 0");
  const auto L = kernels::channel_layout(x.value(), "batchnorm");
  if (bn.gamma.value.numel() != L.c || bn.beta.value.numel() != L.c ||
      bn.running_mean.numel() != L.c || bn.running_var.numel() != L.c) {
    throw DimensionError("batchnorm: parameters sized for " + std::to_string(bn.channels()) +
                         " channels, input has " + std::to_string(L.c));
  }
  Tape<T>& tape = *x.tape;
  Var<T> gamma = tape.parameter(bn.gamma);
  Var<T> beta = tape.parameter(bn.beta);
  const auto& xs = x.value().data();
  const std::size_t m = L.n * L.inner;
  if (m == 0) throw DimensionError("batchnorm: empty batch");

  Tensor<T> mean({L.c}), inv_std({L.c});
  if (mode == Mode::train) {
    Tensor<T> var({L.c});
    for (std::size_t c = 0; c < L.c; ++c) {
      T acc = 0;
      for (std::size_t n = 0; n < L.n; ++n)
        for (std::size_t i = 0; i < L.inner; ++i) acc += xs[(n * L.c + c) * L.inner + i];
      const T mu = acc / static_cast<T>(m);
      T sq = 0;
      for (std::size_t n = 0; n < L.n; ++n)
        for (std::size_t i = 0; i < L.inner; ++i) {
          const T dlt = xs[(n * L.c + c) * L.inner + i] - mu;
          sq += dlt * dlt;
        }
      const T v = sq / static_cast<T>(m);
      mean.data()[c] = mu;
      var.data()[c] = v;
      inv_std.data()[c] = T(1) / std::sqrt(v + bn.eps);
      const T unbiased = m > 1 ? v * static_cast<T>(m) / static_cast<T>(m - 1) : v;
      bn.running_mean.data()[c] = bn.momentum * bn.running_mean.data()[c] + (T(1) - bn.momentum) * mu;
      bn.running_var.data()[c] = bn.momentum * bn.running_var.data()[c] + (T(1) - bn.momentum) * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < L.c; ++c) {
      mean.data()[c] = bn.running_mean.data()[c];
      inv_std.data()[c] = T(1) / std::sqrt(bn.running_var.data()[c] + bn.eps);
    }
  }

  Tensor<T> xhat(x.value().shape());
  Tensor<T> y(x.value().shape());
  const auto& gs = gamma.value().data();
  const auto& bs = beta.value().data();
  for (std::size_t n = 0; n < L.n; ++n)
    for (std::size_t c = 0; c < L.c; ++c)
      for (std::size_t i = 0; i < L.inner; ++i) {
        const std::size_t idx = (n * L.c + c) * L.inner + i;
        const T h = (xs[idx] - mean.data()[c]) * inv_std.data()[c];
        xhat.data()[idx] = h;
        y.data()[idx] = gs[c] * h + bs[c];
      }

  auto saved_xhat = std::make_shared<Tensor<T>>(std::move(xhat));
  return tape.record(
      std::move(y), {x.id, gamma.id, beta.id},
      [x, gamma, beta, L, m, mode, inv_std, saved_xhat](Tape<T>& tp, const Tensor<T>& gy) {
        const auto& gv = tp.value(gamma.id).data();
        const auto& xh = saved_xhat->data();
        const auto& g = gy.data();
        Tensor<T>* gx = tp.grad_buffer(x.id);
        Tensor<T>* ggamma = tp.grad_buffer(gamma.id);
        Tensor<T>* gbeta = tp.grad_buffer(beta.id);
        for (std::size_t c = 0; c < L.c; ++c) {
          T sum_g = 0, sum_gx = 0;
          for (std::size_t n = 0; n < L.n; ++n)
            for (std::size_t i = 0; i < L.inner; ++i) {
              const std::size_t idx = (n * L.c + c) * L.inner + i;
              sum_g += g[idx];
              sum_gx += g[idx] * xh[idx];
            }
          if (ggamma) ggamma->data()[c] += sum_gx;
          if (gbeta) gbeta->data()[c] += sum_g;
          if (!gx) continue;
          const T scale = gv[c] * inv_std.data()[c];
          for (std::size_t n = 0; n < L.n; ++n)
            for (std::size_t i = 0; i < L.inner; ++i) {
              const std::size_t idx = (n * L.c + c) * L.inner + i;
              if (mode == Mode::train) {
                gx->data()[idx] += scale * (g[idx] - sum_g / static_cast<T>(m) -
                                            xh[idx] * sum_gx / static_cast<T>(m));
              } else {
                gx->data()[idx] += scale * g[idx];
              }
            }
        }
      });
}

// --- pointwise --------------------------------------------------------------

template <class T>
Var<T> relu(Var<T> x) {
  Tensor<T> y(x.value().shape());
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.numel(); ++i) {
    const T v = x.value().data()[i];
    y.data()[i] = v > T(0) ? v : T(0);
    margin = std::min(margin, static_cast<double>(std::abs(v)));
  }
  x.tape->note_kink(margin);
  return x.tape->record(std::move(y), {x.id}, [x](Tape<T>& tp, const Tensor<T>& gy) {
    Tensor<T>* gx = tp.grad_buffer(x.id);
    if (!gx) return;
    const auto& xs = tp.value(x.id).data();
    for (std::size_t i = 0; i < gy.numel(); ++i)
      if (xs[i] > T(0)) gx->data()[i] += gy.data()[i];
  });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& tape = detail::same_tape(a, b, "add");
  Tensor<T> y = a.value();
  y += b.value();
  return tape.record(std::move(y), {a.id, b.id}, [a, b](Tape<T>& tp, const Tensor<T>& gy) {
    tp.accumulate(a.id, gy);
    tp.accumulate(b.id, gy);
  });
}

/// Elementwise product of same-shape tensors.
template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  Tape<T>& tape = detail::same_tape(a, b, "mul");
  a.value().require_same_shape(b.value(), "mul");
  Tensor<T> y = a.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y.data()[i] *= b.value().data()[i];
  return tape.record(std::move(y), {a.id, b.id}, [a, b](Tape<T>& tp, const Tensor<T>& gy) {
    if (Tensor<T>* ga = tp.grad_buffer(a.id))
      for (std::size_t i = 0; i < gy.numel(); ++i)
        ga->data()[i] += gy.data()[i] * tp.value(b.id).data()[i];
    if (Tensor<T>* gb = tp.grad_buffer(b.id))
      for (std::size_t i = 0; i < gy.numel(); ++i)
        gb->data()[i] += gy.data()[i] * tp.value(a.id).data()[i];
  });
}

template <class T>
Var<T> scale(Var<T> x, T s) {
  Tensor<T> y = x.value();
  y *= s;
  return x.tape->record(std::move(y), {x.id}, [x, s](Tape<T>& tp, const Tensor<T>& gy) {
    Tensor<T> g = gy;
    g *= s;
    tp.accumulate(x.id, g);
  });
}

template <class T>
Var<T> add_scalar(Var<T> x, T s) {
  Tensor<T> y = x.value();
  for (auto& v : y.data()) v += s;
  return x.tape->record(std::move(y), {x.id},
                        [x](Tape<T>& tp, const Tensor<T>& gy) { tp.accumulate(x.id, gy); });
}

template <class T>
Var<T> sum(Var<T> x) {
  T acc = 0;
  for (T v : x.value().data()) acc += v;
  return x.tape->record(Tensor<T>({1}, {acc}), {x.id}, [x](Tape<T>& tp, const Tensor<T>& gy) {
    if (Tensor<T>* gx = tp.grad_buffer(x.id))
      for (auto& v : gx->data()) v += gy.data()[0];
  });
}

template <class T>
Var<T> mean(Var<T> x) {
  return scale(sum(x), T(1) / static_cast<T>(x.value().numel()));
}

/// sum(x * weights) for a constant weight tensor; the standard random
/// projection used to reduce a tensor output to a scalar loss.
template <class T>
Var<T> weighted_sum(Var<T> x, const Tensor<T>& weights) {
  x.value().require_same_shape(weights, "weighted_sum");
  T acc = 0;
  for (std::size_t i = 0; i < weights.numel(); ++i) acc += x.value().data()[i] * weights.data()[i];
  return x.tape->record(Tensor<T>({1}, {acc}), {x.id},
                        [x, weights](Tape<T>& tp, const Tensor<T>& gy) {
                          if (Tensor<T>* gx = tp.grad_buffer(x.id))
                            for (std::size_t i = 0; i < weights.numel(); ++i)
                              gx->data()[i] += gy.data()[0] * weights.data()[i];
                        });
}

template <class T>
Var<T> reshape(Var<T> x, Shape shape) {
  auto y = x.value().reshaped(std::move(shape));
  return x.tape->record(std::move(y), {x.id}, [x](Tape<T>& tp, const Tensor<T>& gy) {
    tp.accumulate(x.id, gy.reshaped(tp.value(x.id).shape()));
  });
}

/// [N, C] -> [N, C, T] by repetition.
template <class T>
Var<T> repeat_time(Var<T> x, std::size_t t) {
  const auto& xs = x.value();
  if (xs.rank() != 2) throw DimensionError("repeat_time: input must be [N,C]");
  Tensor<T> y({xs.dim(0), xs.dim(1), t});
  for (std::size_t o = 0; o < xs.numel(); ++o)
    for (std::size_t j = 0; j < t; ++j) y.data()[o * t + j] = xs.data()[o];
  return x.tape->record(std::move(y), {x.id}, [x, t](Tape<T>& tp, const Tensor<T>& gy) {
    if (Tensor<T>* gx = tp.grad_buffer(x.id))
      for (std::size_t o = 0; o < gx->numel(); ++o)
        for (std::size_t j = 0; j < t; ++j) gx->data()[o] += gy.data()[o * t + j];
  });
}

/// Fully connected layer: x[N, Cin] w[Cout, Cin] (+ b[Cout]) -> [N, Cout].
template <class T>
Var<T> linear(Var<T> x, Var<T> w, const Var<T>* b = nullptr) {
  Tape<T>& tape = detail::same_tape(x, w, "linear");
  const auto& xs = x.value();
  const auto& ws = w.value();
  if (xs.rank() != 2 || ws.rank() != 2 || ws.dim(1) != xs.dim(1)) {
    throw DimensionError("linear: input " + shape_str(xs.shape()) + " vs weight " +
                         shape_str(ws.shape()));
  }
  const std::size_t n_n = xs.dim(0), cin = xs.dim(1), cout = ws.dim(0);
  if (b && (b->value().rank() != 1 || b->value().dim(0) != cout)) {
    throw DimensionError("linear: bias must be [Cout]");
  }
  Tensor<T> y({n_n, cout});
  for (std::size_t n = 0; n < n_n; ++n)
    for (std::size_t o = 0; o < cout; ++o) {
      T acc = b ? b->value().data()[o] : T(0);
      for (std::size_t i = 0; i < cin; ++i) acc += ws.data()[o * cin + i] * xs.data()[n * cin + i];
      y.data()[n * cout + o] = acc;
    }
  std::vector<std::size_t> inputs{x.id, w.id};
  const bool has_bias = b != nullptr;
  const std::size_t bid = b ? b->id : 0;
  if (b) inputs.push_back(b->id);
  return tape.record(std::move(y), std::move(inputs),
                     [x, w, has_bias, bid, n_n, cin, cout](Tape<T>& tp, const Tensor<T>& gy) {
                       const auto& xv = tp.value(x.id).data();
                       const auto& wv = tp.value(w.id).data();
                       Tensor<T>* gx = tp.grad_buffer(x.id);
                       Tensor<T>* gw = tp.grad_buffer(w.id);
                       Tensor<T>* gb = has_bias ? tp.grad_buffer(bid) : nullptr;
                       for (std::size_t n = 0; n < n_n; ++n)
                         for (std::size_t o = 0; o < cout; ++o) {
                           const T g = gy.data()[n * cout + o];
                           if (gb) gb->data()[o] += g;
                           for (std::size_t i = 0; i < cin; ++i) {
                             if (gx) gx->data()[n * cin + i] += g * wv[o * cin + i];
                             if (gw) gw->data()[o * cin + i] += g * xv[n * cin + i];
                           }
                         }
                     });
}

/// Mean softmax cross-entropy of logits[N, K] against integer labels.
template <class T>
Var<T> softmax_cross_entropy(Var<T> logits, const std::vector<std::size_t>& labels) {
  const auto& z = logits.value();
  if (z.rank() != 2 || z.dim(0) != labels.size()) {
    throw DimensionError("softmax_cross_entropy: logits " + shape_str(z.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
  }
  const std::size_t n_n = z.dim(0), k = z.dim(1);
  Tensor<T> prob({n_n, k});
  T loss = 0;
  for (std::size_t n = 0; n < n_n; ++n) {
    if (labels[n] >= k) throw ParameterError("softmax_cross_entropy: label out of range");
    T mx = z.data()[n * k];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, z.data()[n * k + j]);
    T denom = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const T e = std::exp(z.data()[n * k + j] - mx);
      prob.data()[n * k + j] = e;
      denom += e;
    }
    for (std::size_t j = 0; j < k; ++j) prob.data()[n * k + j] /= denom;
    loss -= std::log(prob.data()[n * k + labels[n]]);
  }
  loss /= static_cast<T>(n_n);
  return logits.tape->record(Tensor<T>({1}, {loss}), {logits.id},
                             [logits, prob, labels, n_n, k](Tape<T>& tp, const Tensor<T>& gy) {
                               Tensor<T>* gz = tp.grad_buffer(logits.id);
                               if (!gz) return;
                               const T s = gy.data()[0] / static_cast<T>(n_n);
                               for (std::size_t n = 0; n < n_n; ++n)
                                 for (std::size_t j = 0; j < k; ++j) {
                                   const T target = j == labels[n] ? T(1) : T(0);
                                   gz->data()[n * k + j] += s * (prob.data()[n * k + j] - target);
                                 }
                             });
}

}  // namespace tada
