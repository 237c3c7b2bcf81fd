#pragma once

// Forward and backward kernels on plain tensors. Direct loops, cross-correlation
// convention, zero padding unless stated. The differentiable wrappers in ops.hpp
// record these on a tape.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tada/core/tensor.hpp"

namespace tada::kernels {

struct Conv3dGeometry {
  std::array<std::size_t, 3> stride{1, 1, 1};  // t, h, w
  std::array<std::size_t, 3> pad{0, 0, 0};
};

inline std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t stride,
                                   std::size_t pad, const char* what) {
  if (stride == 0) throw ParameterError(std::string(what) + ": stride must be >= 1");
  if (in + 2 * pad < k) {
    throw DimensionError(std::string(what) + ": input extent " + std::to_string(in) +
                         " with pad " + std::to_string(pad) + " is smaller than kernel " +
                         std::to_string(k));
  }
  return (in + 2 * pad - k) / stride + 1;
}

/// Output positions [lo, hi) whose input index o * stride + tap - pad falls
/// inside [0, in). Hoists padding checks out of the inner loops.
struct TapRange {
  std::size_t lo = 0, hi = 0;
};

inline TapRange tap_range(std::size_t out, std::size_t stride, std::size_t tap, std::size_t pad,
                          std::size_t in) {
  if (in + pad < tap + 1) return {};
  const std::size_t lo = tap >= pad ? 0 : (pad - tap + stride - 1) / stride;
  const std::size_t hi = std::min(out, (in - 1 + pad - tap) / stride + 1);
  return {lo, std::max(lo, hi)};
}

/// Receptive-field layout of one output frame: rows are (ci, dt, dy, dx),
/// columns are output pixels. Convolution becomes a dense product over the
/// rows, which keeps the inner loops long and contiguous.
struct PatchLayout {
  std::size_t c, t, h, w;     // input extents of one sample
  std::size_t kt, kh, kw;     // kernel extents
  Conv3dGeometry g;
  std::size_t to, ho, wo;     // output extents

  std::size_t rows() const { return c * kt * kh * kw; }
  std::size_t cols() const { return ho * wo; }
};

inline PatchLayout patch_layout(const VideoDims& d, std::size_t kt, std::size_t kh, std::size_t kw,
                                const Conv3dGeometry& g, const char* what) {
  return {d.c, d.t, d.h, d.w, kt, kh, kw, g,
          conv_out_extent(d.t, kt, g.stride[0], g.pad[0], what),
          conv_out_extent(d.h, kh, g.stride[1], g.pad[1], what),
          conv_out_extent(d.w, kw, g.stride[2], g.pad[2], what)};
}

/// cols[rows, ho*wo] <- patches of output frame `ot`; `x` points at one
/// sample [C, T, H, W]. Out-of-range taps read as zero.
template <class T>
void im2col_frame(const T* x, const PatchLayout& L, std::size_t ot, T* cols) {
  const std::size_t P = L.cols();
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < L.c; ++ci)
    for (std::size_t a = 0; a < L.kt; ++a) {
      const long it = static_cast<long>(ot * L.g.stride[0] + a) - static_cast<long>(L.g.pad[0]);
      for (std::size_t b = 0; b < L.kh; ++b)
        for (std::size_t c = 0; c < L.kw; ++c, ++row) {
          T* dst = cols + row * P;
          std::fill(dst, dst + P, T(0));
          if (it < 0 || it >= static_cast<long>(L.t)) continue;
          const T* plane = x + (ci * L.t + static_cast<std::size_t>(it)) * L.h * L.w;
          const TapRange ry = tap_range(L.ho, L.g.stride[1], b, L.g.pad[1], L.h);
          const TapRange rx = tap_range(L.wo, L.g.stride[2], c, L.g.pad[2], L.w);
          for (std::size_t oy = ry.lo; oy < ry.hi; ++oy) {
            const T* src = plane + (oy * L.g.stride[1] + b - L.g.pad[1]) * L.w;
            for (std::size_t ox = rx.lo; ox < rx.hi; ++ox)
              dst[oy * L.wo + ox] = src[ox * L.g.stride[2] + c - L.g.pad[2]];
          }
        }
    }
}

/// Adjoint of im2col_frame: scatters cols back into gx (accumulating).
template <class T>
void col2im_frame(const T* cols, const PatchLayout& L, std::size_t ot, T* gx) {
  const std::size_t P = L.cols();
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < L.c; ++ci)
    for (std::size_t a = 0; a < L.kt; ++a) {
      const long it = static_cast<long>(ot * L.g.stride[0] + a) - static_cast<long>(L.g.pad[0]);
      for (std::size_t b = 0; b < L.kh; ++b)
        for (std::size_t c = 0; c < L.kw; ++c, ++row) {
          if (it < 0 || it >= static_cast<long>(L.t)) continue;
          const T* src = cols + row * P;
          T* plane = gx + (ci * L.t + static_cast<std::size_t>(it)) * L.h * L.w;
          const TapRange ry = tap_range(L.ho, L.g.stride[1], b, L.g.pad[1], L.h);
          const TapRange rx = tap_range(L.wo, L.g.stride[2], c, L.g.pad[2], L.w);
          for (std::size_t oy = ry.lo; oy < ry.hi; ++oy) {
            T* dst = plane + (oy * L.g.stride[1] + b - L.g.pad[1]) * L.w;
            for (std::size_t ox = rx.lo; ox < rx.hi; ++ox)
              dst[ox * L.g.stride[2] + c - L.g.pad[2]] += src[oy * L.wo + ox];
          }
        }
    }
}

namespace detail {

/// y[co, p] += sum_r w[co, r] * cols[r, p]; zero weights are skipped.
template <class T>
void patch_forward(const T* w, std::size_t co_n, const T* cols, std::size_t rows, std::size_t P,
                   T* y, std::size_t y_stride) {
  for (std::size_t co = 0; co < co_n; ++co) {
    T* yr = y + co * y_stride;
    const T* wr = w + co * rows;
    for (std::size_t r = 0; r < rows; ++r) {
      const T wv = wr[r];
      if (wv == T(0)) continue;
      const T* cr = cols + r * P;
      for (std::size_t p = 0; p < P; ++p) yr[p] += wv * cr[p];
    }
  }
}

/// gw[co, r] += sum_p gy[co, p] cols[r, p];  gcols[r, p] = sum_co w[co, r] gy[co, p].
template <class T>
void patch_backward(const T* w, std::size_t co_n, const T* cols, std::size_t rows, std::size_t P,
                    const T* gy, std::size_t gy_stride, T* gw, T* gcols) {
  if (gcols) std::fill(gcols, gcols + rows * P, T(0));
  for (std::size_t co = 0; co < co_n; ++co) {
    const T* gr = gy + co * gy_stride;
    for (std::size_t r = 0; r < rows; ++r) {
      const T* cr = cols + r * P;
      if (gw) {
        T acc = 0;
        for (std::size_t p = 0; p < P; ++p) acc += gr[p] * cr[p];
        gw[co * rows + r] += acc;
      }
      if (gcols) {
        const T wv = w[co * rows + r];
        T* dst = gcols + r * P;
        for (std::size_t p = 0; p < P; ++p) dst[p] += wv * gr[p];
      }
    }
  }
}

}  // namespace detail

/// y[n,co,t',h',w'] = sum_{ci,dt,dy,dx} w[co,ci,dt,dy,dx] * x[n,ci,t's+dt-p, ...]
template <class T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Tensor<T>& w, const Conv3dGeometry& g) {
  const auto d = video_dims(x, "conv3d");
  if (w.rank() != 5) throw DimensionError("conv3d: kernel must be [Co,Ci,kt,kh,kw]");
  if (w.dim(1) != d.c) {
    throw DimensionError("conv3d: kernel expects " + std::to_string(w.dim(1)) +
                         " input channels, input has " + std::to_string(d.c));
  }
  const std::size_t co_n = w.dim(0);
  const PatchLayout L = patch_layout(d, w.dim(2), w.dim(3), w.dim(4), g, "conv3d");
  const std::size_t P = L.cols(), R = L.rows(), sample = d.c * d.t * d.h * d.w;
  Tensor<T> y({d.n, co_n, L.to, L.ho, L.wo});
  std::vector<T> cols(R * P);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t ot = 0; ot < L.to; ++ot) {
      im2col_frame(x.data().data() + n * sample, L, ot, cols.data());
      detail::patch_forward(w.data().data(), co_n, cols.data(), R, P,
                            y.data().data() + (n * co_n * L.to + ot) * P, L.to * P);
    }
  return y;
}

template <class T>
void conv3d_backward(const Tensor<T>& x, const Tensor<T>& w, const Conv3dGeometry& g,
                     const Tensor<T>& gy, Tensor<T>* gx, Tensor<T>* gw) {
  const auto d = video_dims(x, "conv3d_backward");
  const std::size_t co_n = w.dim(0);
  const PatchLayout L = patch_layout(d, w.dim(2), w.dim(3), w.dim(4), g, "conv3d_backward");
  const std::size_t P = L.cols(), R = L.rows(), sample = d.c * d.t * d.h * d.w;
  std::vector<T> cols(R * P), gcols(gx ? R * P : 0);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t ot = 0; ot < L.to; ++ot) {
      im2col_frame(x.data().data() + n * sample, L, ot, cols.data());
      detail::patch_backward(w.data().data(), co_n, cols.data(), R, P,
                             gy.data().data() + (n * co_n * L.to + ot) * P, L.to * P,
                             gw ? gw->data().data() : nullptr, gx ? gcols.data() : nullptr);
      if (gx) col2im_frame(gcols.data(), L, ot, gx->data().data() + n * sample);
    }
}

/// Per-frame 2-D convolution where every (n, t) has its own kernel:
/// kernels is [N, T, Co, Ci, k, k].
template <class T>
Tensor<T> dynamic_conv2d_forward(const Tensor<T>& x, const Tensor<T>& kernels,
                                 std::size_t stride, std::size_t pad) {
  const auto d = video_dims(x, "dynamic_conv2d");
  if (kernels.rank() != 6 || kernels.dim(0) != d.n || kernels.dim(1) != d.t ||
      kernels.dim(3) != d.c) {
    throw DimensionError("dynamic_conv2d: kernels " + shape_str(kernels.shape()) +
                         " do not match input " + shape_str(x.shape()));
  }
  const std::size_t co_n = kernels.dim(2);
  const Conv3dGeometry g{{1, stride, stride}, {0, pad, pad}};
  const PatchLayout L = patch_layout(d, 1, kernels.dim(4), kernels.dim(5), g, "dynamic_conv2d");
  const std::size_t P = L.cols(), R = L.rows(), sample = d.c * d.t * d.h * d.w;
  Tensor<T> y({d.n, co_n, d.t, L.ho, L.wo});
  std::vector<T> cols(R * P);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t t = 0; t < d.t; ++t) {
      im2col_frame(x.data().data() + n * sample, L, t, cols.data());
      detail::patch_forward(kernels.data().data() + (n * d.t + t) * co_n * R, co_n, cols.data(), R, P,
                            y.data().data() + (n * co_n * d.t + t) * P, d.t * P);
    }
  return y;
}

template <class T>
void dynamic_conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernels, std::size_t stride,
                             std::size_t pad, const Tensor<T>& gy, Tensor<T>* gx,
                             Tensor<T>* gk) {
  const auto d = video_dims(x, "dynamic_conv2d_backward");
  const std::size_t co_n = kernels.dim(2);
  const Conv3dGeometry g{{1, stride, stride}, {0, pad, pad}};
  const PatchLayout L =
      patch_layout(d, 1, kernels.dim(4), kernels.dim(5), g, "dynamic_conv2d_backward");
  const std::size_t P = L.cols(), R = L.rows(), sample = d.c * d.t * d.h * d.w;
  std::vector<T> cols(R * P), gcols(gx ? R * P : 0);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t t = 0; t < d.t; ++t) {
      const std::size_t kofs = (n * d.t + t) * co_n * R;
      im2col_frame(x.data().data() + n * sample, L, t, cols.data());
      detail::patch_backward(kernels.data().data() + kofs, co_n, cols.data(), R, P,
                             gy.data().data() + (n * co_n * d.t + t) * P, d.t * P,
                             gk ? gk->data().data() + kofs : nullptr, gx ? gcols.data() : nullptr);
      if (gx) col2im_frame(gcols.data(), L, t, gx->data().data() + n * sample);
    }
}

/// Mean over every axis after `keep` leading axes: [A..., rest...] -> [A...].
template <class T>
Tensor<T> mean_trailing(const Tensor<T>& x, std::size_t keep) {
  if (keep > x.rank()) throw DimensionError("mean_trailing: too few axes");
  Shape out_shape(x.shape().begin(), x.shape().begin() + static_cast<long>(keep));
  const std::size_t outer = shape_numel(out_shape);
  if (outer == 0) return Tensor<T>(out_shape);
  const std::size_t inner = x.numel() / outer;
  if (inner == 0) throw DimensionError("mean_trailing: empty reduction");
  Tensor<T> y(out_shape);
  auto xs = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    T acc = 0;
    for (std::size_t i = 0; i < inner; ++i) acc += xs[o * inner + i];
    y.data()[o] = acc / static_cast<T>(inner);
  }
  return y;
}

/// [N, C, T, rest...] -> [N, C], mean over everything after C. Frame sums are
/// combined in mirrored pairs (t, T-1-t) so the result is bitwise invariant
/// to reversing the clip in time.
template <class T>
Tensor<T> clip_mean(const Tensor<T>& x) {
  if (x.rank() < 3) throw DimensionError("clip_mean: need [N,C,T,...]");
  const std::size_t n = x.dim(0), c = x.dim(1), t = x.dim(2);
  const std::size_t frame = t ? x.numel() / (n * c * t) : 0;
  if (t == 0 || frame == 0) throw DimensionError("clip_mean: empty reduction");
  Tensor<T> y({n, c});
  std::vector<T> sums(t);
  auto xs = x.data();
  for (std::size_t o = 0; o < n * c; ++o) {
    for (std::size_t f = 0; f < t; ++f) {
      T acc = 0;
      const T* p = xs.data() + (o * t + f) * frame;
      for (std::size_t i = 0; i < frame; ++i) acc += p[i];
      sums[f] = acc;
    }
    T acc = 0;
    for (std::size_t f = 0; f < t / 2; ++f) acc += sums[f] + sums[t - 1 - f];
    if (t % 2 == 1) acc += sums[t / 2];
    y.data()[o] = acc / static_cast<T>(t * frame);
  }
  return y;
}

/// Broadcast [A...] to [A..., inner] scaled by `scale` (backward of a mean).
template <class T>
void spread_trailing(const Tensor<T>& g, T scale, Tensor<T>& out) {
  const std::size_t outer = g.numel();
  const std::size_t inner = out.numel() / outer;
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) out.data()[o * inner + i] += g.data()[o] * scale;
}

/// Decompose a [N, C, rest...] tensor into (N, C, inner) for per-channel work.
struct ChannelLayout {
  std::size_t n, c, inner;
};

template <class T>
ChannelLayout channel_layout(const Tensor<T>& x, const char* what) {
  if (x.rank() < 2) throw DimensionError(std::string(what) + ": need at least [N,C]");
  const std::size_t outer = x.dim(0) * x.dim(1);
  return {x.dim(0), x.dim(1), outer != 0 ? x.numel() / outer : 0};
}

/// Decompose a [N, C, T, rest...] tensor into (outer = N*C, T, inner).
struct TimeLayout {
  std::size_t outer, t, inner;
};

template <class T>
TimeLayout time_layout(const Tensor<T>& x, const char* what) {
  if (x.rank() < 3) throw DimensionError(std::string(what) + ": need at least [N,C,T]");
  const std::size_t outer = x.dim(0) * x.dim(1);
  const std::size_t t = x.dim(2);
  const std::size_t inner = (outer * t != 0) ? x.numel() / (outer * t) : 0;
  return {outer, t, inner};
}

inline std::size_t clamp_index(long i, std::size_t n) {
  if (i < 0) return 0;
  if (i >= static_cast<long>(n)) return n - 1;
  return static_cast<std::size_t>(i);
}

/// Same-length temporal average pool, window k, stride 1, edge replication.
template <class T>
Tensor<T> temporal_avg_pool(const Tensor<T>& x, std::size_t k) {
  const auto L = time_layout(x, "temporal_avg_pool");
  if (k < 1) throw ParameterError("temporal_avg_pool: window must be >= 1");
  if (k > L.t) throw ParameterError("temporal_avg_pool: window larger than T");
  const long lo = static_cast<long>(k - 1) / 2;
  Tensor<T> y(x.shape());
  auto xs = x.data();
  auto ys = y.data();
  for (std::size_t o = 0; o < L.outer; ++o)
    for (std::size_t t = 0; t < L.t; ++t)
      for (std::size_t i = 0; i < L.inner; ++i) {
        T acc = 0;
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t s = clamp_index(static_cast<long>(t + j) - lo, L.t);
          acc += xs[(o * L.t + s) * L.inner + i];
        }
        ys[(o * L.t + t) * L.inner + i] = acc / static_cast<T>(k);
      }
  return y;
}

template <class T>
void temporal_avg_pool_backward(const Tensor<T>& gy, std::size_t k, Tensor<T>& gx) {
  const auto L = time_layout(gy, "temporal_avg_pool_backward");
  const long lo = static_cast<long>(k - 1) / 2;
  auto gys = gy.data();
  auto gxs = gx.data();
  for (std::size_t o = 0; o < L.outer; ++o)
    for (std::size_t t = 0; t < L.t; ++t)
      for (std::size_t i = 0; i < L.inner; ++i) {
        const T g = gys[(o * L.t + t) * L.inner + i] / static_cast<T>(k);
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t s = clamp_index(static_cast<long>(t + j) - lo, L.t);
          gxs[(o * L.t + s) * L.inner + i] += g;
        }
      }
}

/// Same-length temporal max pool with edge replication. `argmax` receives the
/// source frame per output element; `margin` the smallest gap between the
/// winner and the best distinct runner-up frame.
template <class T>
Tensor<T> temporal_max_pool(const Tensor<T>& x, std::size_t k, std::vector<std::size_t>* argmax,
                            double* margin) {
  const auto L = time_layout(x, "temporal_max_pool");
  if (k < 1) throw ParameterError("temporal_max_pool: window must be >= 1");
  if (k > L.t) throw ParameterError("temporal_max_pool: window larger than T");
  const long lo = static_cast<long>(k - 1) / 2;
  Tensor<T> y(x.shape());
  if (argmax) argmax->assign(x.numel(), 0);
  double gap = std::numeric_limits<double>::infinity();
  auto xs = x.data();
  for (std::size_t o = 0; o < L.outer; ++o)
    for (std::size_t t = 0; t < L.t; ++t)
      for (std::size_t i = 0; i < L.inner; ++i) {
        std::size_t best = clamp_index(static_cast<long>(t) - lo, L.t);
        T bv = xs[(o * L.t + best) * L.inner + i];
        for (std::size_t j = 1; j < k; ++j) {
          const std::size_t s = clamp_index(static_cast<long>(t + j) - lo, L.t);
          const T v = xs[(o * L.t + s) * L.inner + i];
          if (v > bv) {
            bv = v;
            best = s;
          }
        }
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t s = clamp_index(static_cast<long>(t + j) - lo, L.t);
          if (s == best) continue;
          gap = std::min(gap, static_cast<double>(bv - xs[(o * L.t + s) * L.inner + i]));
        }
        const std::size_t out = (o * L.t + t) * L.inner + i;
        y.data()[out] = bv;
        if (argmax) (*argmax)[out] = (o * L.t + best) * L.inner + i;
      }
  if (margin) *margin = gap;
  return y;
}

/// Depthwise temporal convolution: y[n,c,t] = sum_j beta[c,j] x[n,c,t+j-(kt-1)/2],
/// zero padded. Works on [N,C,T,...].
template <class T>
Tensor<T> depthwise_temporal(const Tensor<T>& x, const Tensor<T>& beta) {
  const auto L = time_layout(x, "depthwise_temporal_conv");
  if (beta.rank() != 2 || beta.dim(0) != x.dim(1)) {
    throw DimensionError("depthwise_temporal_conv: beta " + shape_str(beta.shape()) +
                         " does not match channels of " + shape_str(x.shape()));
  }
  const std::size_t kt = beta.dim(1);
  if (kt % 2 == 0) throw ParameterError("depthwise_temporal_conv: kernel size must be odd");
  const long half = static_cast<long>(kt - 1) / 2;
  const std::size_t c_n = x.dim(1);
  Tensor<T> y(x.shape());
  auto xs = x.data();
  for (std::size_t o = 0; o < L.outer; ++o) {
    const std::size_t c = o % c_n;
    for (std::size_t t = 0; t < L.t; ++t)
      for (std::size_t j = 0; j < kt; ++j) {
        const long s = static_cast<long>(t + j) - half;
        if (s < 0 || s >= static_cast<long>(L.t)) continue;
        const T b = beta.data()[c * kt + j];
        for (std::size_t i = 0; i < L.inner; ++i)
          y.data()[(o * L.t + t) * L.inner + i] += b * xs[(o * L.t + s) * L.inner + i];
      }
  }
  return y;
}

template <class T>
void depthwise_temporal_backward(const Tensor<T>& x, const Tensor<T>& beta, const Tensor<T>& gy,
                                 Tensor<T>* gx, Tensor<T>* gbeta) {
  const auto L = time_layout(x, "depthwise_temporal_backward");
  const std::size_t kt = beta.dim(1);
  const long half = static_cast<long>(kt - 1) / 2;
  const std::size_t c_n = x.dim(1);
  for (std::size_t o = 0; o < L.outer; ++o) {
    const std::size_t c = o % c_n;
    for (std::size_t t = 0; t < L.t; ++t)
      for (std::size_t j = 0; j < kt; ++j) {
        const long s = static_cast<long>(t + j) - half;
        if (s < 0 || s >= static_cast<long>(L.t)) continue;
        const T b = beta.data()[c * kt + j];
        T acc = 0;
        for (std::size_t i = 0; i < L.inner; ++i) {
          const T g = gy.data()[(o * L.t + t) * L.inner + i];
          const std::size_t xi = (o * L.t + static_cast<std::size_t>(s)) * L.inner + i;
          acc += g * x.data()[xi];
          if (gx) gx->data()[xi] += b * g;
        }
        if (gbeta) gbeta->data()[c * kt + j] += acc;
      }
  }
}

/// Channel ranges moved by a temporal shift.
struct ShiftGroups {
  std::size_t fwd_end;  // channels [0, fwd_end) are delayed by one frame
  std::size_t bwd_end;  // channels [fwd_end, bwd_end) are advanced by one frame
};

inline ShiftGroups shift_groups(std::size_t channels, double fraction_fwd, double fraction_bwd) {
  if (!(fraction_fwd >= 0.0 && fraction_fwd <= 0.5 && fraction_bwd >= 0.0 && fraction_bwd <= 0.5)) {
    throw ParameterError("temporal_shift: fractions must lie in [0, 0.5]");
  }
  const auto nf = static_cast<std::size_t>(std::floor(fraction_fwd * static_cast<double>(channels)));
  const auto nb = static_cast<std::size_t>(std::floor(fraction_bwd * static_cast<double>(channels)));
  if (nf + nb > channels) throw ParameterError("temporal_shift: channel groups overlap");
  return {nf, nf + nb};
}

/// Shift is a permutation with zero fill; `transpose` applies its adjoint.
template <class T>
Tensor<T> temporal_shift(const Tensor<T>& x, const ShiftGroups& g, bool transpose = false) {
  const auto L = time_layout(x, "temporal_shift");
  const std::size_t c_n = x.dim(1);
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < L.outer; ++o) {
    const std::size_t c = o % c_n;
    long offset = 0;
    if (c < g.fwd_end) offset = -1;       // y[t] = x[t-1]
    else if (c < g.bwd_end) offset = 1;   // y[t] = x[t+1]
    if (transpose) offset = -offset;
    for (std::size_t t = 0; t < L.t; ++t) {
      const long s = static_cast<long>(t) + offset;
      if (s < 0 || s >= static_cast<long>(L.t)) continue;
      for (std::size_t i = 0; i < L.inner; ++i)
        y.data()[(o * L.t + t) * L.inner + i] = x.data()[(o * L.t + s) * L.inner + i];
    }
  }
  return y;
}

}  // namespace tada::kernels
