#pragma once

// Rewriting a (2+1)D convolution as a sum of per-frame convolutions with
// calibrated weights. Without activation the temporal taps fold into the
// spatial kernel (W_j = beta_j . W). With ReLU in between, the fold also
// picks up the binary map M of the active set, so the weights become
// location dependent: W_{t'}^{(i,j)} = beta_j . M_{t'}^{(i,j)} . W.

#include <cstddef>

#include "tada/baseline/temporal_ops.hpp"

namespace tada {

/// {0,1} map of the strictly positive entries of a pre-activation tensor.
template <class T>
struct BinaryMask {
  Tensor<T> m;

  static BinaryMask of(const Tensor<T>& pre_activation) {
    BinaryMask out{Tensor<T>(pre_activation.shape())};
    for (std::size_t i = 0; i < pre_activation.numel(); ++i)
      out.m.data()[i] = pre_activation.data()[i] > T(0) ? T(1) : T(0);
    return out;
  }
};

template <class T>
struct EquivalenceResult {
  Tensor<T> lhs;
  Tensor<T> rhs;
  T max_abs_diff = 0;
};

struct EquivalenceOptions {
  bool with_activation = true;
  /// Added to every beta entry on the rewritten side only (negative control).
  double beta_fault = 0.0;
};

namespace detail {

/// Per-frame spatial convolution with stride 1 and same padding, written
/// directly so the rewritten side shares no code with the direct side.
template <class T>
Tensor<T> spatial_same_conv(const Tensor<T>& x, const Tensor<T>& w) {
  const auto d = video_dims(x, "spatial_same_conv");
  const std::size_t co_n = w.dim(0), k = w.dim(2);
  const long p = static_cast<long>(k - 1) / 2;
  Tensor<T> z({d.n, co_n, d.t, d.h, d.w});
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t co = 0; co < co_n; ++co)
      for (std::size_t t = 0; t < d.t; ++t)
        for (std::size_t i = 0; i < d.h; ++i)
          for (std::size_t j = 0; j < d.w; ++j) {
            T acc = 0;
            for (std::size_t ci = 0; ci < d.c; ++ci)
              for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b) {
                  const long y = static_cast<long>(i + a) - p;
                  const long xx = static_cast<long>(j + b) - p;
                  if (y < 0 || xx < 0 || y >= static_cast<long>(d.h) || xx >= static_cast<long>(d.w))
                    continue;
                  acc += w.at(co, ci, a, b) * x.at(n, ci, t, y, xx);
                }
            z.at(n, co, t, i, j) = acc;
          }
  return z;
}

}  // namespace detail

/// Evaluates the (2+1)D output directly (lhs) and as a sum of convolutions
/// with explicitly materialized calibrated weights (rhs).
template <class T>
EquivalenceResult<T> temporal_conv_equivalence_oracle(const Tensor<T>& x, const Tensor<T>& w_spatial,
                                                      const Tensor<T>& beta,
                                                      EquivalenceOptions opts = {}) {
  const auto d = video_dims(x, "temporal_conv_equivalence_oracle");
  if (w_spatial.rank() != 4 || w_spatial.dim(1) != d.c || w_spatial.dim(2) % 2 == 0 ||
      w_spatial.dim(2) != w_spatial.dim(3)) {
    throw DimensionError("temporal_conv_equivalence_oracle: spatial kernel must be [Co,Ci,k,k], k odd");
  }
  if (beta.rank() != 2 || beta.dim(0) != w_spatial.dim(0) || beta.dim(1) % 2 == 0) {
    throw DimensionError("temporal_conv_equivalence_oracle: beta must be [Co, kt], kt odd");
  }

  EquivalenceResult<T> res;
  {
    Tape<T> tape;
    res.lhs = r2plus1d_forward(tape.constant(x), tape.constant(w_spatial), tape.constant(beta),
                               opts.with_activation)
                  .value();
  }

  const std::size_t co_n = w_spatial.dim(0), k = w_spatial.dim(2), kt = beta.dim(1);
  const long p = static_cast<long>(k - 1) / 2;
  const long half = static_cast<long>(kt - 1) / 2;
  const Tensor<T> z = detail::spatial_same_conv(x, w_spatial);
  BinaryMask<T> mask{Tensor<T>::ones(z.shape())};
  if (opts.with_activation) mask = BinaryMask<T>::of(z);

  res.rhs = Tensor<T>(res.lhs.shape());
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t co = 0; co < co_n; ++co)
      for (std::size_t t = 0; t < d.t; ++t)
        for (std::size_t i = 0; i < d.h; ++i)
          for (std::size_t j = 0; j < d.w; ++j) {
            T acc = 0;
            for (std::size_t tap = 0; tap < kt; ++tap) {
              const long src = static_cast<long>(t + tap) - half;
              if (src < 0 || src >= static_cast<long>(d.t)) continue;
              const auto s = static_cast<std::size_t>(src);
              // Calibration factor of the location-adaptive kernel W_src^{(i,j)}.
              const T factor = (beta.at(co, tap) + static_cast<T>(opts.beta_fault)) *
                               mask.m.at(n, co, s, i, j);
              if (factor == T(0)) continue;
              for (std::size_t ci = 0; ci < d.c; ++ci)
                for (std::size_t a = 0; a < k; ++a)
                  for (std::size_t b = 0; b < k; ++b) {
                    const long y = static_cast<long>(i + a) - p;
                    const long xx = static_cast<long>(j + b) - p;
                    if (y < 0 || xx < 0 || y >= static_cast<long>(d.h) || xx >= static_cast<long>(d.w))
                      continue;
                    acc += (factor * w_spatial.at(co, ci, a, b)) * x.at(n, ci, s, y, xx);
                  }
            }
            res.rhs.at(n, co, t, i, j) = acc;
          }
  res.max_abs_diff = max_abs_diff(res.lhs, res.rhs);
  return res;
}

}  // namespace tada
