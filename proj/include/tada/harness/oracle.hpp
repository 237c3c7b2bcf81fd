#pragma once

// Brute-force references used by the verification suites. Each one spells
// its computation out as plain loops and shares no code with the operator
// it checks.

#include <cstddef>
#include <vector>

#include "tada/core/errors.hpp"
#include "tada/core/tensor.hpp"
#include "tada/tadaconv/config.hpp"

namespace tada::harness {

/// Calibrated convolution with the per-frame kernel materialized entry by
/// entry: y[n,o,t] = sum_i,a,b (factor(n,t,o,i,a,b) * w_b[o,i,a,b]) * x[n,i,t,...].
template <class T>
Tensor<T> materialized_tadaconv(const Tensor<T>& x, const Tensor<T>& w_b, const Tensor<T>& alpha,
                                CalibrationDim dim, std::size_t calibrated, std::size_t stride,
                                std::size_t pad) {
  if (x.rank() != 5 || w_b.rank() != 4 || alpha.rank() != 3) {
    throw DimensionError("materialized_tadaconv: expected x[N,C,T,H,W], w[Co,Ci,k,k], alpha[N,D,T]");
  }
  const std::size_t N = x.dim(0), Ci = x.dim(1), Tn = x.dim(2), H = x.dim(3), W = x.dim(4);
  const std::size_t Co = w_b.dim(0), K = w_b.dim(2);
  const std::size_t Ho = (H + 2 * pad - K) / stride + 1, Wo = (W + 2 * pad - K) / stride + 1;
  Tensor<T> y({N, Co, Tn, Ho, Wo});
  std::vector<T> kernel(Co * Ci * K * K);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t t = 0; t < Tn; ++t) {
      for (std::size_t o = 0; o < Co; ++o)
        for (std::size_t i = 0; i < Ci; ++i)
          for (std::size_t a = 0; a < K; ++a)
            for (std::size_t b = 0; b < K; ++b) {
              T f = 1;
              if (i < calibrated) {
                if (dim == CalibrationDim::cin) f = alpha.at(n, i, t);
                if (dim == CalibrationDim::cout) f = alpha.at(n, o, t);
                if (dim == CalibrationDim::cin_x_cout) f = alpha.at(n, o, t) * alpha.at(n, Co + i, t);
                if (dim == CalibrationDim::kspatial) f = alpha.at(n, a * K + b, t);
              }
              kernel[((o * Ci + i) * K + a) * K + b] = f * w_b.at(o, i, a, b);
            }
      for (std::size_t o = 0; o < Co; ++o)
        for (std::size_t p = 0; p < Ho; ++p)
          for (std::size_t q = 0; q < Wo; ++q) {
            T acc = 0;
            for (std::size_t i = 0; i < Ci; ++i)
              for (std::size_t a = 0; a < K; ++a)
                for (std::size_t b = 0; b < K; ++b) {
                  const long r = static_cast<long>(p * stride + a) - static_cast<long>(pad);
                  const long c = static_cast<long>(q * stride + b) - static_cast<long>(pad);
                  if (r < 0 || c < 0 || r >= static_cast<long>(H) || c >= static_cast<long>(W)) continue;
                  acc += kernel[((o * Ci + i) * K + a) * K + b] *
                         x.at(n, i, t, static_cast<std::size_t>(r), static_cast<std::size_t>(c));
                }
            y.at(n, o, t, p, q) = acc;
          }
    }
  }
  return y;
}

/// Plain per-frame convolution, the same loops with every factor equal to 1.
template <class T>
Tensor<T> naive_conv2d_frames(const Tensor<T>& x, const Tensor<T>& w, std::size_t stride, std::size_t pad) {
  Tensor<T> ones({x.dim(0), x.dim(1), x.dim(2)}, T(1));
  return materialized_tadaconv(x, w, ones, CalibrationDim::cin, x.dim(1), stride, pad);
}

}  // namespace tada::harness
