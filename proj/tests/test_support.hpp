#pragma once

// Shared helpers for the unit tests.

#include <functional>
#include <vector>

#include "tada/core/ops.hpp"
#include "tada/core/random.hpp"
#include "tada/harness/gradcheck.hpp"

namespace tada::testing {

/// Naive direct 3-D cross-correlation, zero padding, no bias.
inline Tensor<double> naive_conv3d(const Tensor<double>& x, const Tensor<double>& w, std::size_t st,
                                   std::size_t sh, std::size_t sw, std::size_t pt, std::size_t ph,
                                   std::size_t pw) {
  const std::size_t N = x.dim(0), Ci = x.dim(1), T = x.dim(2), H = x.dim(3), W = x.dim(4);
  const std::size_t Co = w.dim(0), kt = w.dim(2), kh = w.dim(3), kw = w.dim(4);
  const std::size_t To = (T + 2 * pt - kt) / st + 1, Ho = (H + 2 * ph - kh) / sh + 1,
                    Wo = (W + 2 * pw - kw) / sw + 1;
  Tensor<double> y({N, Co, To, Ho, Wo});
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t o = 0; o < Co; ++o)
      for (std::size_t t = 0; t < To; ++t)
        for (std::size_t i = 0; i < Ho; ++i)
          for (std::size_t j = 0; j < Wo; ++j) {
            double acc = 0;
            for (std::size_t c = 0; c < Ci; ++c)
              for (std::size_t a = 0; a < kt; ++a)
                for (std::size_t b = 0; b < kh; ++b)
                  for (std::size_t d = 0; d < kw; ++d) {
                    const long tt = static_cast<long>(t * st + a) - static_cast<long>(pt);
                    const long ii = static_cast<long>(i * sh + b) - static_cast<long>(ph);
                    const long jj = static_cast<long>(j * sw + d) - static_cast<long>(pw);
                    if (tt < 0 || ii < 0 || jj < 0 || tt >= static_cast<long>(T) ||
                        ii >= static_cast<long>(H) || jj >= static_cast<long>(W))
                      continue;
                    acc += w.at(o, c, a, b, d) * x.at(n, c, tt, ii, jj);
                  }
            y.at(n, o, t, i, j) = acc;
          }
  return y;
}

/// Worst relative gradient error of `f` (a function of the bound
/// parameters) projected onto fixed random weights.
inline double projected_grad_error(const std::function<Var<double>(Tape<double>&)>& f,
                                   const std::vector<Parameter<double>*>& params, std::uint64_t seed = 3) {
  Tensor<double> weights;
  {
    Tape<double> tape;
    const auto shape = f(tape).shape();
    Rng rng(seed);
    weights = random_normal<double>(shape, rng);
  }
  return harness::check_gradients<double>(
             [&](Tape<double>& tape) { return weighted_sum(f(tape), weights); }, params)
      .worst;
}

}  // namespace tada::testing
