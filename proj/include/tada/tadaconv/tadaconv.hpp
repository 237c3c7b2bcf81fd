#pragma once

// Temporally-adaptive convolution: every frame t is convolved with
// W_t = alpha_t . W_b, where W_b is shared across frames and alpha_t is
// generated from the frame's temporal context.

#include <cstddef>
#include <string>
#include <vector>

#include "tada/tadaconv/calibration.hpp"

namespace tada {

/// Materializes per-frame kernels W[N, T, Co, Ci, k, k] from alpha[N, D, T]
/// and w_b[Co, Ci, k, k]. Only input channels ci < calibrated_channels are
/// scaled; the rest keep w_b unchanged.
template <class T>
Var<T> calibrate_kernel(const CalibrationWeights<T>& calib, Var<T> w_b,
                        std::size_t calibrated_channels) {
  Tape<T>& tape = detail::same_tape(calib.alpha, w_b, "calibrate_kernel");
  const auto& a = calib.alpha.value();
  const auto& w = w_b.value();
  if (w.rank() != 4) throw DimensionError("calibrate_kernel: base kernel must be [Co,Ci,k,k]");
  if (a.rank() != 3) throw DimensionError("calibrate_kernel: alpha must be [N,D,T]");
  const std::size_t co_n = w.dim(0), ci_n = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const std::size_t n_n = a.dim(0), d_n = a.dim(1), t_n = a.dim(2);
  const CalibrationDim dim = calib.dim;
  if (d_n != calibration_size(dim, ci_n, co_n, kh) || (dim == CalibrationDim::kspatial && kh != kw)) {
    throw DimensionError("calibrate_kernel: alpha of size " + std::to_string(d_n) +
                         " cannot calibrate " + to_string(dim) + " of kernel " +
                         shape_str(w.shape()));
  }
  const std::size_t n_cal = std::min(calibrated_channels, ci_n);
  const std::size_t kk = kh * kw;

  // Scale factor for kernel entry (co, ci, tap) at (n, t).
  auto factor = [=](const Tensor<T>& al, std::size_t n, std::size_t t, std::size_t co,
                    std::size_t ci, std::size_t tap) -> T {
    if (ci >= n_cal) return T(1);
    const auto at = [&](std::size_t c) { return al.data()[(n * d_n + c) * t_n + t]; };
    switch (dim) {
      case CalibrationDim::cin: return at(ci);
      case CalibrationDim::cout: return at(co);
      case CalibrationDim::cin_x_cout: return at(co) * at(co_n + ci);
      case CalibrationDim::kspatial: return at(tap);
    }
    return T(1);
  };

  Tensor<T> out({n_n, t_n, co_n, ci_n, kh, kw});
  for (std::size_t n = 0; n < n_n; ++n)
    for (std::size_t t = 0; t < t_n; ++t)
      for (std::size_t co = 0; co < co_n; ++co)
        for (std::size_t ci = 0; ci < ci_n; ++ci)
          for (std::size_t tap = 0; tap < kk; ++tap)
            out.data()[(((n * t_n + t) * co_n + co) * ci_n + ci) * kk + tap] =
                factor(a, n, t, co, ci, tap) * w.data()[(co * ci_n + ci) * kk + tap];

  const Var<T> alpha = calib.alpha;
  return tape.record(
      std::move(out), {alpha.id, w_b.id},
      [=](Tape<T>& tp, const Tensor<T>& g) {
        const auto& al = tp.value(alpha.id);
        const auto& wv = tp.value(w_b.id).data();
        Tensor<T>* ga = tp.grad_buffer(alpha.id);
        Tensor<T>* gw = tp.grad_buffer(w_b.id);
        for (std::size_t n = 0; n < n_n; ++n)
          for (std::size_t t = 0; t < t_n; ++t)
            for (std::size_t co = 0; co < co_n; ++co)
              for (std::size_t ci = 0; ci < ci_n; ++ci)
                for (std::size_t tap = 0; tap < kk; ++tap) {
                  const T gv = g.data()[(((n * t_n + t) * co_n + co) * ci_n + ci) * kk + tap];
                  const T wval = wv[(co * ci_n + ci) * kk + tap];
                  if (gw) gw->data()[(co * ci_n + ci) * kk + tap] += gv * factor(al, n, t, co, ci, tap);
                  if (!ga || ci >= n_cal) continue;
                  auto slot = [&](std::size_t c) -> T& { return ga->data()[(n * d_n + c) * t_n + t]; };
                  auto val = [&](std::size_t c) { return al.data()[(n * d_n + c) * t_n + t]; };
                  switch (dim) {
                    case CalibrationDim::cin: slot(ci) += gv * wval; break;
                    case CalibrationDim::cout: slot(co) += gv * wval; break;
                    case CalibrationDim::cin_x_cout:
                      slot(co) += gv * wval * val(co_n + ci);
                      slot(co_n + ci) += gv * wval * val(co);
                      break;
                    case CalibrationDim::kspatial: slot(tap) += gv * wval; break;
                  }
                }
      });
}

/// Calibrated per-frame convolution: (alpha_t . W_b) * x_t for every frame.
template <class T>
Var<T> tadaconv_forward(Var<T> x, Var<T> w_b, CalibrationGenerator<T>& gen, std::size_t stride,
                        std::size_t pad, Mode mode) {
  const auto& w = w_b.value();
  if (w.rank() != 4 || w.dim(0) != gen.cout || w.dim(1) != gen.cin || w.dim(2) != gen.k) {
    throw DimensionError("tadaconv_forward: base kernel " + shape_str(w.shape()) +
                         " does not match the generator");
  }
  auto calib = generate_calibration(x, gen, mode);
  Var<T> kernels_var = calibrate_kernel(calib, w_b, gen.cfg.calibrated_channels(gen.cin));
  return dynamic_conv2d(x, kernels_var, stride, pad);
}

/// A TAdaConv layer: base kernel plus its calibration generator.
template <class T>
class TAdaConv2d {
 public:
  TAdaConv2d() = default;

  TAdaConv2d(const std::string& name, std::size_t cin, std::size_t cout, std::size_t k,
             std::size_t stride, std::size_t pad, const TAdaConvConfig& cfg, std::size_t frames,
             Rng& rng)
      : weight(name + ".weight", Tensor<T>({cout, cin, k, k})),
        generator(name, cfg, cin, cout, k, frames, rng),
        stride_(stride),
        pad_(pad) {
    kaiming_uniform(weight.value, cin * k * k, rng);
  }

  Parameter<T> weight;  // W_b[Co, Ci, k, k]
  CalibrationGenerator<T> generator;

  Var<T> forward(Var<T> x, Mode mode) {
    return tadaconv_forward(x, x.tape->parameter(weight), generator, stride_, pad_, mode);
  }

  CalibrationWeights<T> calibration(Var<T> x, Mode mode) {
    return generate_calibration(x, generator, mode);
  }

  const TAdaConvConfig& config() const { return generator.cfg; }
  std::size_t stride() const { return stride_; }
  std::size_t pad() const { return pad_; }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight);
    generator.collect(out);
  }

 private:
  std::size_t stride_ = 1;
  std::size_t pad_ = 0;
};

/// Zeroes the last generator layer (and learnable calibration) and re-draws
/// the first layer, so the layer computes exactly the plain convolution with
/// its base kernel until trained.
template <class T>
void init_identity(CalibrationGenerator<T>& gen, Rng& rng) {
  gen.cfg.identity_init = true;
  gen.initialize(rng);
}

template <class T>
void init_identity(TAdaConv2d<T>& layer, Rng& rng) {
  init_identity(layer.generator, rng);
}

}  // namespace tada
