#pragma once

// Calibration-weight generation: frame descriptors (spatial GAP), optional
// clip descriptor (spatio-temporal GAP) injected through an FC layer, a
// linear or two-layer 1-D temporal conv generator, and the constant 1 that
// makes a zero-initialized generator an identity calibration.

#include <cstddef>
#include <string>
#include <vector>

#include "tada/core/ops.hpp"
#include "tada/core/random.hpp"
#include "tada/tadaconv/config.hpp"

namespace tada {

/// Size of the per-frame calibration vector for a kernel W_b[Co, Ci, k, k].
/// cin_x_cout is a rank-one calibration: Co output factors followed by Ci
/// input factors.
inline std::size_t calibration_size(CalibrationDim dim, std::size_t cin, std::size_t cout,
                                    std::size_t k) {
  switch (dim) {
    case CalibrationDim::cin: return cin;
    case CalibrationDim::cout: return cout;
    case CalibrationDim::cin_x_cout: return cout + cin;
    case CalibrationDim::kspatial: return k * k;
  }
  return 0;
}

/// alpha[N, D, T]: one calibration vector per sample and frame.
template <class T>
struct CalibrationWeights {
  Var<T> alpha;
  CalibrationDim dim = CalibrationDim::cin;
};

template <class T>
struct CalibrationGenerator {
  TAdaConvConfig cfg;
  std::size_t cin = 0;
  std::size_t cout = 0;
  std::size_t k = 0;
  std::size_t frames = 0;  // needed only for learnable, temporally varying calibration

  Parameter<T> reduce;     // nonlinear: [C/r, Ci, k1]; linear: [D, Ci, k1]
  BatchNorm<T> bn;         // nonlinear only, C/r channels
  Parameter<T> expand;     // nonlinear: [D, C/r, k2]
  Parameter<T> global_fc;  // [Ci, Ci], no bias
  Parameter<T> learnable;  // [D, frames] or [D, 1]

  CalibrationGenerator() = default;

  CalibrationGenerator(const std::string& name, const TAdaConvConfig& config, std::size_t in_ch,
                       std::size_t out_ch, std::size_t kernel, std::size_t num_frames, Rng& rng)
      : cfg(config), cin(in_ch), cout(out_ch), k(kernel), frames(num_frames) {
    cfg.validate(cin);
    const std::size_t d = size();
    if (cfg.source == CalibrationSource::dynamic) {
      if (cfg.generator == GeneratorForm::nonlinear) {
        const std::size_t h = cfg.hidden(cin);
        reduce = Parameter<T>(name + ".gen.reduce", Tensor<T>({h, cin, cfg.k1}));
        bn = BatchNorm<T>(name + ".gen.bn", h);
        expand = Parameter<T>(name + ".gen.expand", Tensor<T>({d, h, cfg.k2}));
      } else {
        reduce = Parameter<T>(name + ".gen.linear", Tensor<T>({d, cin, cfg.k1}));
      }
      if (cfg.use_global) global_fc = Parameter<T>(name + ".gen.global_fc", Tensor<T>({cin, cin}));
    } else if (cfg.source == CalibrationSource::learnable) {
      if (cfg.temporally_varying && frames == 0) {
        throw ConfigError("tadaconv: learnable temporally varying calibration needs the frame count");
      }
      learnable = Parameter<T>(name + ".alpha", Tensor<T>({d, cfg.temporally_varying ? frames : 1}));
    }
    initialize(rng);
  }

  std::size_t size() const { return calibration_size(cfg.calibration_dim, cin, cout, k); }

  /// Fan-in uniform init for the first generator layer and the global FC;
  /// the last layer (and any learnable calibration) is zeroed when
  /// cfg.identity_init is set, else initialized like the first layer.
  void initialize(Rng& rng) {
    const bool linear = cfg.generator == GeneratorForm::linear;
    if (cfg.source == CalibrationSource::dynamic) {
      if (linear) {
        if (cfg.identity_init) reduce.value.fill(T(0));
        else kaiming_uniform(reduce.value, cin * cfg.k1, rng);
      } else {
        kaiming_uniform(reduce.value, cin * cfg.k1, rng);
        if (cfg.identity_init) expand.value.fill(T(0));
        else kaiming_uniform(expand.value, cfg.hidden(cin) * cfg.k2, rng);
      }
      if (cfg.use_global) kaiming_uniform(global_fc.value, cin, rng);
    } else if (cfg.source == CalibrationSource::learnable) {
      if (cfg.identity_init) {
        learnable.value.fill(T(0));
      } else {
        std::uniform_real_distribution<double> dist(-0.5, 0.5);
        for (auto& v : learnable.value.data()) v = static_cast<T>(dist(rng));
      }
    }
  }

  void collect(std::vector<Parameter<T>*>& out) {
    auto add = [&out](Parameter<T>& p) {
      if (p.numel()) out.push_back(&p);
    };
    add(reduce);
    add(bn.gamma);
    add(bn.beta);
    add(expand);
    add(global_fc);
    add(learnable);
  }

  std::vector<BatchNorm<T>*> norms() {
    if (bn.channels()) return {&bn};
    return {};
  }
};

namespace detail {
template <class T>
Var<T> run_generator(CalibrationGenerator<T>& gen, Var<T> v, Mode mode) {
  Tape<T>& tape = *v.tape;
  const auto& cfg = gen.cfg;
  if (cfg.generator == GeneratorForm::linear) {
    return conv1d_temporal(v, tape.parameter(gen.reduce), 1, (cfg.k1 - 1) / 2);
  }
  Var<T> h = conv1d_temporal(v, tape.parameter(gen.reduce), 1, (cfg.k1 - 1) / 2);
  h = relu(batchnorm(h, gen.bn, mode));
  return conv1d_temporal(h, tape.parameter(gen.expand), 1, (cfg.k2 - 1) / 2);
}
}  // namespace detail

/// alpha = 1 + F(v, g) for dynamic calibration; 1 + stored parameter for
/// learnable calibration; 1 for none. Shared (non temporally varying)
/// calibration is computed once per clip and repeated over T.
template <class T>
CalibrationWeights<T> generate_calibration(Var<T> x, CalibrationGenerator<T>& gen, Mode mode) {
  const auto d = video_dims(x.value(), "generate_calibration");
  if (d.c != gen.cin) {
    throw DimensionError("generate_calibration: generator built for " + std::to_string(gen.cin) +
                         " channels, input has " + std::to_string(d.c));
  }
  if (d.t < 1) throw DimensionError("generate_calibration: T must be >= 1");
  Tape<T>& tape = *x.tape;
  const std::size_t dsz = gen.size();
  const auto& cfg = gen.cfg;

  if (cfg.source == CalibrationSource::none) {
    return {tape.constant(Tensor<T>::ones({d.n, dsz, d.t})), cfg.calibration_dim};
  }

  if (cfg.source == CalibrationSource::learnable) {
    Var<T> p = tape.parameter(gen.learnable);
    const std::size_t len = p.dim(1);
    if (cfg.temporally_varying && len != d.t) {
      throw DimensionError("generate_calibration: learnable calibration has " +
                           std::to_string(len) + " frames, input has " + std::to_string(d.t));
    }
    // [D, len] -> [N, D, T], broadcasting over the batch (and over T when shared).
    Tensor<T> out({d.n, dsz, d.t});
    const auto& pv = p.value().data();
    for (std::size_t n = 0; n < d.n; ++n)
      for (std::size_t c = 0; c < dsz; ++c)
        for (std::size_t t = 0; t < d.t; ++t)
          out.data()[(n * dsz + c) * d.t + t] = T(1) + pv[c * len + (len == 1 ? 0 : t)];
    Var<T> alpha = tape.record(std::move(out), {p.id},
                               [p, dsz, len, n_n = d.n, t_n = d.t](Tape<T>& tp, const Tensor<T>& g) {
                                 Tensor<T>* gp = tp.grad_buffer(p.id);
                                 if (!gp) return;
                                 for (std::size_t n = 0; n < n_n; ++n)
                                   for (std::size_t c = 0; c < dsz; ++c)
                                     for (std::size_t t = 0; t < t_n; ++t)
                                       gp->data()[c * len + (len == 1 ? 0 : t)] +=
                                           g.data()[(n * dsz + c) * t_n + t];
                               });
    return {alpha, cfg.calibration_dim};
  }

  Var<T> v;
  if (cfg.temporally_varying) {
    v = gap_spatial(x);  // [N, C, T]
  } else {
    v = reshape(gap_spatiotemporal(x), {d.n, d.c, 1});
  }
  if (cfg.use_global) {
    Var<T> g = gap_spatiotemporal(x);  // [N, C]
    Var<T> fg = linear(g, tape.parameter(gen.global_fc));
    v = add(v, cfg.temporally_varying ? repeat_time(fg, d.t) : reshape(fg, {d.n, d.c, 1}));
  }
  Var<T> core = detail::run_generator(gen, v, mode);
  Var<T> alpha = add_scalar(core, T(1));
  if (!cfg.temporally_varying) alpha = repeat_time(reshape(alpha, {d.n, dsz}), d.t);
  return {alpha, cfg.calibration_dim};
}

}  // namespace tada
