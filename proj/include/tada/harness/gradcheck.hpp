#pragma once

// Central finite differences against the tape's analytic gradients.

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tada/core/tape.hpp"

namespace tada::harness {

struct GradCheckOptions {
  double rel_step = 1e-5;        // h = rel_step * (1 + |x|)
  double kink_threshold = 1e-3;  // resample when a ReLU/max input is this close to its kink
  std::size_t max_resamples = 2000;
  std::size_t max_entries = 0;  // per tensor; 0 checks every entry
  double denominator_floor = 1e-6;
};

struct GradCheckOutcome {
  double worst = 0.0;  // largest per-tensor relative error
  std::string worst_tensor;
  std::size_t entries = 0;
  std::size_t resamples = 0;
};

/// Normwise relative error ||a - n|| / (||a|| + ||n||); the denominator is
/// floored so two gradients that are both zero compare as equal.
inline double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                             double floor = 1e-6) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    diff += d * d;
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nn);
  return std::sqrt(diff) / (denom > floor ? denom : floor);
}

/// `loss` must build a scalar on the tape it is given, binding every tensor
/// in `params` through tape.parameter(). Each call must be a pure function
/// of the parameter values.
template <class T>
GradCheckOutcome check_gradients(const std::function<Var<T>(Tape<T>&)>& loss,
                                 const std::vector<Parameter<T>*>& params,
                                 const GradCheckOptions& opts = {}) {
  // Parameters the loss never binds keep no gradient; they must read as zero.
  for (Parameter<T>* p : params) p->grad = Tensor<T>();
  {
    Tape<T> tape;
    tape.backward(loss(tape));
  }
  auto eval = [&loss]() {
    Tape<T> tape;
    return static_cast<double>(loss(tape).value().data()[0]);
  };
  GradCheckOutcome out;
  for (Parameter<T>* p : params) {
    const Tensor<T> analytic_grad = p->grad;
    const std::size_t n = p->numel();
    const std::size_t step = opts.max_entries && n > opts.max_entries ? n / opts.max_entries : 1;
    std::vector<double> analytic, numeric;
    for (std::size_t i = 0; i < n; i += step) {
      T& v = p->value.data()[i];
      const T saved = v;
      const T h = static_cast<T>(opts.rel_step * (1.0 + std::abs(static_cast<double>(saved))));
      v = saved + h;
      const T up = v;
      const double lp = eval();
      v = saved - h;
      const T down = v;
      const double lm = eval();
      v = saved;
      numeric.push_back((lp - lm) / static_cast<double>(up - down));
      analytic.push_back(analytic_grad.numel() == n ? static_cast<double>(analytic_grad.data()[i]) : 0.0);
    }
    out.entries += analytic.size();
    const double err = relative_error(analytic, numeric, opts.denominator_floor);
    if (!(err <= out.worst)) {
      out.worst = err;
      out.worst_tensor = p->name;
    }
  }
  return out;
}

/// Redraws a case until no ReLU / max-pool input sits within the kink
/// threshold, then checks it. `Case` provides draw(Rng&), loss(Tape&) and
/// params().
template <class T, class Case, class RngT>
GradCheckOutcome check_case(Case& c, RngT& rng, const GradCheckOptions& opts = {}) {
  std::size_t resamples = 0;
  for (;;) {
    c.draw(rng);
    Tape<T> tape;
    (void)c.loss(tape);
    if (tape.kink_margin() >= opts.kink_threshold) break;
    if (++resamples > opts.max_resamples) {
      throw UsageError("gradcheck: no kink-free draw after " + std::to_string(opts.max_resamples) +
                       " attempts");
    }
  }
  GradCheckOutcome out = check_gradients<T>([&c](Tape<T>& tape) { return c.loss(tape); }, c.params(), opts);
  out.resamples = resamples;
  return out;
}

}  // namespace tada::harness
