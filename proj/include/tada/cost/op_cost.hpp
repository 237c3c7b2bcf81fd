#pragma once

// Closed-form operator costs. One multiply-accumulate counts as one FLOP;
// parameters are weight counts (no biases, BN counted separately).

#include <cstdint>
#include <optional>
#include <string>

#include "tada/core/errors.hpp"
#include "tada/tadaconv/calibration.hpp"

namespace tada::cost {

using Count = std::uint64_t;

enum class OpKind { spatial, temporal, shift, r2plus1d, conv3d, correlation, tadaconv };

/// Accounting for the TAdaConv generator's global-descriptor layer.
///   global_full:    the generator as built, global FC C -> C (the operator
///                   formula itself omits the layer's parameters)
///   global_reduced: the global layer counted as C x C/r
enum class Convention { global_full, global_reduced };

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::spatial: return "spatial";
    case OpKind::temporal: return "temporal";
    case OpKind::shift: return "shift";
    case OpKind::r2plus1d: return "2plus1d";
    case OpKind::conv3d: return "3d";
    case OpKind::correlation: return "correlation";
    case OpKind::tadaconv: return "tadaconv";
  }
  return "?";
}

inline OpKind parse_op_kind(const std::string& s) {
  if (s == "spatial") return OpKind::spatial;
  if (s == "temporal") return OpKind::temporal;
  if (s == "shift") return OpKind::shift;
  if (s == "2plus1d" || s == "r2plus1d") return OpKind::r2plus1d;
  if (s == "3d" || s == "conv3d") return OpKind::conv3d;
  if (s == "correlation") return OpKind::correlation;
  if (s == "tadaconv") return OpKind::tadaconv;
  throw UsageError("unknown operator kind '" + s + "'");
}

inline const char* to_string(Convention c) { return c == Convention::global_full ? "global-full" : "global-reduced"; }

inline Convention parse_convention(const std::string& s) {
  if (s == "global-full") return Convention::global_full;
  if (s == "global-reduced") return Convention::global_reduced;
  throw UsageError("unknown counting convention '" + s + "'");
}

struct OpCostQuery {
  OpKind kind = OpKind::spatial;
  std::optional<Count> ci, co, k, kt, t, h, w, r;
  Convention convention = Convention::global_full;
};

struct OpCost {
  Count flops = 0;
  Count params = 0;

  OpCost& operator+=(const OpCost& o) {
    flops += o.flops;
    params += o.params;
    return *this;
  }
  bool operator==(const OpCost&) const = default;
};

namespace detail {
inline Count need(const std::optional<Count>& v, const char* field, OpKind kind) {
  if (!v) {
    throw QueryError(std::string("op_cost: '") + field + "' is required for " + to_string(kind));
  }
  if (*v == 0) throw QueryError(std::string("op_cost: '") + field + "' must be >= 1");
  return *v;
}
}  // namespace detail

/// Per-operator cost rows. `kt` defaults to `k` for the temporal factor.
inline OpCost op_cost(const OpCostQuery& q) {
  using detail::need;
  const OpKind kind = q.kind;
  const Count ci = need(q.ci, "ci", kind);
  const Count k = need(q.k, "k", kind);
  const Count t = need(q.t, "t", kind);
  const Count h = need(q.h, "h", kind);
  const Count w = need(q.w, "w", kind);
  const Count thw = t * h * w;
  if (kind == OpKind::correlation) return {ci * k * k * thw, ci * t * k * k};
  const Count co = need(q.co, "co", kind);
  const Count kt = q.kt ? need(q.kt, "kt", kind) : k;
  switch (kind) {
    case OpKind::spatial:
    case OpKind::shift: return {co * ci * k * k * thw, co * ci * k * k};
    case OpKind::temporal: return {co * ci * kt * thw, co * ci * kt};
    case OpKind::r2plus1d: return {co * ci * (k * k + kt) * thw, co * ci * (k * k + kt)};
    case OpKind::conv3d: return {co * ci * k * k * kt * thw, co * ci * k * k * kt};
    case OpKind::tadaconv: {
      const Count r = need(q.r, "r", kind);
      const Count cr = ci / r;
      if (cr == 0) throw QueryError("op_cost: ci / r must be >= 1");
      OpCost c;
      c.flops = co * ci * k * k * thw + ci * (thw + t) + ci * cr * (2 * k * t + 1) + co * ci * k * k * t;
      c.params = co * ci * k * k + 2 * ci * cr * k;
      if (q.convention == Convention::global_reduced) c.params += ci * cr;
      return c;
    }
    case OpKind::correlation: break;
  }
  return {};
}

/// Itemized cost of one TAdaConv layer as configured. At the default
/// configuration under global_reduced the parts sum to op_cost(tadaconv).
struct TAdaLayerCost {
  OpCost base;         // frame-shared convolution
  OpCost pooling;      // descriptor pooling (no parameters)
  OpCost generator;    // temporal 1-D conv(s)
  OpCost global;       // global-descriptor layer
  OpCost learnable;    // learnable calibration vectors
  OpCost calibration;  // alpha . W_b, once per frame
  Count generator_bn_params = 0;

  OpCost total() const {
    OpCost c = base;
    c += pooling;
    c += generator;
    c += global;
    c += learnable;
    c += calibration;
    return c;
  }
};

/// `in_*` is the geometry seen by the descriptor pooling, `out_*` the
/// convolution output geometry (they differ for strided layers).
inline TAdaLayerCost tadaconv_layer_cost(const TAdaConvConfig& cfg, Count ci, Count co, Count k,
                                         Count t, Count in_h, Count in_w, Count out_h, Count out_w,
                                         Convention convention) {
  TAdaLayerCost c;
  const Count kk = k * k;
  c.base = {co * ci * kk * t * out_h * out_w, co * ci * kk};
  if (cfg.source == CalibrationSource::none) return c;
  const Count d = calibration_size(cfg.calibration_dim, ci, co, k);
  c.calibration = {co * ci * kk * t, 0};
  if (cfg.source == CalibrationSource::learnable) {
    c.learnable = {0, d * (cfg.temporally_varying ? t : 1)};
    return c;
  }
  const Count len = cfg.temporally_varying ? t : 1;
  c.pooling.flops = ci * t * in_h * in_w + ((cfg.use_global || !cfg.temporally_varying) ? ci * t : 0);
  if (cfg.generator == GeneratorForm::nonlinear) {
    const Count hdim = ci / cfg.reduction;
    const Count p = ci * hdim * cfg.k1 + hdim * d * cfg.k2;
    c.generator = {p * len, p};
    c.generator_bn_params = 2 * hdim;
  } else {
    const Count p = ci * d * cfg.k1;
    c.generator = {p * len, p};
  }
  if (cfg.use_global) {
    const Count g = convention == Convention::global_full ? ci * ci : ci * (ci / cfg.reduction);
    c.global = {g, g};
  }
  return c;
}

}  // namespace tada::cost
