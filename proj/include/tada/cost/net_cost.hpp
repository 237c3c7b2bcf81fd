#pragma once

// Layer-by-layer cost walk over a NetSpec. Parameter totals under the
// global_full convention match Network<T>::parameter_count() for the same spec.

#include <string>

#include "tada/blocks/netspec.hpp"
#include "tada/cost/op_cost.hpp"
#include "tada/cost/report.hpp"
#include "tada/tadaconv/config.hpp"

namespace tada::cost {

namespace detail {

inline CostRow conv_row(const std::string& layer, OpKind kind, Count ci, Count co, Count k, Count kt,
                        const Geometry& out) {
  OpCostQuery q;
  q.kind = kind;
  q.ci = ci;
  q.co = co;
  q.k = k;
  q.kt = kt;
  q.t = out.t;
  q.h = out.h;
  q.w = out.w;
  const OpCost c = op_cost(q);
  return {layer, to_string(kind), ci, co, out.t, out.h, out.w, c.flops, c.params};
}

inline CostRow bn_row(const std::string& layer, Count c, const Geometry& g) {
  return {layer, "bn", c, c, g.t, g.h, g.w, 0, 2 * c};
}

}  // namespace detail

inline void add_block_rows(CostReport& rep, const BlockSpec& b, const TAdaConvConfig& cfg,
                           Convention convention) {
  using detail::bn_row;
  using detail::conv_row;
  const std::string& p = b.name;
  const Geometry in = b.input, out = b.output();
  const Count mid = b.mid_width;
  rep.add(conv_row(p + ".conv1", OpKind::spatial, b.in_width, mid, 1, 1, in));
  rep.add(bn_row(p + ".bn1", mid, in));
  switch (b.kind) {
    case ConvKind::spatial:
      rep.add(conv_row(p + ".conv2", OpKind::spatial, mid, mid, b.k, 1, out));
      rep.add(bn_row(p + ".bn2", mid, out));
      break;
    case ConvKind::r2plus1d:
      rep.add(conv_row(p + ".conv2", OpKind::spatial, mid, mid, b.k, 1, out));
      rep.add(bn_row(p + ".bn2", mid, out));
      rep.add(conv_row(p + ".conv2t", OpKind::temporal, mid, mid, b.k, 3, out));
      rep.add(bn_row(p + ".bn2t", mid, out));
      break;
    case ConvKind::conv3d:
      rep.add(conv_row(p + ".conv2", OpKind::conv3d, mid, mid, b.k, 3, out));
      rep.add(bn_row(p + ".bn2", mid, out));
      break;
    case ConvKind::tada: {
      const auto lc = tadaconv_layer_cost(cfg, mid, mid, b.k, in.t, in.h, in.w, out.h, out.w, convention);
      const OpCost c = lc.total();
      rep.add({p + ".conv2", "tadaconv", mid, mid, out.t, out.h, out.w, c.flops, c.params});
      if (lc.generator_bn_params) {
        rep.add({p + ".conv2.gen_bn", "bn", mid, mid, out.t, 1, 1, 0, lc.generator_bn_params});
      }
      rep.add(bn_row(p + ".bn2", mid, out));
      rep.add(bn_row(p + ".bn2_agg", mid, out));
      break;
    }
  }
  rep.add(conv_row(p + ".conv3", OpKind::spatial, mid, b.out_width, 1, 1, out));
  rep.add(bn_row(p + ".bn3", b.out_width, out));
  if (b.has_projection()) {
    rep.add(conv_row(p + ".proj", OpKind::spatial, b.in_width, b.out_width, 1, 1, out));
    rep.add(bn_row(p + ".proj_bn", b.out_width, out));
  }
}

inline CostReport net_cost(const NetSpec& spec, const TAdaConvConfig& cfg = {},
                           Convention convention = Convention::global_full) {
  spec.validate();
  CostReport rep(spec.name);
  const Geometry stem_out = spec.stem_output();
  const auto& st = spec.stem;
  rep.add(detail::conv_row("stem.conv", st.kt == 1 ? OpKind::spatial : OpKind::conv3d, spec.in_channels,
                           st.width, st.k, st.kt, stem_out));
  rep.add(detail::bn_row("stem.bn", st.width, stem_out));
  for (const auto& b : spec.blocks()) add_block_rows(rep, b, cfg, convention);
  const Count feat = spec.feature_width();
  rep.add({"head.fc", "linear", feat, spec.classes, 1, 1, 1, feat * spec.classes,
           feat * spec.classes + spec.classes});
  return rep;
}

}  // namespace tada::cost
