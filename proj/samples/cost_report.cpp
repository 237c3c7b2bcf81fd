// Operator and network costs at the standard 8 x 224^2 geometry.

#include <iostream>

#include "tada/cost/net_cost.hpp"

int main() {
  using namespace tada;
  using namespace tada::cost;

  std::cout << "operators at Ci = Co = 64, k = 3, T = 8, 56 x 56, r = 4\n";
  for (auto kind : {OpKind::spatial, OpKind::temporal, OpKind::r2plus1d, OpKind::conv3d, OpKind::correlation,
                    OpKind::tadaconv}) {
    OpCostQuery q;
    q.kind = kind;
    q.ci = q.co = 64;
    q.k = 3;
    q.t = 8;
    q.h = q.w = 56;
    q.r = 4;
    const auto c = op_cost(q);
    std::cout << "  " << to_string(kind) << ": " << c.flops / 1e9 << " GFLOPs, " << c.params << " params\n";
  }

  const auto base = net_cost(presets::by_name("r2d50"));
  for (const char* name : {"tada2d50", "r2plus1d50", "r3d50"}) {
    const auto rep = net_cost(presets::by_name(name));
    const auto cmp = rep.compare(base);
    std::cout << name << ": " << rep.total_flops() / 1e9 << " GFLOPs, " << rep.total_params() / 1e6
              << " M params (" << cmp.flops_delta_pct() << "% / " << cmp.params_delta_pct()
              << "% vs r2d50)\n";
  }
}
