#include <gtest/gtest.h>

#include <sstream>

#include "tada/cost/net_cost.hpp"

using namespace tada;
using namespace tada::cost;

namespace {
OpCostQuery standard(OpKind kind) {
  OpCostQuery q;
  q.kind = kind;
  q.ci = q.co = 64;
  q.k = 3;
  q.kt = 3;
  q.t = 8;
  q.h = q.w = 56;
  q.r = 4;
  return q;
}
}  // namespace

TEST(OpCost, StandardSettingValues) {
  EXPECT_EQ(op_cost(standard(OpKind::tadaconv)), (OpCost{926795264, 43008}));
  EXPECT_EQ(op_cost(standard(OpKind::r2plus1d)), (OpCost{1233125376, 49152}));
  EXPECT_EQ(op_cost(standard(OpKind::spatial)), (OpCost{924844032, 36864}));
  EXPECT_EQ(op_cost(standard(OpKind::shift)), op_cost(standard(OpKind::spatial)));
  EXPECT_EQ(op_cost(standard(OpKind::temporal)), (OpCost{308281344, 12288}));
  EXPECT_EQ(op_cost(standard(OpKind::conv3d)), (OpCost{2774532096, 110592}));
  EXPECT_EQ(op_cost(standard(OpKind::correlation)), (OpCost{14450688, 4608}));
  auto q = standard(OpKind::tadaconv);
  q.convention = Convention::global_reduced;
  EXPECT_EQ(op_cost(q), (OpCost{926795264, 44032}));
}

TEST(OpCost, TAdaConvOverheadIsTheGeneratorAndCalibrationTerms) {
  const Count ci = 64, co = 64, k = 3, t = 8, thw = 8 * 56 * 56, cr = 16;
  const auto extra = op_cost(standard(OpKind::tadaconv)).flops - op_cost(standard(OpKind::spatial)).flops;
  EXPECT_EQ(extra, ci * (thw + t) + ci * cr * (2 * k * t + 1) + co * ci * k * k * t);
  EXPECT_LT(static_cast<double>(extra) / static_cast<double>(op_cost(standard(OpKind::spatial)).flops), 0.003);
}

TEST(OpCost, FactorizedToSpatialRatio) {
  const auto a = op_cost(standard(OpKind::r2plus1d)), b = op_cost(standard(OpKind::spatial));
  EXPECT_DOUBLE_EQ(static_cast<double>(a.flops) / static_cast<double>(b.flops), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(static_cast<double>(a.params) / static_cast<double>(b.params), 4.0 / 3.0);
}

TEST(OpCost, MonotoneInEveryExtent) {
  for (auto kind : {OpKind::spatial, OpKind::temporal, OpKind::r2plus1d, OpKind::conv3d, OpKind::correlation, OpKind::tadaconv}) {
    const auto base = op_cost(standard(kind));
    for (int field = 0; field < 6; ++field) {
      auto q = standard(kind);
      std::optional<Count>* f[] = {&q.ci, &q.co, &q.k, &q.t, &q.h, &q.w};
      **f[field] += field == 2 ? 2 : 8;
      const auto c = op_cost(q);
      EXPECT_GE(c.flops, base.flops) << to_string(kind) << " field " << field;
      EXPECT_GE(c.params, base.params) << to_string(kind) << " field " << field;
    }
  }
}

TEST(OpCost, MissingOrZeroFieldsAreQueryErrors) {
  auto q = standard(OpKind::tadaconv);
  q.r.reset();
  EXPECT_THROW(op_cost(q), QueryError);
  q = standard(OpKind::spatial);
  q.h = 0;
  EXPECT_THROW(op_cost(q), QueryError);
  q = standard(OpKind::tadaconv);
  q.r = 128;
  EXPECT_THROW(op_cost(q), QueryError);
  q = standard(OpKind::correlation);
  q.co.reset();
  EXPECT_NO_THROW(op_cost(q));
}

TEST(OpCost, KindAndConventionNames) {
  for (auto kind : {OpKind::spatial, OpKind::temporal, OpKind::shift, OpKind::r2plus1d, OpKind::conv3d,
                    OpKind::correlation, OpKind::tadaconv})
    EXPECT_EQ(parse_op_kind(to_string(kind)), kind);
  EXPECT_THROW(parse_op_kind("depthwise"), UsageError);
  EXPECT_EQ(parse_convention("global-reduced"), Convention::global_reduced);
  EXPECT_THROW(parse_convention("bogus"), UsageError);
}

TEST(LayerCost, DefaultConfigItemizationSumsToOperatorFormula) {
  const auto lc = tadaconv_layer_cost({}, 64, 64, 3, 8, 56, 56, 56, 56, Convention::global_reduced);
  auto q = standard(OpKind::tadaconv);
  q.convention = Convention::global_reduced;
  EXPECT_EQ(lc.total(), op_cost(q));
  EXPECT_EQ(lc.generator_bn_params, 32u);
}

TEST(LayerCost, VariantsChangeOnlyTheirTerms) {
  TAdaConvConfig none;
  none.source = CalibrationSource::none;
  const auto plain = tadaconv_layer_cost(none, 64, 64, 3, 8, 56, 56, 56, 56, Convention::global_full);
  EXPECT_EQ(plain.total(), op_cost(standard(OpKind::spatial)));
  TAdaConvConfig learn;
  learn.source = CalibrationSource::learnable;
  EXPECT_EQ(tadaconv_layer_cost(learn, 64, 64, 3, 8, 56, 56, 56, 56, Convention::global_full).learnable.params, 64u * 8u);
  TAdaConvConfig linear;
  linear.generator = GeneratorForm::linear;
  linear.use_global = false;
  const auto lin = tadaconv_layer_cost(linear, 64, 64, 3, 8, 56, 56, 56, 56, Convention::global_full);
  EXPECT_EQ(lin.generator.params, 64u * 64u * 3u);
  EXPECT_EQ(lin.global.params, 0u);
}

TEST(NetCost, ResNet50Totals) {
  const auto r2d = net_cost(presets::by_name("r2d50"));
  const auto tada2d = net_cost(presets::by_name("tada2d50"));
  const auto r21d = net_cost(presets::by_name("r2plus1d50"));
  EXPECT_NEAR(tada2d.total_flops() / 1e9, 33.02, 0.02 * 33.02);
  EXPECT_NEAR(tada2d.total_params() / 1e6, 27.5, 0.02 * 27.5);
  EXPECT_NEAR(r21d.total_flops() / 1e9, 37.94, 0.02 * 37.94);
  EXPECT_NEAR(r21d.total_params() / 1e6, 28.1, 0.02 * 28.1);
  const auto cmp = tada2d.compare(r2d);
  EXPECT_GT(cmp.flops_delta(), 0);
  EXPECT_LT(cmp.flops_delta_pct(), 1.0);
  EXPECT_NEAR(cmp.params_delta_pct(), 13.1, 0.5);
  EXPECT_LT(net_cost(presets::by_name("r3d50")).total_flops(), 2 * r2d.total_flops());
}

TEST(NetCost, CompareOnlyListsDifferingLayers) {
  const auto a = net_cost(presets::by_name("r2d50"));
  EXPECT_TRUE(a.compare(a).rows.empty());
  const auto cmp = net_cost(presets::by_name("tada2d50")).compare(a);
  for (const auto& d : cmp.rows) {
    const bool middle = d.layer.find(".conv2") != std::string::npos || d.layer.find(".bn2") != std::string::npos;
    EXPECT_TRUE(middle) << d.layer;
  }
  EXPECT_FALSE(cmp.rows.empty());
}

TEST(NetCost, CsvIsDeterministicWithFixedHeader) {
  std::ostringstream a, b;
  net_cost(presets::by_name("tada2d50")).write_csv(a);
  net_cost(presets::by_name("tada2d50")).write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "layer,kind,Ci,Co,T,H,W,flops,params");
}
