#include <gtest/gtest.h>

#include "tada/blocks/network.hpp"
#include "tada/cost/net_cost.hpp"
#include "test_support.hpp"

using namespace tada;

namespace {

// Independent loop version of the aggregation formula in eval mode.
double bn_eval(const BatchNorm<double>& bn, std::size_t c, double v) {
  return bn.gamma.value.flat(c) * (v - bn.running_mean.flat(c)) / std::sqrt(bn.running_var.flat(c) + 1e-5) +
         bn.beta.value.flat(c);
}

Tensor<double> aggregate_loops(const Tensor<double>& x, const AggregationParams<double>& p, const BlockVariantFlags& f) {
  const std::size_t N = x.dim(0), C = x.dim(1), T = x.dim(2), HW = x.dim(3) * x.dim(4);
  const long half = static_cast<long>(p.k - 1) / 2;
  Tensor<double> y(x.shape());
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < HW; ++i) {
          auto at = [&](long s) {
            s = std::clamp<long>(s, 0, static_cast<long>(T) - 1);
            return x.flat(((n * C + c) * T + static_cast<std::size_t>(s)) * HW + i);
          };
          double avg = 0, mx = -1e300;
          for (long j = -half; j <= half; ++j) {
            avg += at(static_cast<long>(t) + j);
            mx = std::max(mx, at(static_cast<long>(t) + j));
          }
          avg /= static_cast<double>(p.k);
          const double pooled = p.pool == PoolKind::avg ? avg : p.pool == PoolKind::max ? mx : 0.5 * (avg + mx);
          const double v = at(static_cast<long>(t));
          double out;
          if (!f.use_aggregation) out = bn_eval(p.bn1, c, v);
          else if (!f.use_shortcut_branch) out = bn_eval(p.bn1, c, pooled);
          else if (!f.separate_bn) out = bn_eval(p.bn1, c, v + pooled);
          else out = bn_eval(p.bn1, c, v) + bn_eval(p.bn2, c, pooled);
          y.flat(((n * C + c) * T + t) * HW + i) = std::max(0.0, out);
        }
  return y;
}

void randomize(BatchNorm<double>& bn, Rng& rng) {
  bn.gamma.value = random_normal<double>({bn.channels()}, rng);
  bn.beta.value = random_normal<double>({bn.channels()}, rng);
  bn.running_mean = random_normal<double>({bn.channels()}, rng);
  bn.running_var = random_uniform<double>({bn.channels()}, rng, 0.5, 2.0);
}

const BlockVariantFlags kVariants[] = {{false, false, false}, {true, false, false}, {true, true, false}, {true, true, true}};

}  // namespace

TEST(Aggregation, MatchesLoopOracleForEveryVariant) {
  Rng rng(1);
  for (auto pool : {PoolKind::avg, PoolKind::max, PoolKind::mix}) {
    for (const auto& f : kVariants) {
      AggregationParams<double> p("bn1", "bn2", 3, pool, 3);
      randomize(p.bn1, rng);
      randomize(p.bn2, rng);
      const auto x = random_normal<double>({2, 3, 5, 2, 3}, rng);
      Tape<double> tape;
      const auto y = aggregate(tape.constant(x), p, f, Mode::eval).value();
      EXPECT_LE(max_abs_diff(y, aggregate_loops(x, p, f)), 1e-12) << to_string(pool);
    }
  }
}

TEST(Aggregation, ZeroInitialisedSecondNormLeavesStaticPath) {
  Rng rng(2);
  AggregationParams<double> p("bn1", "bn2", 4);
  const auto x = random_normal<double>({2, 4, 6, 3, 3}, rng);
  Tape<double> tape;
  auto xv = tape.constant(x);
  BatchNorm<double> plain("bn1", 4);
  const auto a = aggregate(xv, p, BlockVariantFlags{}, Mode::train).value();
  const auto b = relu(batchnorm(xv, plain, Mode::train)).value();
  EXPECT_EQ(max_abs_diff(a, b), 0.0);
}

TEST(Aggregation, ConstantSequencePoolsToItself) {
  Tensor<double> x({1, 2, 5, 2, 2});
  for (std::size_t i = 0; i < x.numel(); ++i) x.flat(i) = 1.0 + static_cast<double>(i % 4);
  Tape<double> tape;
  for (auto pool : {PoolKind::avg, PoolKind::max, PoolKind::mix})
    EXPECT_LE(max_abs_diff(temporal_pool(tape.constant(x), pool, 3).value(), x), 1e-15);
}

TEST(Aggregation, FlagAndWindowChecks) {
  EXPECT_THROW((BlockVariantFlags{true, false, true}.validate()), ConfigError);
  EXPECT_THROW((BlockVariantFlags{false, true, false}.validate()), ConfigError);
  AggregationParams<double> p("a", "b", 2, PoolKind::avg, 5);
  Tape<double> tape;
  EXPECT_THROW(aggregate(tape.constant(Tensor<double>({1, 2, 3, 1, 1})), p, {}, Mode::eval), ParameterError);
}

TEST(Aggregation, GradientsMatchFiniteDifferences) {
  Rng rng(3);
  for (const auto& f : kVariants) {
    AggregationParams<double> p("bn1", "bn2", 3, PoolKind::avg, 3);
    randomize(p.bn1, rng);
    randomize(p.bn2, rng);
    Parameter<double> x("x", random_normal<double>({3, 3, 4, 2, 2}, rng));
    const double err = tada::testing::projected_grad_error(
        [&](Tape<double>& t) { return aggregate(t.parameter(x), p, f, Mode::train); },
        {&x, &p.bn1.gamma, &p.bn1.beta, &p.bn2.gamma, &p.bn2.beta});
    EXPECT_LE(err, 1e-6);
  }
}

TEST(NetSpec, ResNet50StagesReachStandardResolutions) {
  for (const char* name : {"r2d50", "tada2d50", "r2plus1d50", "r3d50"}) {
    const auto spec = presets::by_name(name);
    const auto outs = spec.stage_outputs();
    ASSERT_EQ(outs.size(), 4u);
    EXPECT_EQ(outs[0], (Geometry{8, 56, 56})) << name;
    EXPECT_EQ(outs[1], (Geometry{8, 28, 28}));
    EXPECT_EQ(outs[2], (Geometry{8, 14, 14}));
    EXPECT_EQ(outs[3], (Geometry{8, 7, 7}));
    EXPECT_EQ(spec.blocks().size(), 16u);
    EXPECT_EQ(spec.feature_width(), 2048u);
  }
  EXPECT_THROW(presets::by_name("r2d18"), UsageError);
}

TEST(NetSpec, RejectsBadGeometry) {
  auto spec = presets::by_name("r2d_tiny");
  spec.frames = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = presets::by_name("r2d_tiny");
  spec.stages[1].stride = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = presets::by_name("r2d_tiny");
  spec.stages[0].mid_width = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = presets::by_name("r2d_tiny");
  spec.stem.k = 4;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = presets::by_name("r2d_tiny");
  spec.stages[0].blocks = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Network, ParameterCountMatchesCostWalk) {
  for (const char* name : {"r2d_tiny", "tada2d_tiny", "r2plus1d_tiny", "r3d_tiny"}) {
    Rng rng(4);
    Network<double> net(presets::by_name(name), {}, rng);
    EXPECT_EQ(net.parameter_count(), cost::net_cost(net.spec()).total_params()) << name;
  }
}

TEST(Network, ForwardShapesAndInputCheck) {
  Rng rng(5);
  for (const char* name : {"r2d_tiny", "tada2d_tiny", "r2plus1d_tiny", "r3d_tiny"}) {
    Network<double> net(presets::by_name(name), {}, rng);
    const auto& s = net.spec();
    Tape<double> tape;
    const auto y = net.forward(tape.constant(random_normal<double>({2, s.in_channels, s.frames, s.height, s.width}, rng)),
                               Mode::train);
    EXPECT_EQ(y.shape(), (Shape{2, s.classes})) << name;
    EXPECT_THROW(net.forward(tape.constant(Tensor<double>({1, s.in_channels, s.frames + 1, s.height, s.width})), Mode::eval),
                 DimensionError);
  }
}

TEST(Network, IdentityInitTAdaNetworkEqualsPlainNetwork) {
  Rng rng(6);
  Network<double> plain(presets::by_name("r2d_tiny"), {}, rng);
  Network<double> tada_net(presets::by_name("tada2d_tiny"), {}, rng);
  EXPECT_GT(tada_net.copy_matching(plain), 0u);
  const auto& s = plain.spec();
  for (int rep = 0; rep < 3; ++rep) {
    const auto x = random_normal<double>({2, s.in_channels, s.frames, s.height, s.width}, rng);
    for (auto mode : {Mode::train, Mode::eval}) {
      Tape<double> tape;
      EXPECT_LE(max_abs_diff(tada_net.forward(tape.constant(x), mode).value(), plain.forward(tape.constant(x), mode).value()),
                1e-12);
    }
  }
}

TEST(Network, BlockGradientsMatchFiniteDifferences) {
  BlockSpec b;
  b.name = "blk";
  b.in_width = 4;
  b.mid_width = 4;
  b.out_width = 8;
  b.kind = ConvKind::r2plus1d;
  b.input = {3, 4, 4};
  Rng rng(7);
  BottleneckBlock<double> block(b, {}, rng);
  // Nonzero shifts keep dead ReLU regions from feeding exact zeros forward.
  std::vector<BatchNorm<double>*> bns;
  block.norms(bns);
  for (auto* bn : bns) {
    for (auto& v : bn->beta.value.data()) v = 0.1 * std::uniform_real_distribution<double>(-1, 1)(rng);
  }
  Parameter<double> x("x", Tensor<double>({2, 4, 3, 4, 4}));
  std::vector<Parameter<double>*> params{&x};
  block.collect(params);
  Tensor<double> w;
  for (int attempt = 0;; ++attempt) {
    ASSERT_LT(attempt, 20) << "no kink-free draw";
    x.value = random_normal<double>({2, 4, 3, 4, 4}, rng);
    Tape<double> t;
    w = random_normal<double>(block.forward(t.parameter(x), Mode::eval).shape(), rng);
    if (t.kink_margin() >= 1e-3) break;
  }
  harness::GradCheckOptions o;
  o.max_entries = 32;
  const auto out = harness::check_gradients<double>(
      [&](Tape<double>& t) { return weighted_sum(block.forward(t.parameter(x), Mode::eval), w); }, params, o);
  EXPECT_LE(out.worst, 1e-5) << out.worst_tensor;
}
