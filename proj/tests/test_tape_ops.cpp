#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace tada;
using tada::testing::naive_conv3d;
using tada::testing::projected_grad_error;

namespace {
Parameter<double> param(const std::string& name, Shape shape, Rng& rng) {
  return Parameter<double>(name, random_normal<double>(std::move(shape), rng));
}
}  // namespace

TEST(Tape, BackwardNeedsScalarLoss) {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>::ones({3}), true);
  EXPECT_THROW(tape.backward(x), UsageError);
}

TEST(Tape, OperandsMustShareATape) {
  Tape<double> a, b;
  auto x = a.constant(Tensor<double>::ones({1, 1, 1, 3, 3}));
  auto w = b.constant(Tensor<double>::ones({1, 1, 1, 1}));
  EXPECT_THROW(conv2d_per_frame(x, w, 1, 0), UsageError);
}

TEST(Tape, ParameterGradientWrittenBack) {
  Parameter<double> p("p", Tensor<double>({3}, {1, 2, 3}));
  Tape<double> tape;
  auto v = tape.parameter(p);
  tape.backward(sum(mul(v, v)));
  EXPECT_EQ(p.grad.vec(), (std::vector<double>{2, 4, 6}));
}

TEST(Tape, GradientsAccumulateAcrossUses) {
  Parameter<double> p("p", Tensor<double>({2}, {1.5, -2}));
  Tape<double> tape;
  auto v = tape.parameter(p);
  tape.backward(sum(add(scale(v, 3.0), v)));
  EXPECT_EQ(p.grad.vec(), (std::vector<double>{4, 4}));
}

TEST(Conv, Conv3dMatchesNaiveLoops) {
  Rng rng(1);
  const auto x = random_normal<double>({2, 3, 5, 6, 7}, rng);
  const auto w = random_normal<double>({4, 3, 3, 3, 3}, rng);
  for (std::size_t s : {1, 2}) {
    Tape<double> tape;
    const auto y = conv3d(tape.constant(x), tape.constant(w), kernels::Conv3dGeometry{{s, s, s}, {1, 1, 1}}).value();
    EXPECT_LE(max_abs_diff(y, naive_conv3d(x, w, s, s, s, 1, 1, 1)), 1e-12) << "stride " << s;
  }
}

TEST(Conv, PerFrameConvIsConv3dWithUnitTemporalKernel) {
  Rng rng(2);
  const auto x = random_normal<double>({1, 2, 4, 5, 5}, rng);
  const auto w = random_normal<double>({3, 2, 3, 3}, rng);
  Tape<double> tape;
  const auto y = conv2d_per_frame(tape.constant(x), tape.constant(w), 2, 1).value();
  EXPECT_EQ(y.shape(), (Shape{1, 3, 4, 3, 3}));
  EXPECT_LE(max_abs_diff(y, naive_conv3d(x, w.reshaped({3, 2, 1, 3, 3}), 1, 2, 2, 0, 1, 1)), 1e-12);
}

TEST(Conv, ChannelMismatchThrows) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>({1, 2, 1, 3, 3}));
  EXPECT_THROW(conv2d_per_frame(x, tape.constant(Tensor<double>({1, 3, 1, 1})), 1, 0), DimensionError);
  EXPECT_THROW(conv2d_per_frame(x, tape.constant(Tensor<double>({1, 2, 1})), 1, 0), DimensionError);
  auto v = tape.constant(Tensor<double>({1, 2, 4}));
  EXPECT_THROW(conv1d_temporal(v, tape.constant(Tensor<double>({1, 2, 2})), 1, 0), ParameterError);
}

TEST(Conv, DynamicConvWithSharedKernelsEqualsPerFrameConv) {
  Rng rng(3);
  const auto x = random_normal<double>({2, 3, 4, 6, 6}, rng);
  const auto w = random_normal<double>({2, 3, 3, 3}, rng);
  Tensor<double> ks({2, 4, 2, 3, 3, 3});
  for (std::size_t i = 0; i < ks.numel(); ++i) ks.flat(i) = w.flat(i % w.numel());
  Tape<double> tape;
  const auto a = dynamic_conv2d(tape.constant(x), tape.constant(ks), 1, 1).value();
  const auto b = conv2d_per_frame(tape.constant(x), tape.constant(w), 1, 1).value();
  EXPECT_LE(max_abs_diff(a, b), 1e-12);
}

TEST(Grad, ConvolutionsMatchFiniteDifferences) {
  Rng rng(4);
  auto x = param("x", {1, 2, 3, 5, 5}, rng);
  auto w3 = param("w3", {2, 2, 3, 3, 3}, rng);
  auto w2 = param("w2", {3, 2, 3, 3}, rng);
  auto w1 = param("w1", {2, 2, 3}, rng);
  auto ks = param("ks", {1, 3, 2, 2, 3, 3}, rng);
  EXPECT_LE(projected_grad_error([&](Tape<double>& t) {
              return conv3d(t.parameter(x), t.parameter(w3), kernels::Conv3dGeometry{{1, 2, 2}, {1, 1, 1}});
            }, {&x, &w3}), 1e-7);
  EXPECT_LE(projected_grad_error([&](Tape<double>& t) { return conv2d_per_frame(t.parameter(x), t.parameter(w2), 2, 1); },
                                 {&x, &w2}), 1e-7);
  EXPECT_LE(projected_grad_error([&](Tape<double>& t) { return dynamic_conv2d(t.parameter(x), t.parameter(ks), 1, 1); },
                                 {&x, &ks}), 1e-7);
  auto v = param("v", {2, 2, 6}, rng);
  EXPECT_LE(projected_grad_error([&](Tape<double>& t) { return conv1d_temporal(t.parameter(v), t.parameter(w1), 1, 1); },
                                 {&v, &w1}), 1e-7);
}

TEST(Grad, PoolingNormAndHeadMatchFiniteDifferences) {
  Rng rng(5);
  auto x = param("x", {3, 2, 5, 2, 2}, rng);
  BatchNorm<double> bn("bn", 2);
  bn.gamma.value = random_normal<double>({2}, rng);
  EXPECT_LE(projected_grad_error([&](Tape<double>& t) { return batchnorm(t.parameter(x), bn, Mode::train); },
                                 {&x, &bn.gamma, &bn.beta}), 1e-7);
  EXPECT_LE(projected_grad_error([&](Tape<double>& t) { return temporal_avg_pool(t.parameter(x), 3); }, {&x}), 1e-7);
  EXPECT_LE(projected_grad_error([&](Tape<double>& t) { return gap_spatiotemporal(t.parameter(x)); }, {&x}), 1e-7);
  EXPECT_LE(projected_grad_error([&](Tape<double>& t) { return gap_spatial(t.parameter(x)); }, {&x}), 1e-7);
  auto f = param("f", {4, 6}, rng);
  auto w = param("w", {3, 6}, rng);
  auto b = param("b", {3}, rng);
  const std::vector<std::size_t> labels{0, 2, 1, 2};
  EXPECT_LE(harness::check_gradients<double>([&](Tape<double>& t) {
              Var<double> bv = t.parameter(b);
              return softmax_cross_entropy(linear(t.parameter(f), t.parameter(w), &bv), labels);
            }, {&f, &w, &b}).worst, 1e-7);
}

TEST(Grad, ZeroInputAndZeroWeightsGiveZeroGradientsOnLinearPaths) {
  Parameter<double> x("x", Tensor<double>::zeros({1, 2, 3, 4, 4}));
  Parameter<double> w("w", Tensor<double>::zeros({2, 2, 3, 3}));
  Tape<double> tape;
  tape.backward(sum(conv2d_per_frame(tape.parameter(x), tape.parameter(w), 1, 1)));
  EXPECT_EQ(max_abs(x.grad), 0.0);
  EXPECT_EQ(max_abs(w.grad), 0.0);
}

TEST(BatchNorm, TrainNormalizesAndUpdatesRunningStats) {
  Rng rng(6);
  auto x = random_normal<double>({4, 3, 2, 2, 2}, rng, 2.0);
  for (auto& v : x.data()) v += 5.0;
  BatchNorm<double> bn("bn", 3);
  Tape<double> tape;
  const auto y = batchnorm(tape.constant(x), bn, Mode::train).value();
  double s = 0, sq = 0;
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t i = 0; i < 8; ++i) {
      const double v = y.data()[(n * 3 + 1) * 8 + i];
      s += v;
      sq += v * v;
    }
  EXPECT_NEAR(s / 32, 0.0, 1e-12);
  EXPECT_NEAR(sq / 32, 1.0, 1e-4);
  EXPECT_GT(bn.running_mean.data()[1], 0.3);  // 0.1 * ~5
  EXPECT_THROW(batchnorm(tape.constant(Tensor<double>({2, 4, 1})), bn, Mode::train), DimensionError);
}

TEST(BatchNorm, ZeroedLayerOutputsZero) {
  Rng rng(7);
  BatchNorm<double> bn("bn", 2);
  bn.zero();
  Tape<double> tape;
  EXPECT_EQ(max_abs(batchnorm(tape.constant(random_normal<double>({2, 2, 3}, rng)), bn, Mode::train).value()), 0.0);
}

TEST(Relu, RecordsDistanceToKink) {
  Tape<double> tape;
  (void)relu(tape.constant(Tensor<double>({3}, {-1.0, 0.25, 2.0})));
  EXPECT_DOUBLE_EQ(tape.kink_margin(), 0.25);
}

TEST(Pool, GlobalClipMeanIsReversalInvariantBitwise) {
  Rng rng(8);
  const auto x = random_normal<float>({2, 3, 7, 3, 3}, rng);
  Tensor<float> r(x.shape());
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t t = 0; t < 7; ++t)
        for (std::size_t i = 0; i < 9; ++i) r.data()[((n * 3 + c) * 7 + (6 - t)) * 9 + i] = x.data()[((n * 3 + c) * 7 + t) * 9 + i];
  Tape<float> tape;
  EXPECT_EQ(gap_spatiotemporal(tape.constant(x)).value().vec(), gap_spatiotemporal(tape.constant(r)).value().vec());
}

TEST(SoftmaxCE, KnownValue) {
  Tape<double> tape;
  const auto loss = softmax_cross_entropy(tape.constant(Tensor<double>({1, 2}, {0.0, 0.0})), {1});
  EXPECT_NEAR(loss.value().data()[0], std::log(2.0), 1e-15);
  EXPECT_THROW(softmax_cross_entropy(tape.constant(Tensor<double>({1, 2})), {2}), ParameterError);
}
