#include <gtest/gtest.h>

#include "tada/core/kernels.hpp"
#include "tada/core/random.hpp"

using namespace tada;
using namespace tada::kernels;

namespace {
// One channel, T frames of a single pixel each.
Tensor<double> sequence(std::vector<double> v) {
  const std::size_t t = v.size();
  return Tensor<double>({1, 1, t, 1, 1}, std::move(v));
}
}  // namespace

TEST(TapRange, MatchesBruteForce) {
  for (std::size_t in = 1; in <= 7; ++in)
    for (std::size_t stride = 1; stride <= 3; ++stride)
      for (std::size_t pad = 0; pad <= 2; ++pad)
        for (std::size_t tap = 0; tap <= 4; ++tap) {
          if (in + 2 * pad < tap + 1) continue;
          const std::size_t out = (in + 2 * pad - (tap + 1)) / stride + 1;
          const auto r = tap_range(out, stride, tap, pad, in);
          for (std::size_t o = 0; o < out; ++o) {
            const long src = static_cast<long>(o * stride + tap) - static_cast<long>(pad);
            const bool inside = src >= 0 && src < static_cast<long>(in);
            EXPECT_EQ(inside, o >= r.lo && o < r.hi) << in << ' ' << stride << ' ' << pad << ' ' << tap << ' ' << o;
          }
        }
}

TEST(ConvExtent, RejectsKernelsLargerThanPaddedInput) {
  EXPECT_EQ(conv_out_extent(56, 3, 2, 1, "t"), 28u);
  EXPECT_THROW(conv_out_extent(2, 5, 1, 1, "t"), DimensionError);
  EXPECT_THROW(conv_out_extent(8, 3, 0, 1, "t"), ParameterError);
}

TEST(TemporalPool, AverageReplicatesEdges) {
  const auto y = temporal_avg_pool(sequence({3, 6, 9, 12}), 3);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 4, 1, 1}));
  EXPECT_DOUBLE_EQ(y.flat(0), (3 + 3 + 6) / 3.0);
  EXPECT_DOUBLE_EQ(y.flat(1), 6.0);
  EXPECT_DOUBLE_EQ(y.flat(3), (9 + 12 + 12) / 3.0);
}

TEST(TemporalPool, ConstantSequenceIsFixedPoint) {
  const auto x = sequence({2.5, 2.5, 2.5, 2.5, 2.5});
  EXPECT_EQ(temporal_avg_pool(x, 3).vec(), x.vec());
  EXPECT_EQ(temporal_max_pool(x, 5, nullptr, nullptr).vec(), x.vec());
}

TEST(TemporalPool, MaxAndWindowChecks) {
  const auto y = temporal_max_pool(sequence({1, 5, 2, 0}), 3, nullptr, nullptr);
  EXPECT_EQ(y.vec(), (std::vector<double>{5, 5, 5, 2}));
  EXPECT_THROW(temporal_avg_pool(sequence({1, 2}), 3), ParameterError);
  EXPECT_THROW(temporal_avg_pool(sequence({1, 2}), 0), ParameterError);
}

TEST(DepthwiseTemporal, ZeroPaddedOddKernel) {
  const Tensor<double> beta({1, 3}, {1, 10, 100});
  // y_t = x_{t-1} + 10 x_t + 100 x_{t+1}
  EXPECT_EQ(depthwise_temporal(sequence({1, 2, 3}), beta).vec(), (std::vector<double>{210, 321, 32}));
}

TEST(TemporalShift, GroupsAndZeroFill) {
  Tensor<double> x({1, 4, 3, 1, 1});
  for (std::size_t i = 0; i < x.numel(); ++i) x.flat(i) = static_cast<double>(i + 1);
  const auto g = shift_groups(4, 0.25, 0.25);
  EXPECT_EQ(g.fwd_end, 1u);
  EXPECT_EQ(g.bwd_end, 2u);
  const auto y = temporal_shift(x, g);
  EXPECT_EQ(y.vec(), (std::vector<double>{0, 1, 2, 5, 6, 0, 7, 8, 9, 10, 11, 12}));
  EXPECT_THROW(shift_groups(4, 0.6, 0.0), ParameterError);
}

TEST(TemporalShift, TransposeIsAdjoint) {
  Rng rng(1);
  const auto x = random_normal<double>({2, 8, 5, 2, 2}, rng), y = random_normal<double>({2, 8, 5, 2, 2}, rng);
  const auto g = shift_groups(8, 0.125, 0.25);
  const auto sx = temporal_shift(x, g), sty = temporal_shift(y, g, true);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    a += sx.flat(i) * y.flat(i);
    b += x.flat(i) * sty.flat(i);
  }
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(ClipMean, EqualsPlainMean) {
  Rng rng(2);
  const auto x = random_normal<double>({2, 3, 5, 4, 4}, rng);
  const auto a = clip_mean(x), b = mean_trailing(x, 2);
  EXPECT_EQ(a.shape(), (Shape{2, 3}));
  EXPECT_LE(max_abs_diff(a, b), 1e-14);
}
