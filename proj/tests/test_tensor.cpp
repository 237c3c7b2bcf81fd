#include <gtest/gtest.h>

#include <cmath>

#include "tada/core/random.hpp"
#include "tada/core/tensor.hpp"

using namespace tada;

TEST(Tensor, RowMajorIndexing) {
  Tensor<double> t({2, 3, 4});
  for (std::size_t i = 0; i < t.numel(); ++i) t.flat(i) = static_cast<double>(i);
  EXPECT_EQ(t.at(1, 2, 3), 23.0);
  EXPECT_EQ(t.at(0, 1, 0), 4.0);
  EXPECT_EQ(t.offset({1, 0, 2}), 14u);
}

TEST(Tensor, BoundsAndRankAreChecked) {
  Tensor<float> t({2, 3});
  EXPECT_THROW(t.at(2, 0), DimensionError);
  EXPECT_THROW(t.at(0, 0, 0), DimensionError);
  EXPECT_THROW(t.flat(6), DimensionError);
  EXPECT_THROW(t.dim(2), DimensionError);
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>(3)), DimensionError);
}

TEST(Tensor, ReshapeKeepsDataAndChecksCount) {
  Tensor<double> t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto r = t.reshaped({3, 2});
  EXPECT_EQ(r.at(2, 1), 6.0);
  EXPECT_THROW(t.reshaped({4, 2}), DimensionError);
}

TEST(Tensor, ArithmeticAndDiff) {
  Tensor<double> a({3}, {1, -2, 3}), b({3}, {1, 2, 3.5});
  EXPECT_DOUBLE_EQ(max_abs_diff(a, b), 4.0);
  EXPECT_DOUBLE_EQ(max_abs(a), 3.0);
  a += b;
  a *= 2.0;
  EXPECT_EQ(a.vec(), (std::vector<double>{4, 0, 13}));
  EXPECT_THROW(a += Tensor<double>({2}), DimensionError);
  EXPECT_THROW(max_abs_diff(a, Tensor<double>({4})), DimensionError);
}

TEST(Tensor, CastAndFactories) {
  const auto z = Tensor<double>::zeros({2, 2});
  const auto o = Tensor<float>::ones({3});
  EXPECT_EQ(max_abs(z), 0.0);
  EXPECT_EQ(o.cast<double>().vec(), (std::vector<double>{1, 1, 1}));
  EXPECT_TRUE(Tensor<double>().empty());
}

TEST(Tensor, VideoDims) {
  Tensor<float> x({1, 2, 3, 4, 5});
  const auto d = video_dims(x, "test");
  EXPECT_EQ(d.n, 1u);
  EXPECT_EQ(d.w, 5u);
  EXPECT_THROW(video_dims(Tensor<float>({1, 2, 3}), "test"), DimensionError);
}

TEST(Random, SameSeedSameDraws) {
  Rng a(9), b(9);
  const auto x = random_normal<double>({4, 5}, a);
  const auto y = random_normal<double>({4, 5}, b);
  EXPECT_EQ(x.vec(), y.vec());
  Rng c(10);
  EXPECT_NE(random_normal<double>({4, 5}, c).vec(), x.vec());
}

TEST(Random, KaimingUniformBound) {
  Rng rng(1);
  Tensor<double> w({16, 9});
  kaiming_uniform(w, 9, rng);
  EXPECT_LE(max_abs(w), std::sqrt(6.0 / 9.0));
  EXPECT_GT(max_abs(w), 0.0);
}
