#pragma once

// Finite-difference suite over the calibrated convolution, the aggregation
// block, a zoo of primitive ops and a complete TAda bottleneck.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tada/baseline/temporal_ops.hpp"
#include "tada/blocks/network.hpp"
#include "tada/harness/equivalence_suite.hpp"
#include "tada/harness/gradcheck.hpp"

namespace tada::harness {

struct GradCheckSuiteOptions {
  std::uint64_t seed = 0;
  std::size_t cases = 50;
  double tolerance = 1e-5;
  std::size_t block_every = 5;  // a full bottleneck every n-th case; 0 disables
  GradCheckOptions check;
};

namespace detail {

/// Fixed random projection so the scalar loss exercises every output entry.
template <class T>
struct Projection {
  Tensor<T> weights;
  Var<T> operator()(Var<T> y) {
    if (weights.shape() != y.shape()) throw DimensionError("gradcheck: projection shape drift");
    return weighted_sum(y, weights);
  }
};

template <class T>
Projection<T> projection_for(const Shape& shape, Rng& rng) {
  return {random_uniform<T>(shape, rng)};
}

template <class T>
std::vector<Parameter<T>*> with_input(Parameter<T>& input, std::vector<Parameter<T>*> rest) {
  rest.insert(rest.begin(), &input);
  return rest;
}

/// tadaconv_forward w.r.t. input, base kernel and every generator tensor.
template <class T>
struct TAdaConvCase {
  std::size_t index = 0;
  std::string op;
  std::optional<TAdaConv2d<T>> layer;
  Parameter<T> input;
  Projection<T> proj;

  void draw(Rng& rng) {
    TAdaConvConfig cfg = draw_config(rng, index, false);
    if (index % 7 == 3) cfg.source = CalibrationSource::learnable;
    op = std::string(to_string(cfg.source)) + "/" + to_string(cfg.generator) + "/" +
         to_string(cfg.calibration_dim) + (cfg.use_global ? "/global" : "");
    const std::size_t ci = pick(rng, 0, 1) ? 8 : 4, co = pick(rng, 2, 5);
    const std::size_t t = pick(rng, 2, 5), h = pick(rng, 4, 6), w = pick(rng, 4, 6);
    const std::size_t k = pick(rng, 0, 3) ? 3 : 1, stride = pick(rng, 1, 2);
    layer.emplace("tada", ci, co, k, stride, (k - 1) / 2, cfg, t, rng);
    for (auto* b : layer->generator.norms()) {
      b->gamma.value = random_uniform<T>(b->gamma.value.shape(), rng, T(0.5), T(1.5));
      b->beta.value = random_uniform<T>(b->beta.value.shape(), rng, T(-0.5), T(0.5));
    }
    // batch of 4: with 2 clips the generator BN nearly cancels the clip
    // descriptor and its gradient drowns in difference noise
    input = Parameter<T>("input", random_normal<T>({4, ci, t, h, w}, rng));
    Tape<T> tape;
    proj = projection_for<T>(layer->forward(tape.constant(input.value), Mode::train).shape(), rng);
  }
  Var<T> loss(Tape<T>& tape) { return proj(layer->forward(tape.parameter(input), Mode::train)); }
  std::vector<Parameter<T>*> params() {
    std::vector<Parameter<T>*> ps;
    layer->collect(ps);
    return with_input(input, ps);
  }
};

/// aggregate() under every flag combination and pooling kind.
template <class T>
struct AggregationCase {
  std::size_t index = 0;
  std::string op;
  AggregationParams<T> agg;
  BlockVariantFlags flags;
  Parameter<T> input;
  Projection<T> proj;

  void draw(Rng& rng) {
    const BlockVariantFlags variants[] = {{true, true, true}, {true, true, false}, {true, false, false},
                                          BlockVariantFlags::none()};
    const PoolKind pools[] = {PoolKind::avg, PoolKind::max, PoolKind::mix};
    flags = variants[index % 4];
    op = std::string(to_string(pools[(index / 4) % 3])) + "/agg" + std::to_string(flags.use_aggregation) +
         std::to_string(flags.use_shortcut_branch) + std::to_string(flags.separate_bn);
    const std::size_t c = pick(rng, 2, 4), t = pick(rng, 3, 6);
    agg = AggregationParams<T>("agg.bn1", "agg.bn2", c, pools[(index / 4) % 3], pick(rng, 0, 1) ? 3 : 1);
    for (BatchNorm<T>* b : {&agg.bn1, &agg.bn2}) {
      b->gamma.value = random_uniform<T>({c}, rng, T(0.5), T(1.5));
      b->beta.value = random_uniform<T>({c}, rng, T(-0.5), T(0.5));
    }
    input = Parameter<T>("input", random_normal<T>({2, c, t, 3, 3}, rng));
    proj = projection_for<T>(input.value.shape(), rng);
  }
  Var<T> loss(Tape<T>& tape) { return proj(aggregate(tape.parameter(input), agg, flags, Mode::train)); }
  std::vector<Parameter<T>*> params() {
    std::vector<Parameter<T>*> ps{&agg.bn1.gamma, &agg.bn1.beta};
    if (flags.separate_bn) {
      ps.push_back(&agg.bn2.gamma);
      ps.push_back(&agg.bn2.beta);
    }
    return with_input(input, ps);
  }
};

/// One primitive per case, cycling through the zoo.
template <class T>
struct OpZooCase {
  std::size_t index = 0;
  std::string op;
  std::vector<std::unique_ptr<Parameter<T>>> owned;
  std::vector<std::size_t> labels;
  std::size_t stride = 1, pad = 0;
  BatchNorm<T> bn;
  Projection<T> proj;

  static constexpr std::size_t kinds = 9;

  Parameter<T>& add(const std::string& name, Tensor<T> v) {
    owned.push_back(std::make_unique<Parameter<T>>(name, std::move(v)));
    return *owned.back();
  }
  Var<T> bind(Tape<T>& tape, std::size_t i) { return tape.parameter(*owned.at(i)); }

  void draw(Rng& rng) {
    owned.clear();
    const std::size_t n = 2, c = pick(rng, 1, 3), t = pick(rng, 3, 5), h = pick(rng, 3, 5);
    stride = pick(rng, 1, 2);
    pad = pick(rng, 0, 1);
    switch (index % kinds) {
      case 0:
        op = "conv3d";
        add("x", random_normal<T>({n, c, t, h, h}, rng));
        add("w", random_normal<T>({2, c, 3, 3, 3}, rng));
        break;
      case 1:
        op = "conv2d_per_frame";
        add("x", random_normal<T>({n, c, t, h, h}, rng));
        add("w", random_normal<T>({3, c, 3, 3}, rng));
        break;
      case 2:
        op = "depthwise_temporal_conv";
        add("x", random_normal<T>({n, c, t, h, h}, rng));
        add("beta", random_normal<T>({c, 3}, rng));
        break;
      case 3:
        op = "temporal_shift";
        add("x", random_normal<T>({n, 8, t, h, h}, rng));
        break;
      case 4:
        op = "temporal_pools";
        add("x", random_normal<T>({n, c, t, h, h}, rng));
        break;
      case 5:
        op = "dynamic_conv2d";
        add("x", random_normal<T>({n, c, t, h, h}, rng));
        add("kernels", random_normal<T>({n, t, 2, c, 3, 3}, rng));
        break;
      case 6:
        op = "conv1d_temporal";
        add("v", random_normal<T>({n, c, t}, rng));
        add("w", random_normal<T>({2, c, 3}, rng));
        break;
      case 7:
        op = "linear_softmax_ce";
        add("x", random_normal<T>({3, 4}, rng));
        add("w", random_normal<T>({5, 4}, rng));
        add("b", random_normal<T>({5}, rng));
        labels = {uniform_index(rng, 0, 4), uniform_index(rng, 0, 4), uniform_index(rng, 0, 4)};
        break;
      case 8:
        op = "gap_batchnorm_mul";
        add("x", random_normal<T>({n, c, t, h, h}, rng));
        bn = BatchNorm<T>("bn", c);
        bn.gamma.value = random_uniform<T>({c}, rng, T(0.5), T(1.5));
        bn.beta.value = random_uniform<T>({c}, rng);
        break;
    }
    Tape<T> tape;
    proj = projection_for<T>(forward(tape).shape(), rng);
  }

  Var<T> forward(Tape<T>& tape) {
    switch (index % kinds) {
      case 0:
        return tada::conv3d(bind(tape, 0), bind(tape, 1),
                            kernels::Conv3dGeometry{{1, stride, stride}, {1, pad, pad}});
      case 1: return conv2d_per_frame(bind(tape, 0), bind(tape, 1), stride, pad);
      case 2: return depthwise_temporal_conv(bind(tape, 0), bind(tape, 1));
      case 3: return temporal_shift(bind(tape, 0), 0.25, 0.25);
      case 4: {
        Var<T> x = bind(tape, 0);
        return tada::add(temporal_avg_pool(x, 3), temporal_max_pool(x, 3));
      }
      case 5: return dynamic_conv2d(bind(tape, 0), bind(tape, 1), stride, pad);
      case 6: return conv1d_temporal(bind(tape, 0), bind(tape, 1), 1, 1);
      case 7: {
        Var<T> b = bind(tape, 2);
        return softmax_cross_entropy(linear(bind(tape, 0), bind(tape, 1), &b), labels);
      }
      default: {
        // clip descriptor broadcast over time, times frame descriptors, plus BN
        Var<T> x = bind(tape, 0);
        const std::size_t t = x.dim(2);
        Var<T> clip = repeat_time(gap_spatiotemporal(x), t);
        return tada::add(mul(clip, gap_spatial(x)), gap_spatial(batchnorm(x, bn, Mode::train)));
      }
    }
  }

  Var<T> loss(Tape<T>& tape) { return proj(forward(tape)); }
  std::vector<Parameter<T>*> params() {
    std::vector<Parameter<T>*> ps;
    for (auto& p : owned) ps.push_back(p.get());
    if (index % kinds == 8) {
      ps.push_back(&bn.gamma);
      ps.push_back(&bn.beta);
    }
    return ps;
  }
};

/// A complete TAda bottleneck (C <= 8, T = 4, 8x8 frames).
template <class T>
struct BlockCase {
  std::size_t index = 0;
  std::string op = "bottleneck";
  std::optional<BottleneckBlock<T>> block;
  Parameter<T> input;
  Projection<T> proj;

  void draw(Rng& rng) {
    BlockSpec spec;
    spec.name = "block";
    spec.in_width = 4;
    spec.mid_width = 4;
    spec.out_width = index % 2 ? 8 : 4;
    spec.stride = index % 3 == 0 ? 2 : 1;
    spec.kind = ConvKind::tada;
    spec.input = {4, 8, 8};
    TAdaConvConfig cfg;
    cfg.identity_init = false;
    block.emplace(spec, cfg, rng);
    if (auto* a = block->aggregation()) {
      a->bn2.gamma.value = random_uniform<T>(a->bn2.gamma.value.shape(), rng, T(0.5), T(1.5));
    }
    input = Parameter<T>("input", random_normal<T>({1, 4, 4, 8, 8}, rng));
    Tape<T> tape;
    proj = projection_for<T>(block->forward(tape.constant(input.value), Mode::train).shape(), rng);
  }
  Var<T> loss(Tape<T>& tape) { return proj(block->forward(tape.parameter(input), Mode::train)); }
  std::vector<Parameter<T>*> params() {
    std::vector<Parameter<T>*> ps;
    block->collect(ps);
    return with_input(input, ps);
  }
};

template <class T, class Case>
void run_family(SuiteResult& r, Case& c, std::uint64_t seed, std::size_t i, std::uint64_t lane,
                const GradCheckOptions& opts) {
  Stopwatch lap;
  Rng rng = case_rng(seed, i, lane);
  const auto out = check_case<T>(c, rng, opts);
  r.record("case " + std::to_string(i) + " " + c.op + " [" + out.worst_tensor + "]", out.worst);
  r.seconds += lap.seconds();
}

}  // namespace detail

/// First result is the combined verdict, then one per family.
template <class T>
std::vector<SuiteResult> run_gradcheck(const GradCheckSuiteOptions& opts) {
  if (opts.cases < 1) throw UsageError("gradcheck: cases must be >= 1");
  const double tol = opts.tolerance;
  SuiteResult tada("tadaconv", tol), agg("aggregation", tol), zoo("op-zoo", tol), block("tada-block", tol);
  GradCheckOptions block_opts = opts.check;
  if (!block_opts.max_entries) block_opts.max_entries = 48;
  GradCheckOptions tada_opts = opts.check;
  if (!tada_opts.max_entries) tada_opts.max_entries = 256;
  for (std::size_t i = 0; i < opts.cases; ++i) {
    detail::TAdaConvCase<T> tc;
    tc.index = i;
    detail::run_family<T>(tada, tc, opts.seed, i, 10, tada_opts);
    detail::AggregationCase<T> ac;
    ac.index = i;
    detail::run_family<T>(agg, ac, opts.seed, i, 11, opts.check);
    detail::OpZooCase<T> zc;
    zc.index = i;
    detail::run_family<T>(zoo, zc, opts.seed, i, 12, opts.check);
    if (opts.block_every && i % opts.block_every == 0) {
      detail::BlockCase<T> bc;
      bc.index = i / opts.block_every;
      detail::run_family<T>(block, bc, opts.seed, i, 13, block_opts);
    }
  }
  SuiteResult all("gradcheck", tol);
  std::vector<SuiteResult> out{all, tada, agg, zoo};
  if (block.cases) out.push_back(block);
  for (std::size_t i = 1; i < out.size(); ++i) out[0].merge(out[i]);
  for (std::size_t i = 1; i < out.size(); ++i) out[0].seconds += out[i].seconds;
  return out;
}

}  // namespace tada::harness
