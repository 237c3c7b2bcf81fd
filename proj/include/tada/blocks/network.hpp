#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tada/baseline/temporal_ops.hpp"
#include "tada/blocks/aggregation.hpp"
#include "tada/blocks/netspec.hpp"
#include "tada/tadaconv/tadaconv.hpp"

namespace tada {

namespace detail {
template <class T>
Parameter<T> conv_weight(const std::string& name, Shape shape, Rng& rng) {
  Parameter<T> p(name, Tensor<T>(shape));
  std::size_t fan_in = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
  kaiming_uniform(p.value, fan_in, rng);
  return p;
}

inline std::string norm_name(const std::string& gamma_name) {
  const auto pos = gamma_name.rfind(".gamma");
  return pos == std::string::npos ? gamma_name : gamma_name.substr(0, pos);
}
}  // namespace detail

/// Residual bottleneck: 1x1 -> middle conv -> 1x1, BN(+ReLU) after each
/// conv, projection shortcut when width or stride changes. The middle
/// position is a plain spatial conv, a TAdaConv followed by temporal
/// aggregation, a spatial + temporal pair, or a 3x3x3 conv.
template <class T>
class BottleneckBlock {
 public:
  BottleneckBlock(const BlockSpec& spec, const TAdaConvConfig& cfg, Rng& rng) : spec_(spec) {
    spec_.validate();
    const std::string& p = spec_.name;
    const std::size_t in = spec_.in_width, mid = spec_.mid_width, out = spec_.out_width;
    const std::size_t k = spec_.k;
    conv1_ = detail::conv_weight<T>(p + ".conv1.weight", {mid, in, 1, 1}, rng);
    bn1_ = BatchNorm<T>(p + ".bn1", mid);
    switch (spec_.kind) {
      case ConvKind::spatial:
        conv2_ = detail::conv_weight<T>(p + ".conv2.weight", {mid, mid, k, k}, rng);
        bn2_ = BatchNorm<T>(p + ".bn2", mid);
        break;
      case ConvKind::tada:
        tada_.emplace(p + ".conv2", mid, mid, k, spec_.stride, (k - 1) / 2, cfg, spec_.input.t, rng);
        agg_.emplace(p + ".bn2", p + ".bn2_agg", mid);
        break;
      case ConvKind::r2plus1d:
        conv2_ = detail::conv_weight<T>(p + ".conv2.weight", {mid, mid, k, k}, rng);
        bn2_ = BatchNorm<T>(p + ".bn2", mid);
        conv2t_ = detail::conv_weight<T>(p + ".conv2t.weight", {mid, mid, 3, 1, 1}, rng);
        bn2t_ = BatchNorm<T>(p + ".bn2t", mid);
        break;
      case ConvKind::conv3d:
        conv2_ = detail::conv_weight<T>(p + ".conv2.weight", {mid, mid, 3, k, k}, rng);
        bn2_ = BatchNorm<T>(p + ".bn2", mid);
        break;
    }
    conv3_ = detail::conv_weight<T>(p + ".conv3.weight", {out, mid, 1, 1}, rng);
    bn3_ = BatchNorm<T>(p + ".bn3", out);
    if (spec_.has_projection()) {
      proj_ = detail::conv_weight<T>(p + ".proj.weight", {out, in, 1, 1}, rng);
      proj_bn_ = BatchNorm<T>(p + ".proj_bn", out);
    }
  }

  const BlockSpec& spec() const { return spec_; }
  TAdaConv2d<T>* tada() { return tada_ ? &*tada_ : nullptr; }
  AggregationParams<T>* aggregation() { return agg_ ? &*agg_ : nullptr; }

  Var<T> forward(Var<T> x, Mode mode) {
    Tape<T>& tape = *x.tape;
    const std::size_t k = spec_.k, pad = (k - 1) / 2, s = spec_.stride;
    Var<T> h = relu(batchnorm(conv2d_per_frame(x, tape.parameter(conv1_), 1, 0), bn1_, mode));
    switch (spec_.kind) {
      case ConvKind::spatial:
        h = relu(batchnorm(conv2d_per_frame(h, tape.parameter(conv2_), s, pad), bn2_, mode));
        break;
      case ConvKind::tada:
        h = aggregate(tada_->forward(h, mode), *agg_, spec_.flags, mode);
        break;
      case ConvKind::r2plus1d:
        h = relu(batchnorm(conv2d_per_frame(h, tape.parameter(conv2_), s, pad), bn2_, mode));
        h = relu(batchnorm(conv3d(h, tape.parameter(conv2t_),
                                  kernels::Conv3dGeometry{{1, 1, 1}, {1, 0, 0}}),
                           bn2t_, mode));
        break;
      case ConvKind::conv3d:
        h = relu(batchnorm(conv3d(h, tape.parameter(conv2_),
                                  kernels::Conv3dGeometry{{1, s, s}, {1, pad, pad}}),
                           bn2_, mode));
        break;
    }
    h = batchnorm(conv2d_per_frame(h, tape.parameter(conv3_), 1, 0), bn3_, mode);
    Var<T> shortcut = x;
    if (spec_.has_projection()) {
      shortcut = batchnorm(conv2d_per_frame(x, tape.parameter(proj_), s, 0), proj_bn_, mode);
    }
    return relu(add(h, shortcut));
  }

  void collect(std::vector<Parameter<T>*>& out) {
    auto bn = [&out](BatchNorm<T>& b) {
      out.push_back(&b.gamma);
      out.push_back(&b.beta);
    };
    out.push_back(&conv1_);
    bn(bn1_);
    if (tada_) {
      tada_->collect(out);
      bn(agg_->bn1);
      bn(agg_->bn2);
    } else {
      out.push_back(&conv2_);
      bn(bn2_);
      if (spec_.kind == ConvKind::r2plus1d) {
        out.push_back(&conv2t_);
        bn(bn2t_);
      }
    }
    out.push_back(&conv3_);
    bn(bn3_);
    if (spec_.has_projection()) {
      out.push_back(&proj_);
      bn(proj_bn_);
    }
  }

  void norms(std::vector<BatchNorm<T>*>& out) {
    out.push_back(&bn1_);
    if (tada_) {
      for (auto* b : tada_->generator.norms()) out.push_back(b);
      out.push_back(&agg_->bn1);
      out.push_back(&agg_->bn2);
    } else {
      out.push_back(&bn2_);
      if (spec_.kind == ConvKind::r2plus1d) out.push_back(&bn2t_);
    }
    out.push_back(&bn3_);
    if (spec_.has_projection()) out.push_back(&proj_bn_);
  }

 private:
  BlockSpec spec_;
  Parameter<T> conv1_;
  BatchNorm<T> bn1_;
  Parameter<T> conv2_;
  BatchNorm<T> bn2_;
  Parameter<T> conv2t_;
  BatchNorm<T> bn2t_;
  std::optional<TAdaConv2d<T>> tada_;
  std::optional<AggregationParams<T>> agg_;
  Parameter<T> conv3_;
  BatchNorm<T> bn3_;
  Parameter<T> proj_;
  BatchNorm<T> proj_bn_;
};

template <class T>
BottleneckBlock<T> build_bottleneck_block(const BlockSpec& spec, const TAdaConvConfig& cfg, Rng& rng) {
  return BottleneckBlock<T>(spec, cfg, rng);
}

/// stem -> stages -> spatio-temporal GAP -> linear classifier.
template <class T>
class Network {
 public:
  Network(const NetSpec& spec, const TAdaConvConfig& cfg, Rng& rng) : spec_(spec), cfg_(cfg) {
    spec_.validate();
    const auto& st = spec_.stem;
    stem_ = detail::conv_weight<T>("stem.conv.weight",
                                   st.kt == 1 ? Shape{st.width, spec_.in_channels, st.k, st.k}
                                              : Shape{st.width, spec_.in_channels, st.kt, st.k, st.k},
                                   rng);
    stem_bn_ = BatchNorm<T>("stem.bn", st.width);
    const auto specs = spec_.blocks();
    blocks_.reserve(specs.size());
    for (const auto& bs : specs) blocks_.emplace_back(bs, cfg_, rng);
    const std::size_t feat = spec_.feature_width();
    const T bound = T(1) / std::sqrt(static_cast<T>(feat));
    head_w_ = Parameter<T>("head.weight", random_uniform<T>({spec_.classes, feat}, rng, -bound, bound));
    head_b_ = Parameter<T>("head.bias", Tensor<T>::zeros({spec_.classes}));
  }

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) = default;

  const NetSpec& spec() const { return spec_; }
  std::vector<BottleneckBlock<T>>& blocks() { return blocks_; }

  /// Clip features before the head: [N, C_last].
  Var<T> features(Var<T> x, Mode mode) {
    const auto d = video_dims(x.value(), "network");
    if (d.c != spec_.in_channels || d.t != spec_.frames || d.h != spec_.height || d.w != spec_.width) {
      throw DimensionError("network " + spec_.name + ": input " + shape_str(x.shape()) +
                           " does not match the spec geometry");
    }
    Tape<T>& tape = *x.tape;
    const auto& st = spec_.stem;
    const std::size_t pad = (st.k - 1) / 2;
    Var<T> h = st.kt == 1
                   ? conv2d_per_frame(x, tape.parameter(stem_), st.stride, pad)
                   : conv3d(x, tape.parameter(stem_),
                            kernels::Conv3dGeometry{{1, st.stride, st.stride}, {(st.kt - 1) / 2, pad, pad}});
    h = relu(batchnorm(h, stem_bn_, mode));
    for (auto& b : blocks_) h = b.forward(h, mode);
    return gap_spatiotemporal(h);
  }

  Var<T> forward(Var<T> x, Mode mode) {
    Var<T> f = features(x, mode);
    Tape<T>& tape = *x.tape;
    Var<T> b = tape.parameter(head_b_);
    return linear(f, tape.parameter(head_w_), &b);
  }

  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out{&stem_, &stem_bn_.gamma, &stem_bn_.beta};
    for (auto& b : blocks_) b.collect(out);
    out.push_back(&head_w_);
    out.push_back(&head_b_);
    return out;
  }

  std::vector<BatchNorm<T>*> norms() {
    std::vector<BatchNorm<T>*> out{&stem_bn_};
    for (auto& b : blocks_) b.norms(out);
    return out;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += p->numel();
    return n;
  }

  /// Copies every parameter and BN running statistic whose name and shape
  /// match one in `from`. Returns the number of parameter tensors copied.
  std::size_t copy_matching(Network& from) {
    std::map<std::string, Parameter<T>*> src;
    for (auto* p : from.parameters()) src[p->name] = p;
    std::size_t copied = 0;
    for (auto* p : parameters()) {
      auto it = src.find(p->name);
      if (it == src.end() || it->second->value.shape() != p->value.shape()) continue;
      p->value = it->second->value;
      ++copied;
    }
    std::map<std::string, BatchNorm<T>*> bns;
    for (auto* b : from.norms()) bns[detail::norm_name(b->gamma.name)] = b;
    for (auto* b : norms()) {
      auto it = bns.find(detail::norm_name(b->gamma.name));
      if (it == bns.end() || it->second->channels() != b->channels()) continue;
      b->running_mean = it->second->running_mean;
      b->running_var = it->second->running_var;
    }
    return copied;
  }

 private:
  NetSpec spec_;
  TAdaConvConfig cfg_;
  Parameter<T> stem_;
  BatchNorm<T> stem_bn_;
  std::vector<BottleneckBlock<T>> blocks_;
  Parameter<T> head_w_;
  Parameter<T> head_b_;
};

template <class T>
Network<T> build_network(const NetSpec& spec, const TAdaConvConfig& cfg, Rng& rng) {
  return Network<T>(spec, cfg, rng);
}

}  // namespace tada
