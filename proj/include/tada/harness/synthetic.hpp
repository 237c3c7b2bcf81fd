#pragma once

// Ramp-direction task: every clip is a static texture whose brightness
// ramps up (class 0) or down (class 1) over time. Each descending clip is
// the exact time reversal of an ascending one, so the label is carried by
// temporal order alone.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "tada/core/errors.hpp"
#include "tada/core/random.hpp"
#include "tada/core/tensor.hpp"

namespace tada::harness {

struct SyntheticTaskSpec {
  std::size_t frames = 8;
  std::size_t height = 8;
  std::size_t width = 8;
  std::size_t channels = 1;
  double noise = 0.05;
  double texture = 0.3;  // amplitude of the per-clip static pattern
  std::size_t train_per_class = 64;
  std::size_t test_per_class = 64;
  std::uint64_t seed = 0;

  void validate() const {
    if (frames < 2) throw ConfigError("synthetic task: need at least 2 frames");
    if (!height || !width || !channels) throw ConfigError("synthetic task: empty frames");
    if (!train_per_class || !test_per_class) throw ConfigError("synthetic task: empty split");
    if (!(noise >= 0) || !(texture >= 0)) throw ConfigError("synthetic task: amplitudes must be >= 0");
  }
};

enum RampLabel : std::size_t { ascending = 0, descending = 1 };

template <class T>
struct ClipSet {
  Tensor<T> clips;  // [M, C, T, H, W]
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
};

/// x[..., t, :, :] -> x[..., T-1-t, :, :] for a [M, C, T, H, W] tensor.
template <class T>
Tensor<T> reverse_time(const Tensor<T>& x) {
  if (x.rank() != 5) throw DimensionError("reverse_time: expected [M,C,T,H,W]");
  const std::size_t outer = x.dim(0) * x.dim(1), t = x.dim(2), frame = x.dim(3) * x.dim(4);
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t s = 0; s < t; ++s)
      for (std::size_t i = 0; i < frame; ++i)
        y.data()[(o * t + (t - 1 - s)) * frame + i] = x.data()[(o * t + s) * frame + i];
  return y;
}

/// `per_class` ascending clips interleaved with their reversals.
template <class T>
ClipSet<T> make_ramp_clips(const SyntheticTaskSpec& spec, std::size_t per_class, Rng& rng) {
  spec.validate();
  const std::size_t C = spec.channels, Tn = spec.frames, H = spec.height, W = spec.width;
  const std::size_t clip = C * Tn * H * W;
  ClipSet<T> out{Tensor<T>({2 * per_class, C, Tn, H, W}), {}};
  std::uniform_real_distribution<double> start(-1.0, 0.0), rise(0.5, 1.5), unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> pattern(H * W);
  for (std::size_t j = 0; j < per_class; ++j) {
    const double lo = start(rng), span = rise(rng);
    T* asc = out.clips.data().data() + (2 * j) * clip;
    T* desc = asc + clip;
    for (std::size_t c = 0; c < C; ++c) {
      for (auto& v : pattern) v = spec.texture * unit(rng);
      for (std::size_t t = 0; t < Tn; ++t) {
        const double level = lo + span * static_cast<double>(t) / static_cast<double>(Tn - 1);
        for (std::size_t i = 0; i < H * W; ++i) {
          const double v = level + pattern[i] + spec.noise * gauss(rng);
          asc[(c * Tn + t) * H * W + i] = static_cast<T>(v);
          desc[(c * Tn + (Tn - 1 - t)) * H * W + i] = static_cast<T>(v);
        }
      }
    }
    out.labels.push_back(ascending);
    out.labels.push_back(descending);
  }
  return out;
}

/// Rows `idx` of a clip set as one batch.
template <class T>
ClipSet<T> gather(const ClipSet<T>& set, const std::vector<std::size_t>& idx) {
  Shape shape = set.clips.shape();
  const std::size_t clip = set.clips.numel() / shape[0];
  shape[0] = idx.size();
  ClipSet<T> out{Tensor<T>(shape), {}};
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const auto src = set.clips.data().subspan(idx[b] * clip, clip);
    std::copy(src.begin(), src.end(), out.clips.data().begin() + static_cast<long>(b * clip));
    out.labels.push_back(set.labels.at(idx[b]));
  }
  return out;
}

}  // namespace tada::harness
