#pragma once

// Declarative network descriptors: a stem followed by stages of residual
// bottleneck blocks, then spatio-temporal average pooling and a linear head.
// The stem has no max pool; spatial downsampling happens on the middle
// convolution of the first block of a stage; T is never reduced.

#include <cstddef>
#include <string>
#include <vector>

#include "tada/blocks/aggregation.hpp"
#include "tada/core/errors.hpp"

namespace tada {

/// What sits in the middle (3x3) position of a bottleneck.
enum class ConvKind { spatial, tada, r2plus1d, conv3d };

inline const char* to_string(ConvKind k) {
  switch (k) {
    case ConvKind::spatial: return "spatial";
    case ConvKind::tada: return "tada";
    case ConvKind::r2plus1d: return "r2plus1d";
    case ConvKind::conv3d: return "conv3d";
  }
  return "?";
}

inline ConvKind parse_conv_kind(const std::string& s) {
  if (s == "spatial") return ConvKind::spatial;
  if (s == "tada") return ConvKind::tada;
  if (s == "r2plus1d") return ConvKind::r2plus1d;
  if (s == "conv3d") return ConvKind::conv3d;
  throw ConfigError("unknown conv kind '" + s + "'");
}

struct StemSpec {
  std::size_t kt = 1;
  std::size_t k = 7;
  std::size_t stride = 2;
  std::size_t width = 64;
};

struct StageSpec {
  std::size_t blocks = 1;
  std::size_t mid_width = 64;
  std::size_t out_width = 256;
  std::size_t stride = 2;  // spatial stride of the first block
  ConvKind kind = ConvKind::spatial;
};

struct Geometry {
  std::size_t t = 0, h = 0, w = 0;
  bool operator==(const Geometry&) const = default;
};

struct BlockSpec {
  std::string name;
  std::size_t in_width = 0;
  std::size_t mid_width = 0;
  std::size_t out_width = 0;
  std::size_t stride = 1;
  std::size_t k = 3;
  ConvKind kind = ConvKind::spatial;
  BlockVariantFlags flags;
  Geometry input;  // geometry entering the block

  bool has_projection() const { return stride != 1 || in_width != out_width; }

  Geometry output() const {
    const std::size_t pad = (k - 1) / 2;
    return {input.t, (input.h + 2 * pad - k) / stride + 1, (input.w + 2 * pad - k) / stride + 1};
  }

  void validate() const {
    if (!in_width || !mid_width || !out_width) throw ConfigError(name + ": widths must be positive");
    if (!stride) throw ConfigError(name + ": stride must be >= 1");
    if (k % 2 == 0) throw ConfigError(name + ": kernel size must be odd");
    const std::size_t pad = (k - 1) / 2;
    if (input.h + 2 * pad < k || input.w + 2 * pad < k) {
      throw ConfigError(name + ": frame " + std::to_string(input.h) + "x" +
                        std::to_string(input.w) + " smaller than the " + std::to_string(k) +
                        "x" + std::to_string(k) + " kernel");
    }
    if (kind == ConvKind::tada) flags.validate();
  }
};

struct NetSpec {
  std::string name;
  std::size_t in_channels = 3;
  std::size_t frames = 8;
  std::size_t height = 224;
  std::size_t width = 224;
  StemSpec stem;
  std::vector<StageSpec> stages;
  std::size_t classes = 400;
  BlockVariantFlags aggregation;  // applied to tada blocks

  Geometry input() const { return {frames, height, width}; }

  Geometry stem_output() const {
    if (!stem.stride || stem.k % 2 == 0 || stem.kt % 2 == 0) {
      throw ConfigError(name + ": stem kernel sizes must be odd and stride >= 1");
    }
    const std::size_t pad = (stem.k - 1) / 2;
    if (height + 2 * pad < stem.k || width + 2 * pad < stem.k) {
      throw ConfigError(name + ": input frame smaller than the stem kernel");
    }
    return {frames, (height + 2 * pad - stem.k) / stem.stride + 1,
            (width + 2 * pad - stem.k) / stem.stride + 1};
  }

  /// Expands the stages into blocks with resolution bookkeeping.
  std::vector<BlockSpec> blocks() const {
    std::vector<BlockSpec> out;
    Geometry g = stem_output();
    std::size_t in = stem.width;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const auto& st = stages[s];
      if (st.blocks == 0) throw ConfigError(name + ": stage with zero blocks");
      for (std::size_t b = 0; b < st.blocks; ++b) {
        BlockSpec bs;
        bs.name = "stage" + std::to_string(s + 1) + ".block" + std::to_string(b);
        bs.in_width = in;
        bs.mid_width = st.mid_width;
        bs.out_width = st.out_width;
        bs.stride = b == 0 ? st.stride : 1;
        bs.kind = st.kind;
        bs.flags = aggregation;
        bs.input = g;
        bs.validate();
        g = bs.output();
        in = st.out_width;
        out.push_back(bs);
      }
    }
    return out;
  }

  /// Output geometry of each stage.
  std::vector<Geometry> stage_outputs() const {
    std::vector<Geometry> out;
    const auto bl = blocks();
    std::size_t idx = 0;
    for (const auto& st : stages) {
      idx += st.blocks;
      out.push_back(bl[idx - 1].output());
    }
    return out;
  }

  std::size_t feature_width() const { return stages.empty() ? stem.width : stages.back().out_width; }

  void validate() const {
    if (!in_channels || !frames || !classes || !stem.width) {
      throw ConfigError(name + ": extents must be positive");
    }
    (void)blocks();
  }
};

namespace presets {

inline NetSpec resnet50(const std::string& name, ConvKind kind, std::size_t stem_kt) {
  NetSpec s;
  s.name = name;
  s.stem = {stem_kt, 7, 2, 64};
  s.stages = {{3, 64, 256, 2, kind}, {4, 128, 512, 2, kind}, {6, 256, 1024, 2, kind},
              {3, 512, 2048, 2, kind}};
  return s;
}

inline NetSpec tiny(const std::string& name, ConvKind kind) {
  NetSpec s;
  s.name = name;
  s.in_channels = 3;
  s.frames = 4;
  s.height = 8;
  s.width = 8;
  s.stem = {kind == ConvKind::conv3d ? std::size_t{3} : std::size_t{1}, 3, 1, 8};
  s.stages = {{1, 4, 8, 1, kind}, {1, 8, 16, 2, kind}};
  s.classes = 5;
  return s;
}

/// Two single-block stages on 1-channel 8-frame 8x8 clips, two classes.
inline NetSpec demo(const std::string& name, ConvKind kind) {
  NetSpec s;
  s.name = name;
  s.in_channels = 1;
  s.frames = 8;
  s.height = 8;
  s.width = 8;
  s.stem = {1, 3, 1, 8};
  s.stages = {{1, 8, 8, 1, kind}, {1, 8, 16, 2, kind}};
  s.classes = 2;
  return s;
}

inline std::vector<std::string> names() {
  return {"r2d50", "tada2d50", "r2plus1d50", "r3d50", "r2d_tiny", "tada2d_tiny",
          "r2plus1d_tiny", "r3d_tiny"};
}

inline NetSpec by_name(const std::string& name) {
  if (name == "r2d50") return resnet50(name, ConvKind::spatial, 1);
  if (name == "tada2d50") return resnet50(name, ConvKind::tada, 1);
  if (name == "r2plus1d50") return resnet50(name, ConvKind::r2plus1d, 1);
  if (name == "r3d50") return resnet50(name, ConvKind::conv3d, 3);
  if (name == "r2d_tiny") return tiny(name, ConvKind::spatial);
  if (name == "tada2d_tiny") return tiny(name, ConvKind::tada);
  if (name == "r2plus1d_tiny") return tiny(name, ConvKind::r2plus1d);
  if (name == "r3d_tiny") return tiny(name, ConvKind::conv3d);
  throw UsageError("unknown network preset '" + name + "'");
}

}  // namespace presets
}  // namespace tada
