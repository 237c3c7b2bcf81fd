#pragma once

// Builds library objects from `key = value` files.
//
// Network files start from an optional `preset` and override fields:
//   seed = 1
//   preset = tada2d50
//   frames = 16
//   stages = 3:64:256:2:tada, 4:128:512:2:spatial
// TAdaConv keys (generator, k1, k2, reduction, use_global, calibration_dim,
// source, temporally_varying, calibrated_fraction) apply to every tada stage.

#include <sstream>
#include <string>
#include <vector>

#include "tada/blocks/netspec.hpp"
#include "tada/harness/config_file.hpp"
#include "tada/harness/demo.hpp"
#include "tada/tadaconv/config.hpp"

namespace tada::harness {

namespace detail {
inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

inline std::size_t to_size(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  try {
    const unsigned long v = std::stoul(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": expected an integer, got '" + s + "'");
}
}  // namespace detail

inline TAdaConvConfig tada_config_from(const KeyValueConfig& kv, TAdaConvConfig cfg = {}) {
  if (kv.has("generator")) {
    const std::string g = kv.get("generator");
    if (g != "linear" && g != "nonlinear") throw ConfigError("generator must be linear or nonlinear");
    cfg.generator = g == "linear" ? GeneratorForm::linear : GeneratorForm::nonlinear;
  }
  cfg.k1 = kv.get_uint("k1", cfg.k1);
  cfg.k2 = kv.get_uint("k2", cfg.k2);
  cfg.reduction = kv.get_uint("reduction", cfg.reduction);
  if (kv.has("use_global")) cfg.use_global = kv.get_bool("use_global");
  if (kv.has("temporally_varying")) cfg.temporally_varying = kv.get_bool("temporally_varying");
  if (kv.has("calibration_dim")) cfg.calibration_dim = parse_calibration_dim(kv.get("calibration_dim"));
  if (kv.has("source")) {
    const std::string s = kv.get("source");
    if (s == "dynamic") cfg.source = CalibrationSource::dynamic;
    else if (s == "learnable") cfg.source = CalibrationSource::learnable;
    else if (s == "none") cfg.source = CalibrationSource::none;
    else throw ConfigError("source must be dynamic, learnable or none");
  }
  if (kv.has("calibrated_fraction")) {
    const auto parts = detail::split(kv.get("calibrated_fraction"), '/');
    if (parts.size() != 2) throw ConfigError("calibrated_fraction must look like 1/2");
    cfg.calibrated_fraction = {detail::to_size(parts[0], "calibrated_fraction"),
                               detail::to_size(parts[1], "calibrated_fraction")};
  }
  return cfg;
}

inline NetSpec netspec_from(const KeyValueConfig& kv) {
  NetSpec s = kv.has("preset") ? presets::by_name(kv.get("preset")) : NetSpec{};
  s.name = kv.get("name", s.name.empty() ? std::string("custom") : s.name);
  s.in_channels = kv.get_uint("in_channels", s.in_channels);
  s.frames = kv.get_uint("frames", s.frames);
  s.height = kv.get_uint("height", s.height);
  s.width = kv.get_uint("width", s.width);
  s.classes = kv.get_uint("classes", s.classes);
  s.stem.kt = kv.get_uint("stem_kt", s.stem.kt);
  s.stem.k = kv.get_uint("stem_k", s.stem.k);
  s.stem.stride = kv.get_uint("stem_stride", s.stem.stride);
  s.stem.width = kv.get_uint("stem_width", s.stem.width);
  if (kv.has("stages")) {
    s.stages.clear();
    for (const auto& item : detail::split(kv.get("stages"), ',')) {
      const auto f = detail::split(item, ':');
      if (f.size() != 5) throw ConfigError("stage '" + item + "' must be blocks:mid:out:stride:kind");
      s.stages.push_back({detail::to_size(f[0], "stage blocks"), detail::to_size(f[1], "stage mid width"),
                          detail::to_size(f[2], "stage out width"), detail::to_size(f[3], "stage stride"),
                          parse_conv_kind(f[4])});
    }
  }
  if (kv.has("use_aggregation")) s.aggregation.use_aggregation = kv.get_bool("use_aggregation");
  if (kv.has("use_shortcut_branch")) s.aggregation.use_shortcut_branch = kv.get_bool("use_shortcut_branch");
  if (kv.has("separate_bn")) s.aggregation.separate_bn = kv.get_bool("separate_bn");
  if (s.stages.empty()) throw ConfigError("network spec has no stages");
  s.validate();
  return s;
}

struct DemoSettings {
  SyntheticTaskSpec task;
  TrainOptions train;
  std::size_t seeds = 5;
  std::string model = "all";
};

inline DemoSettings demo_settings_from(const KeyValueConfig& kv, DemoSettings d = {}) {
  d.task.seed = kv.seed();
  d.task.frames = kv.get_uint("frames", d.task.frames);
  d.task.height = kv.get_uint("height", d.task.height);
  d.task.width = kv.get_uint("width", d.task.width);
  d.task.noise = kv.get_double("noise", d.task.noise);
  d.task.texture = kv.get_double("texture", d.task.texture);
  d.task.train_per_class = kv.get_uint("train_per_class", d.task.train_per_class);
  d.task.test_per_class = kv.get_uint("test_per_class", d.task.test_per_class);
  d.train.epochs = kv.get_uint("epochs", d.train.epochs);
  d.train.batch_size = kv.get_uint("batch_size", d.train.batch_size);
  d.train.lr = kv.get_double("lr", d.train.lr);
  d.train.momentum = kv.get_double("momentum", d.train.momentum);
  d.train.stop_accuracy = kv.get_double("stop_accuracy", d.train.stop_accuracy);
  d.seeds = kv.get_uint("seeds", d.seeds);
  d.model = kv.get("model", d.model);
  kv.reject_unused();
  d.task.validate();
  d.train.validate();
  return d;
}

}  // namespace tada::harness
