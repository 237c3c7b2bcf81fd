#pragma once

#include <cstddef>
#include <string>

#include "tada/core/errors.hpp"

namespace tada {

enum class GeneratorForm { linear, nonlinear };

/// Which axis of the base kernel W_b[Co, Ci, k, k] the calibration scales.
enum class CalibrationDim { cin, cout, cin_x_cout, kspatial };

/// Where the calibration comes from.
enum class CalibrationSource { dynamic, learnable, none };

struct Fraction {
  std::size_t num = 1;
  std::size_t den = 1;

  /// ceil(num / den * n)
  std::size_t ceil_of(std::size_t n) const { return (num * n + den - 1) / den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Every knob of a temporally-adaptive convolution.
///
/// The defaults are the operating point used throughout: non-linear
/// generator with (3, 3) temporal kernels, reduction 4, global descriptor
/// on, input-channel calibration on all channels, identity initialization.
struct TAdaConvConfig {
  GeneratorForm generator = GeneratorForm::nonlinear;
  std::size_t k1 = 3;
  std::size_t k2 = 3;
  std::size_t reduction = 4;
  bool use_global = true;
  CalibrationDim calibration_dim = CalibrationDim::cin;
  CalibrationSource source = CalibrationSource::dynamic;
  bool temporally_varying = true;
  Fraction calibrated_fraction{1, 1};
  bool identity_init = true;

  /// Generator hidden width C / r.
  std::size_t hidden(std::size_t channels) const { return channels / reduction; }

  /// Number of input channels that receive calibration.
  std::size_t calibrated_channels(std::size_t cin) const { return calibrated_fraction.ceil_of(cin); }

  void validate(std::size_t cin) const {
    if (k1 % 2 == 0 || k2 % 2 == 0) throw ConfigError("tadaconv: generator kernel sizes must be odd");
    if (reduction < 1) throw ConfigError("tadaconv: reduction ratio must be >= 1");
    if (generator == GeneratorForm::nonlinear && hidden(cin) < 1) {
      throw ConfigError("tadaconv: C/r < 1 (C=" + std::to_string(cin) +
                        ", r=" + std::to_string(reduction) + ")");
    }
    if (calibrated_fraction.den == 0 || calibrated_fraction.num == 0 ||
        calibrated_fraction.num > calibrated_fraction.den) {
      throw ConfigError("tadaconv: calibrated fraction must lie in (0, 1]");
    }
    if (calibrated_channels(cin) < 1) throw ConfigError("tadaconv: no channel calibrated");
  }
};

inline const char* to_string(GeneratorForm g) {
  return g == GeneratorForm::linear ? "linear" : "nonlinear";
}

inline const char* to_string(CalibrationDim d) {
  switch (d) {
    case CalibrationDim::cin: return "cin";
    case CalibrationDim::cout: return "cout";
    case CalibrationDim::cin_x_cout: return "cin_x_cout";
    case CalibrationDim::kspatial: return "kspatial";
  }
  return "?";
}

inline const char* to_string(CalibrationSource s) {
  switch (s) {
    case CalibrationSource::dynamic: return "dynamic";
    case CalibrationSource::learnable: return "learnable";
    case CalibrationSource::none: return "none";
  }
  return "?";
}

inline CalibrationDim parse_calibration_dim(const std::string& s) {
  if (s == "cin") return CalibrationDim::cin;
  if (s == "cout") return CalibrationDim::cout;
  if (s == "cin_x_cout") return CalibrationDim::cin_x_cout;
  if (s == "kspatial") return CalibrationDim::kspatial;
  throw ConfigError("unknown calibration dimension '" + s + "'");
}

}  // namespace tada
