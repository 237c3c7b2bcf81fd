#pragma once

#include <stdexcept>
#include <string>

namespace tada {

/// Operand extents are incompatible (channel mismatch, wrong rank, ...).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument is outside its admissible range.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A configuration or network descriptor is inconsistent.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An API or CLI entry point was called the wrong way.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A cost query lacks a field its operator kind needs.
struct QueryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace tada
