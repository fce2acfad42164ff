#pragma once

#include <stdexcept>
#include <string>

namespace driftinv {

/// Invalid sizes, unknown names, malformed files. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Anything that goes wrong inside the numerics. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Raised when the data cannot be differentiated reliably (too many
/// non-positive slopes); usually cured by mollifying first.
class DataQualityError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Normal equations of the mollifier failed to factor.
class FactorizationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// A file could not be read or written; the message names the path.
class OutputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace driftinv
