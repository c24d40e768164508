#pragma once

#include <stdexcept>
#include <string>

namespace logei {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values: non-finite inputs, nonpositive targets for a
// log transform, empty datasets, malformed data files.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch between vectors, datasets, and models.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Internal numerical failure: singular kernel matrix after jitter
// escalation, variance below the round-off clamp, inconsistent closed forms.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A computed exponent exceeds the representable range.
class OverflowError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Malformed run configuration: unknown fields, wrong types, bad values in
// config/manifest JSON. Surfaces as a usage error at the command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File system failures: unreadable input, unwritable output.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace logei
