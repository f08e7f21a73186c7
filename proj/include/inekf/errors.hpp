#pragma once

#include <stdexcept>
#include <string>

namespace inekf {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// SO(3) logarithm requested within 1e-6 of the angle-pi singularity.
class NearAngularSingularity : public Error {
 public:
  using Error::Error;
};

/// Group operation between SE_k(3) elements with different slot counts.
class SlotMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Innovation covariance is numerically singular (condition number > 1e12).
class SingularInnovation : public Error {
 public:
  using Error::Error;
};

class OutOfOrderMeasurement : public Error {
 public:
  using Error::Error;
};

class UnknownChannel : public Error {
 public:
  using Error::Error;
};

class NonPositiveDt : public Error {
 public:
  using Error::Error;
};

class NonMonotonicStamp : public Error {
 public:
  using Error::Error;
};

class AlreadyAugmented : public Error {
 public:
  using Error::Error;
};

class NotAugmented : public Error {
 public:
  using Error::Error;
};

class IncompatibleShape : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class LogParseError : public Error {
 public:
  LogParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_number(line) {}
  int line_number;
};

class InsufficientOverlap : public Error {
 public:
  using Error::Error;
};

}  // namespace inekf
