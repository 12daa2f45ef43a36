#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (e.g. s > delta_o).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Modulus family used with parameters it does not support.
class FamilyError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid parameter values.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Sample grid too short, unsorted, or not spanning enough decades.
class GridError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Thresholds given in the wrong order (e.g. eps >= xi0).
class OrderingError : public Error {
 public:
  using Error::Error;
};

class RegressionError : public Error {
 public:
  using Error::Error;
};

class UnknownNameError : public Error {
 public:
  using Error::Error;
};

/// A coordinate left the finite range during time stepping.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Configuration file problem; `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace nlflow
