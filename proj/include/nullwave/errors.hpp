#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nullwave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point lies outside the region where a map or formula is defined
/// (outside the Einstein diamond, at or beyond null infinity).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParamError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class OrderError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class CflError : public Error {
 public:
  using Error::Error;
};

class NanError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, const std::string& what, std::vector<double> residuals = {})
      : Error(what), iterations_(iterations), residuals_(std::move(residuals)) {}
  int iterations() const { return iterations_; }
  /// Residual history up to the failure.
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  int iterations_;
  std::vector<double> residuals_;
};

}  // namespace nullwave
