#pragma once

#include <stdexcept>
#include <string>

namespace sparsecol {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class InvalidSet : public Error {
public:
  using Error::Error;
};

class NotInMargin : public Error {
public:
  using Error::Error;
};

class MonotonicityViolation : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class EllipticityViolation : public Error {
public:
  EllipticityViolation(const std::string& what, double x) : Error(what), x_(x) {}
  /// Mesh location where the floor a_0 - sum |a_m| is not positive.
  double x() const { return x_; }

private:
  double x_;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace sparsecol
