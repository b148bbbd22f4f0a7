#pragma once

#include <stdexcept>
#include <string>

namespace narrownet {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition (width parity, Jacobian size, ...) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Every configuration of a learning-rate grid diverged.
class GridError : public Error {
 public:
  using Error::Error;
};

}  // namespace narrownet
