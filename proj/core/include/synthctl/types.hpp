#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace synthctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Bad user input: malformed files, out-of-range parameters, shape mismatches.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPositiveDefiniteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Iterative solver hit its iteration cap. Carries the best iterate seen.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, Vector best_iterate, double residual)
      : NumericalError(what), best_(std::move(best_iterate)), residual_(residual) {}

  const Vector& best_iterate() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Vector best_;
  double residual_;
};

}  // namespace synthctl
