#pragma once

#include <stdexcept>
#include <string>

namespace steinrmt {

// Bad input to a public operation (n = 0, beta <= 0, empty sample, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A closed form was asked for outside the regime where it is stated.
class OutOfRegime : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two eigenangles closer than the collision threshold.
class SingularConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CDBM step could not be completed within the halving budget.
class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature non-convergence, failed self-checks, inconsistent residuals.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace steinrmt
