#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tropkraus {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative kernel (eigensolver, exponential) failed to produce a finite,
/// accurate result.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An argument lies outside the domain of the operation, e.g. a matrix that
/// is required to be positive definite is not.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double min_eigenvalue)
      : Error(what + " (min eigenvalue " + std::to_string(min_eigenvalue) + ")"),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Malformed call: empty lists, dimension mismatches, bad indices.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// The problem instance is structurally unusable (e.g. a node without
/// incoming transitions).
class InstanceError : public Error {
 public:
  using Error::Error;
};

/// Finite-time escape of an indefinite Riccati flow: the X(tau) block of the
/// Hamiltonian exponential became singular.
class EscapeError : public Error {
 public:
  EscapeError(const std::string& what, double smallest_singular_value)
      : Error(what + " (smallest singular value " + std::to_string(smallest_singular_value) + ")"),
        smallest_singular_value_(smallest_singular_value) {}
  double smallest_singular_value() const noexcept { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

/// An iteration produced non-finite or unboundedly growing iterates.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iterations)
      : Error(what + " after " + std::to_string(iterations) + " iterations"), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

/// Unreadable or schema-violating input file.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace tropkraus
