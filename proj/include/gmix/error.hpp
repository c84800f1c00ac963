#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gmix {

// Parameter outside the support of a distribution or formula.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Cholesky factorization failed; pivot() is the zero-based index of the
// first non-positive pivot.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(const std::string& what, std::size_t pivot)
      : std::runtime_error(what + " (pivot " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

// Arithmetic broke down during sampling (e.g. every component density is
// zero for one observation).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, inconsistent data, unknown options.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A post-processing step had nothing to work on.
class EmptyResult : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gmix
