#pragma once

#include <stdexcept>
#include <string>

namespace sphwin {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input violates a structural precondition (grid exactness, band mismatch,
/// malformed file).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Iterative numerics failed (non-convergence, singular system).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A window family leaves some multipole uncovered (sum of squared windows is
/// zero there).
class CoverageError : public DomainError {
 public:
  CoverageError(const std::string& what, int l) : DomainError(what), l_(l) {}
  int multipole() const noexcept { return l_; }

 private:
  int l_;
};

}  // namespace sphwin
