#pragma once

#include <stdexcept>
#include <string>

namespace tfpg {

/// Raised when an input violates a documented precondition (bad order,
/// time outside the interval, mismatched meshes, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when a numerical procedure fails to reach its tolerance
/// (quadrature non-convergence, eigensolver or linear-solver failure).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace detail
}  // namespace tfpg
