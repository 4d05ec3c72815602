#pragma once

#include <stdexcept>

namespace cbf {

// Input outside the mathematical domain of a formula (e.g. zero signal power).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numeric procedure failed to bracket or converge.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anchor point violates the interference floor, so its logarithms are undefined.
class InfeasibleAnchor : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No strictly feasible start could be built for the barrier method.
class InfeasibleStart : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbf
