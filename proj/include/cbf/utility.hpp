#pragma once

#include <vector>

#include "cbf/model.hpp"

namespace cbf {

// Fairness-parameterized utility: sum_i alpha_i R_i^(1-beta) / (1-beta), or
// sum_i alpha_i ln R_i at beta = 1. beta = 0, 1, 2 give the weighted sum,
// geometric-mean and harmonic-mean rate objectives.
struct UtilitySpec {
  double beta = 0.0;
  std::vector<double> alpha;

  static UtilitySpec uniform(int K, double beta);

  // Throws std::invalid_argument unless beta is finite and nonnegative and the
  // weights lie in [0, 1] summing to 1.
  void validate(int K) const;
};

// Value at a single rate; +-inf outside the domain is reported as NaN.
double utility_term(double beta, double R);

// Throws DomainError when some R_i = 0 (or negative) and beta >= 1.
double utility_value(const UtilitySpec& spec, const RateTuple& R);

std::vector<double> utility_gradient(const UtilitySpec& spec, const RateTuple& R);

}  // namespace cbf
