#include "cbf/utility.hpp"

#include <cmath>
#include <stdexcept>

#include "cbf/errors.hpp"

namespace cbf {

UtilitySpec UtilitySpec::uniform(int K, double beta) {
  UtilitySpec s;
  s.beta = beta;
  s.alpha.assign(static_cast<size_t>(K), 1.0 / K);
  return s;
}

void UtilitySpec::validate(int K) const {
  if (!std::isfinite(beta) || beta < 0) throw std::invalid_argument("beta must be finite and >= 0");
  if (alpha.size() != static_cast<size_t>(K)) throw std::invalid_argument("alpha must have K entries");
  double sum = 0.0;
  for (double a : alpha) {
    if (a < 0 || a > 1) throw std::invalid_argument("alpha entries must lie in [0, 1]");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("alpha must sum to 1");
}

double utility_term(double beta, double R) {
  if (beta == 0.0) return R;
  if (beta == 1.0) return R > 0 ? std::log(R) : std::nan("");
  if (R <= 0) return beta > 1 ? std::nan("") : 0.0;
  return std::pow(R, 1.0 - beta) / (1.0 - beta);
}

double utility_value(const UtilitySpec& spec, const RateTuple& R) {
  double u = 0.0;
  for (size_t i = 0; i < R.size(); ++i) {
    if (spec.beta >= 1.0 && !(R[i] > 0)) throw DomainError("rate must be positive when beta >= 1");
    u += spec.alpha[i] * utility_term(spec.beta, R[i]);
  }
  return u;
}

std::vector<double> utility_gradient(const UtilitySpec& spec, const RateTuple& R) {
  std::vector<double> g(R.size());
  for (size_t i = 0; i < R.size(); ++i) {
    if (spec.beta >= 1.0 && !(R[i] > 0)) throw DomainError("rate must be positive when beta >= 1");
    g[i] = spec.beta == 0.0 ? spec.alpha[i] : spec.alpha[i] * std::pow(R[i], -spec.beta);
  }
  return g;
}

}  // namespace cbf
