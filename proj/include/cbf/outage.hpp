#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbf/model.hpp"

namespace cbf {

// Received powers seen by one receiver: s = tr(W_i Q_ii), t_k = tr(W_k Q_ki).
struct LinkPowers {
  double signal = 0.0;
  std::vector<double> interference;
};

LinkPowers link_powers(const BeamformerSet& bf, int i, const ChannelSet& cs);

// ln of the left side of the tight-rate equation
//   rho exp(u sigma2 / s) prod_k (1 + u t_k / s),  u = 2^R - 1.
// Strictly increasing in R with value ln(rho) < 0 at R = 0.
double outage_log_margin(double R, double rho, double sigma2, const LinkPowers& p);

// Pr{ r_i < R } for Rayleigh fading; zero links contribute a unit factor.
double outage_probability(double R, double sigma2, const LinkPowers& p);

double closed_form_outage(const BeamformerSet& bf, double R, int i, const ChannelSet& cs);

// Largest R with outage exactly 1 - rho: the root of outage_log_margin by
// bracketed bisection. Throws DomainError if signal <= 0 and NumericFailure
// if the bracket passes 64 bits.
double tight_rate(double rho, double sigma2, const LinkPowers& p);

RateTuple tighten_rates(const BeamformerSet& bf, const ChannelSet& cs);

// Fraction of n channel draws with instantaneous rate below R_i, per user.
// Draw d is the same realization sample_channels(cs, n, seed) returns.
std::vector<double> empirical_outage(const BeamformerSet& bf, const RateTuple& R,
                                     const ChannelSet& cs, int n, std::uint64_t seed);

}  // namespace cbf
