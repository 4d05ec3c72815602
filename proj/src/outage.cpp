#include "cbf/outage.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cbf/errors.hpp"
#include "cbf/simd/kernels.hpp"

namespace cbf {

LinkPowers link_powers(const BeamformerSet& bf, int i, const ChannelSet& cs) {
  LinkPowers p;
  p.signal = bf.received_power(cs, i, i);
  for (int k = 0; k < cs.K; ++k) {
    if (k == i || cs.is_zero_link(k, i)) continue;
    p.interference.push_back(bf.received_power(cs, k, i));
  }
  return p;
}

double outage_log_margin(double R, double rho, double sigma2, const LinkPowers& p) {
  const double u = std::expm1(R * std::numbers::ln2);
  double acc = std::log(rho) + u * sigma2 / p.signal;
  for (double t : p.interference) acc += std::log1p(u * t / p.signal);
  return acc;
}

double outage_probability(double R, double sigma2, const LinkPowers& p) {
  if (!(p.signal > 0)) throw DomainError("signal power must be positive");
  if (R < 0) throw DomainError("rate must be nonnegative");
  // 1 - exp(-(log-margin without the rho term))
  return -std::expm1(-outage_log_margin(R, 1.0, sigma2, p));
}

double closed_form_outage(const BeamformerSet& bf, double R, int i, const ChannelSet& cs) {
  return outage_probability(R, cs.sigma2[static_cast<size_t>(i)], link_powers(bf, i, cs));
}

double tight_rate(double rho, double sigma2, const LinkPowers& p) {
  if (!(p.signal > 0)) throw DomainError("signal power must be positive");
  double lo = 0.0;
  double hi = 1.0;
  while (outage_log_margin(hi, rho, sigma2, p) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 64.0) throw NumericFailure("tight-rate bracket exceeded 64 bits");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (outage_log_margin(mid, rho, sigma2, p) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // lo keeps the outage at or below the target.
  return lo;
}

RateTuple tighten_rates(const BeamformerSet& bf, const ChannelSet& cs) {
  RateTuple R(static_cast<size_t>(cs.K));
  for (int i = 0; i < cs.K; ++i) {
    const auto idx = static_cast<size_t>(i);
    R[idx] = tight_rate(cs.rho(i), cs.sigma2[idx], link_powers(bf, i, cs));
  }
  return R;
}

std::vector<double> empirical_outage(const BeamformerSet& bf, const RateTuple& R,
                                     const ChannelSet& cs, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample count must be at least 1");
  if (bf.form != BeamformerSet::Form::kVectors) {
    throw std::invalid_argument("empirical outage needs vector beamformers");
  }
  const int K = cs.K;
  const int Nt = cs.Nt;
  const auto& kern = simd::active_kernels();
  const auto factors = channel_factors(cs);

  // h^H w = g^H (L^H w): project each beamformer through its link factor once.
  std::vector<std::vector<double>> v_re(static_cast<size_t>(K * K)), v_im(static_cast<size_t>(K * K));
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < K; ++i) {
      const auto link = static_cast<size_t>(k * K + i);
      CVector v = factors[link].adjoint() * bf.w[static_cast<size_t>(k)];
      v_re[link].resize(static_cast<size_t>(Nt));
      v_im[link].resize(static_cast<size_t>(Nt));
      for (int a = 0; a < Nt; ++a) {
        v_re[link][static_cast<size_t>(a)] = v[a].real();
        v_im[link][static_cast<size_t>(a)] = v[a].imag();
      }
    }
  }

  std::vector<double> thresholds(static_cast<size_t>(K));
  for (int i = 0; i < K; ++i) {
    thresholds[static_cast<size_t>(i)] = std::expm1(R[static_cast<size_t>(i)] * std::numbers::ln2);
  }

  constexpr int kBatch = 4096;
  std::vector<std::int64_t> counts(static_cast<size_t>(K), 0);
  std::vector<double> re, im, gain(kBatch), signal(kBatch), interference(kBatch);
  for (int first = 0; first < n; first += kBatch) {
    const int count = std::min(kBatch, n - first);
    for (int i = 0; i < K; ++i) {
      std::fill(interference.begin(), interference.begin() + count, 0.0);
      for (int k = 0; k < K; ++k) {
        const int link = k * K + i;
        if (k != i && cs.is_zero_link(k, i)) continue;
        gaussian_block(seed, link, Nt, static_cast<std::uint64_t>(first), count, re, im);
        const auto l = static_cast<size_t>(link);
        double* out = (k == i) ? signal.data() : gain.data();
        kern.beam_gain(re.data(), im.data(), Nt, count, v_re[l].data(), v_im[l].data(), out);
        if (k != i) kern.accumulate(gain.data(), count, interference.data());
      }
      counts[static_cast<size_t>(i)] +=
          kern.count_below(signal.data(), interference.data(), count,
                           thresholds[static_cast<size_t>(i)], cs.sigma2[static_cast<size_t>(i)]);
    }
  }
  std::vector<double> out(static_cast<size_t>(K));
  for (int i = 0; i < K; ++i) {
    out[static_cast<size_t>(i)] = static_cast<double>(counts[static_cast<size_t>(i)]) / n;
  }
  return out;
}

}  // namespace cbf
