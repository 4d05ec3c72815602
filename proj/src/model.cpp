#include "cbf/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cbf/rng.hpp"

namespace cbf {

bool ChannelSet::is_zero_link(int k, int i) const {
  return q(k, i).cwiseAbs().maxCoeff() == 0.0;
}

bool ChannelSet::has_delta_floor(int i, int k) const {
  if (is_zero_link(i, k)) return false;
  return lambda_max(q(i, k)) * P[static_cast<size_t>(i)] >= 2.0 * delta;
}

void ChannelSet::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (K < 1 || Nt < 1) fail("K and Nt must be positive");
  const auto k = static_cast<size_t>(K);
  if (sigma2.size() != k || P.size() != k || eps.size() != k) {
    fail("per-user parameter arrays must have length K");
  }
  if (Q.size() != k * k) fail("Q must hold K x K covariance matrices");
  if (!(delta > 0)) fail("delta must be positive");
  for (size_t i = 0; i < k; ++i) {
    if (!(sigma2[i] > 0)) fail("noise power must be positive");
    if (!(P[i] > 0)) fail("power budget must be positive");
    if (!(eps[i] > 0 && eps[i] < 1)) fail("outage tolerance must lie in (0, 1)");
  }
  for (const auto& m : Q) {
    if (m.rows() != Nt || m.cols() != Nt) fail("covariance has wrong dimension");
    if (hermitian_error(m) > 1e-12) fail("covariance is not Hermitian");
    if (lambda_min(m) < -1e-10) fail("covariance is not positive semidefinite");
  }
}

BeamformerSet BeamformerSet::from_vectors(std::vector<CVector> w) {
  BeamformerSet bf;
  bf.form = Form::kVectors;
  bf.w = std::move(w);
  return bf;
}

BeamformerSet BeamformerSet::from_matrices(std::vector<CMatrix> W) {
  BeamformerSet bf;
  bf.form = Form::kMatrices;
  bf.W = std::move(W);
  return bf;
}

int BeamformerSet::size() const {
  return static_cast<int>(form == Form::kVectors ? w.size() : W.size());
}

CMatrix BeamformerSet::matrix(int i) const {
  const auto idx = static_cast<size_t>(i);
  if (form == Form::kMatrices) return W[idx];
  return w[idx] * w[idx].adjoint();
}

BeamformerSet BeamformerSet::as_matrices() const {
  std::vector<CMatrix> out;
  out.reserve(static_cast<size_t>(size()));
  for (int i = 0; i < size(); ++i) out.push_back(matrix(i));
  return from_matrices(std::move(out));
}

double BeamformerSet::power(int i) const {
  const auto idx = static_cast<size_t>(i);
  if (form == Form::kVectors) return w[idx].squaredNorm();
  return W[idx].trace().real();
}

double BeamformerSet::received_power(const ChannelSet& cs, int k, int i) const {
  const auto idx = static_cast<size_t>(k);
  if (form == Form::kVectors) {
    return (w[idx].adjoint() * cs.q(k, i) * w[idx])(0, 0).real();
  }
  return trace_product(W[idx], cs.q(k, i));
}

ChannelSet generate_channel_set(int K, int Nt, double eta, int rank, std::uint64_t seed,
                                const ChannelSetOptions& opts) {
  if (K < 1 || Nt < 1) throw std::invalid_argument("K and Nt must be positive");
  if (rank < 1 || rank > Nt) throw std::invalid_argument("rank must lie in [1, Nt]");
  if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("eta must lie in (0, 1]");

  ChannelSet cs;
  cs.K = K;
  cs.Nt = Nt;
  cs.eta = eta;
  cs.delta = opts.delta;
  cs.sigma2.assign(static_cast<size_t>(K), opts.sigma2);
  cs.P.assign(static_cast<size_t>(K), opts.P);
  cs.eps.assign(static_cast<size_t>(K), opts.eps);
  cs.Q.resize(static_cast<size_t>(K * K));

  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < K; ++i) {
      const int link = k * K + i;
      GaussianStream stream(seed, StreamDomain::kCovariance, static_cast<std::uint32_t>(link));
      CMatrix a(Nt, rank);
      for (int r = 0; r < Nt; ++r) {
        for (int c = 0; c < rank; ++c) a(r, c) = stream.sample(static_cast<std::uint64_t>(r * rank + c));
      }
      CMatrix q = hermitize(a * a.adjoint());
      const double target = (k == i) ? 1.0 : eta;
      q *= target / lambda_max(q);
      cs.q(k, i) = hermitize(q);
    }
  }
  return cs;
}

std::vector<CMatrix> channel_factors(const ChannelSet& cs) {
  std::vector<CMatrix> out;
  out.reserve(cs.Q.size());
  for (const auto& q : cs.Q) out.push_back(psd_factor(q));
  return out;
}

void gaussian_block(std::uint64_t seed, int link, int Nt, std::uint64_t first, int count,
                    std::vector<double>& re, std::vector<double>& im) {
  const auto n = static_cast<size_t>(Nt) * static_cast<size_t>(count);
  re.resize(n);
  im.resize(n);
  for (int a = 0; a < Nt; ++a) {
    // One stream per (link, antenna); the draw index is the counter.
    GaussianStream stream(seed, StreamDomain::kChannel,
                          static_cast<std::uint32_t>(link * 64 + a));
    for (int d = 0; d < count; ++d) {
      auto g = stream.sample(first + static_cast<std::uint64_t>(d));
      const size_t idx = static_cast<size_t>(a) * static_cast<size_t>(count) + static_cast<size_t>(d);
      re[idx] = g.real();
      im[idx] = g.imag();
    }
  }
}

std::vector<ChannelDraw> sample_channels(const ChannelSet& cs, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample count must be at least 1");
  if (cs.Nt > 64) throw std::invalid_argument("Nt above 64 is not supported by the sampler");
  const auto factors = channel_factors(cs);
  std::vector<ChannelDraw> draws(static_cast<size_t>(n));
  for (auto& d : draws) {
    d.K = cs.K;
    d.h.resize(static_cast<size_t>(cs.K * cs.K));
  }
  std::vector<double> re, im;
  for (int link = 0; link < cs.K * cs.K; ++link) {
    gaussian_block(seed, link, cs.Nt, 0, n, re, im);
    const CMatrix& L = factors[static_cast<size_t>(link)];
    CVector g(cs.Nt);
    for (int d = 0; d < n; ++d) {
      for (int a = 0; a < cs.Nt; ++a) {
        const size_t idx = static_cast<size_t>(a) * static_cast<size_t>(n) + static_cast<size_t>(d);
        g[a] = Complex(re[idx], im[idx]);
      }
      draws[static_cast<size_t>(d)].h[static_cast<size_t>(link)] = L * g;
    }
  }
  return draws;
}

RateTuple instantaneous_rate(const ChannelDraw& draw, const BeamformerSet& bf,
                             const ChannelSet& cs) {
  if (bf.form != BeamformerSet::Form::kVectors) {
    throw std::invalid_argument("instantaneous rate needs vector beamformers");
  }
  RateTuple r(static_cast<size_t>(cs.K));
  for (int i = 0; i < cs.K; ++i) {
    double interference = 0.0;
    double signal = 0.0;
    for (int k = 0; k < cs.K; ++k) {
      const double g = std::norm(draw.at(k, i).dot(bf.w[static_cast<size_t>(k)]));
      if (k == i) {
        signal = g;
      } else {
        interference += g;
      }
    }
    r[static_cast<size_t>(i)] = std::log2(1.0 + signal / (interference + cs.sigma2[static_cast<size_t>(i)]));
  }
  return r;
}

}  // namespace cbf
