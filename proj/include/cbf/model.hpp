#pragma once

#include <cstdint>
#include <vector>

#include "cbf/linalg.hpp"

namespace cbf {

// One K-user MISO interference channel instance described by its channel
// covariances. q(k, i) is the covariance of the channel from transmitter k to
// receiver i.
struct ChannelSet {
  int K = 0;
  int Nt = 0;
  double eta = 1.0;
  double delta = 1e-5;
  std::vector<double> sigma2;
  std::vector<double> P;
  std::vector<double> eps;
  std::vector<CMatrix> Q;  // row-major K x K

  const CMatrix& q(int k, int i) const { return Q[static_cast<size_t>(k * K + i)]; }
  CMatrix& q(int k, int i) { return Q[static_cast<size_t>(k * K + i)]; }

  double rho(int i) const { return 1.0 - eps[static_cast<size_t>(i)]; }

  // Exactly-zero covariance: the link carries no interference at all.
  bool is_zero_link(int k, int i) const;

  // The delta floor of tr(W_i Q_ik) applies only when the link can carry at
  // least 2 delta at full power.
  bool has_delta_floor(int i, int k) const;

  // Throws std::invalid_argument on size mismatch, non-Hermitian or non-PSD
  // covariances, or parameters out of range.
  void validate() const;
};

struct ChannelDraw {
  int K = 0;
  std::vector<CVector> h;  // row-major K x K, h(k, i) ~ CN(0, Q_ki)

  const CVector& at(int k, int i) const { return h[static_cast<size_t>(k * K + i)]; }
};

// Per-transmitter solution, either rank-one vectors or PSD matrices.
struct BeamformerSet {
  enum class Form { kVectors, kMatrices };
  Form form = Form::kVectors;
  std::vector<CVector> w;
  std::vector<CMatrix> W;

  static BeamformerSet from_vectors(std::vector<CVector> w);
  static BeamformerSet from_matrices(std::vector<CMatrix> W);

  int size() const;
  // W_i, forming w_i w_i^H for the vector form.
  CMatrix matrix(int i) const;
  BeamformerSet as_matrices() const;
  double power(int i) const;
  // tr(W_k Q_ki)
  double received_power(const ChannelSet& cs, int k, int i) const;
};

struct ChannelSetOptions {
  double sigma2 = 1.0;
  double P = 1.0;
  double eps = 0.1;
  double delta = 1e-5;
};

// Q_ki = A A^H with A an Nt x rank matrix of i.i.d. CN(0, 1) entries, scaled
// so lambda_max(Q_ii) = 1 and lambda_max(Q_ki) = eta for k != i.
ChannelSet generate_channel_set(int K, int Nt, double eta, int rank, std::uint64_t seed,
                                const ChannelSetOptions& opts = {});

// h_ki = L_ki g, L_ki L_ki^H = Q_ki, g ~ CN(0, I). Draw d of link (k, i)
// depends only on (seed, k, i, d).
std::vector<ChannelDraw> sample_channels(const ChannelSet& cs, int n, std::uint64_t seed);

// Covariance factors used by sample_channels, one per link.
std::vector<CMatrix> channel_factors(const ChannelSet& cs);

// Antenna-major complex Gaussian block for link (k, i), draws [first, first+count).
// Entry (a, d) is g_a of draw first + d.
void gaussian_block(std::uint64_t seed, int link, int Nt, std::uint64_t first, int count,
                    std::vector<double>& re, std::vector<double>& im);

using RateTuple = std::vector<double>;

// r_i = log2(1 + |h_ii^H w_i|^2 / (sum_{k != i} |h_ki^H w_k|^2 + sigma_i^2)).
RateTuple instantaneous_rate(const ChannelDraw& draw, const BeamformerSet& bf,
                             const ChannelSet& cs);

}  // namespace cbf
