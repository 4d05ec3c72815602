#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cbf/approx.hpp"
#include "cbf/model.hpp"
#include "cbf/solver.hpp"
#include "cbf/utility.hpp"

namespace cbf {

// w_i = sqrt(P_i) times the principal eigenvector of Q_ii.
BeamformerSet mrt_init(const ChannelSet& cs);

// Null-space projected MRT. Returns nullopt when some user has no direction
// orthogonal to its cross links that still reaches its own receiver. When the
// delta floor would fail, the beam is blended toward MRT with the smallest
// kappa in {0, 0.01, 0.1} that restores it; the chosen values go to *kappa.
std::optional<BeamformerSet> zf_init(const ChannelSet& cs, std::vector<double>* kappa = nullptr);

struct ScaConfig {
  double stop_rel = 0.01;
  int max_iters = 50;
  int randomization_count = 200;
  std::uint64_t seed = 0;
  SolverConfig solver;
  InteriorOptions interior;
};

struct ScaIteration {
  int n = 0;
  double utility = 0.0;
  RateTuple rates;           // tightened rates at the new beamformers
  RateTuple program_rates;   // rates the subproblem itself reported
  double gap_x = 0.0;
  double gap_y = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
  double kkt = 0.0;          // residual of the subproblem solve
  bool accepted = true;
};

struct RankReduction {
  CMatrix W;
  int rank_before = 0;
  int rank_after = 0;
  bool stalled = false;
};

// Purification: keeps tr(W A) for every A in `preserved` fixed while lowering
// the rank of W until rank^2 <= preserved.size(), never decreasing
// tr(W Q_signal). Eigenvalues below 1e-6 lambda_max are dropped first.
RankReduction rank_reduce(const CMatrix& W, const CMatrix& Q_signal,
                          const std::vector<CMatrix>& preserved);

// The trace maps rank_reduce must keep for transmitter i: power and every
// nonzero leakage covariance Q_ik.
std::vector<CMatrix> preserved_maps(const ChannelSet& cs, int i);

struct Randomized {
  BeamformerSet bf;
  RateTuple rates;
  double utility = 0.0;
  bool fallback = false;  // no candidate met the floor; principal eigenvectors used
};

// Draws count candidates w_i ~ CN(0, W_i), each scaled to power tr(W_i), and
// keeps the utility-best one that meets the delta floor.
Randomized gaussian_randomize(const std::vector<CMatrix>& W, const ChannelSet& cs,
                              const UtilitySpec& spec, int count, std::uint64_t seed);

// Scaled principal eigenvector of each W_i.
BeamformerSet principal_vectors(const std::vector<CMatrix>& W);

struct ScaTrace {
  std::vector<ScaIteration> iterations;  // entry 0 is the initial point
  std::vector<CMatrix> W;                // last accepted matrices, before rank reduction
  std::vector<CMatrix> W_reduced;
  BeamformerSet beams;                   // emitted vector solution
  RateTuple rates;                       // tightened rates of `beams`
  double utility = 0.0;
  std::vector<RankReduction> ranks;
  bool randomized = false;
  bool converged = false;
  double kkt_exact = 0.0;                // stationarity of the last solve w.r.t. the exact program
};

ScaTrace run_sca(const ChannelSet& cs, const UtilitySpec& spec, const BeamformerSet& init,
                 const ScaConfig& cfg = {});

// KKT residual of the exact reformulated program at its tight point for the
// given beamformers, with least-squares multipliers.
double stationarity_at(const ChannelSet& cs, const UtilitySpec& spec, const std::vector<CMatrix>& W);

}  // namespace cbf
