#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbf/model.hpp"
#include "cbf/solver.hpp"
#include "cbf/utility.hpp"

namespace cbf {

struct BaselineResult {
  BeamformerSet beams;
  RateTuple rates;
  double utility = 0.0;
};

// Cap grid for the leakage of one link: lo (hi / lo)^(j / M), j = 0..M, with
// lo = delta and hi = P lambda_max(Q_ik). The grid for 2M contains the grid
// for M.
std::vector<double> interference_caps(double lo, double hi, int M);

// max tr(W Q_signal) s.t. tr(W Q_leak) <= cap, tr(W) <= P, W >= 0.
// Pass cap = +inf to drop the leakage constraint.
CMatrix solve_cap_problem(const CMatrix& Q_signal, const CMatrix& Q_leak, double cap, double P,
                          const SolverConfig& cfg = {});

// Two-user grid search over leakage caps. Every pair of cap-problem solutions
// is scored by its tightened rates. Throws std::invalid_argument unless K = 2.
BaselineResult exhaustive_search(const ChannelSet& cs, const UtilitySpec& spec, int M,
                                 const SolverConfig& cfg = {});

// Brute force over scalar powers p_i in {0, P/(grid-1), ..., P} when Nt = 1.
// Throws std::invalid_argument for Nt != 1 or K > 3.
BaselineResult power_grid_oracle(const ChannelSet& cs, const UtilitySpec& spec, int grid = 200);

struct ExperimentConfig {
  int instances = 20;
  std::uint64_t seed_base = 1;
  std::string axis = "snr_db";  // "snr_db" or "eta"
  std::vector<double> values{0.0, 10.0, 20.0};
  int K = 2;
  int Nt = 2;
  int rank = 2;
  double eta = 0.5;
  double snr_db = 10.0;
  double beta = 0.0;
  std::vector<double> alpha;  // empty: uniform
  std::vector<std::string> methods{"sca", "mrt"};
  int M = 32;
  double P = 1.0;
  double eps = 0.1;
  double delta = 1e-5;
  double stop_rel = 0.01;
  int max_iters = 50;
  int max_rounds = 30;
  std::string output_dir = ".";

  // Throws std::invalid_argument on unknown axes or methods, or exhaustive
  // with K != 2.
  void validate() const;
};

ExperimentConfig experiment_from_json(const std::string& text);

struct SweepRow {
  double value = 0.0;
  std::string method;
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
  int failures = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // point-major, methods in config order
};

// Instance s at every sweep point uses seed seed_base + s, so points differ
// only in the swept parameter.
SweepResult run_sweep(const ExperimentConfig& cfg);

// Runs one method on one instance; feasibility of the emitted beams is
// re-checked. Throws on failure.
BaselineResult run_method(const std::string& method, const ChannelSet& cs, const UtilitySpec& spec,
                          const ExperimentConfig& cfg);

// Power <= P + 1e-9, closed-form outage <= eps + 1e-6 and R >= 0 for all users.
bool solution_feasible(const BeamformerSet& bf, const RateTuple& R, const ChannelSet& cs);

std::string sweep_csv(const SweepResult& r);
std::string sweep_svg(const SweepResult& r, const ExperimentConfig& cfg);

// Sum by recursive halving.
double pairwise_sum(const double* v, size_t n);

}  // namespace cbf
