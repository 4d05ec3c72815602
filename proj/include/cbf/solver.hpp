#pragma once

#include <iosfwd>
#include <vector>

#include "cbf/program.hpp"

namespace cbf {

struct SolverConfig {
  double kkt_tol = 1e-10;
  double barrier_mu = 10.0;
  int newton_max = 50;
  double t0 = 1.0;
  double ls_alpha = 0.25;
  double ls_beta = 0.5;
  int max_centerings = 60;
  // Centering ends once lambda^2 / 2 falls below this.
  double newton_tol = 1e-10;
  int verbosity = 0;
  std::ostream* log = nullptr;
};

enum class SolveStatus { kOptimal, kMaxIter, kInfeasibleStart };

const char* to_string(SolveStatus s);

struct KktBreakdown {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double dual = 0.0;

  double max() const;
};

struct Solution {
  Vector x;
  std::vector<double> lambda;  // one per constraint, program order
  std::vector<CMatrix> Z;      // one per PSD block
  double objective = 0.0;
  double kkt_residual = 0.0;
  SolveStatus status = SolveStatus::kMaxIter;
  int centerings = 0;
  int newton_steps = 0;
};

// Log-barrier path following on
//   maximize f0(v)  s.t.  g_j(v) <= 0,  W_b(v) >= 0.
// Duals come from the last center: lambda_j = 1 / (t (-g_j)), Z_b = W_b^{-1} / t.
Solution solve_barrier(const ConvexProgram& prog, const Vector& start, const SolverConfig& cfg = {});

// Max-norm of the Lagrangian gradient, primal violation, complementarity
// |lambda_j g_j| and tr(Z_b W_b), and dual sign violation.
KktBreakdown kkt_breakdown(const ConvexProgram& prog, const Vector& x,
                           const std::vector<double>& lambda, const std::vector<CMatrix>& Z);

double kkt_residual(const ConvexProgram& prog, const Vector& x, const std::vector<double>& lambda,
                    const std::vector<CMatrix>& Z);

struct DualFit {
  std::vector<double> lambda;
  std::vector<CMatrix> Z;
  double residual = 0.0;
};

// Best least-squares multipliers at a fixed primal point: constraints with
// g >= -active_tol are active, PSD duals live on the eigenvectors of W with
// eigenvalue <= active_tol. Measures how close x is to a KKT point.
DualFit fit_duals(const ConvexProgram& prog, const Vector& x, double active_tol);

}  // namespace cbf
