#pragma once

#include <vector>

#include "cbf/model.hpp"
#include "cbf/program.hpp"
#include "cbf/utility.hpp"

namespace cbf {

// Linearization point of one convex approximation round:
//   xbar(k, i) = ln tr(W_k Q_ki), ybar_i = ln(2^R_i - 1), zbar_i = exp(ybar_i - xbar(i, i)).
// Links with Q_ki = 0 carry xbar = -inf and no log variable.
struct Anchor {
  int K = 0;
  std::vector<double> xbar;  // row-major K x K
  std::vector<double> ybar;
  std::vector<double> zbar;

  double x(int k, int i) const { return xbar[static_cast<size_t>(k * K + i)]; }
  bool has_link(int k, int i) const;
};

// Throws InfeasibleAnchor when a floored link is below delta, a nonzero link
// has no power, or some rate is not positive.
Anchor compute_anchor(const BeamformerSet& bf, const RateTuple& Rt, const ChannelSet& cs);

enum class GapKind { kExp, kSoftplusRate };

// f(point) - tangent_at_anchor(point) for f = exp or log2(1 + exp).
double first_order_gap(GapKind kind, double anchor, double point);

// Tangent of log2(1 + e^y) at ybar: value and slope.
struct RateTangent {
  double value;
  double slope;
};
RateTangent rate_tangent(double ybar);

// Variable indices of a beamforming program; -1 marks quantities that are not
// variables (foreign beamformers, omitted links).
struct BeamformingLayout {
  int K = 0;
  int Nt = 0;
  std::vector<int> W;  // PSD block offset per transmitter
  std::vector<int> R;
  std::vector<int> x;  // row-major K x K
  std::vector<int> y;
  std::vector<int> z;

  int x_at(int k, int i) const { return x[static_cast<size_t>(k * K + i)]; }
};

struct Subproblem {
  ConvexProgram program;
  BeamformingLayout layout;
};

// Whether the nonconvex link constraints are replaced by their tangent
// restriction (the convex subproblem) or kept exact (the reformulated
// problem used for stationarity checks).
enum class LinkForm { kLinearized, kExact };

// Centralized program over all W_i and scalars {R_i, x_ki, y_i, z_i}:
//  (b)  ln rho_i + sigma_i^2 z_i + sum_{k != i} softplus(x_ki - x_ii + y_i) <= 0
//  (c)  tr(W_k Q_ki) <= exp(xbar_ki) (x_ki - xbar_ki + 1)        [exact: <= exp(x_ki)]
//  (c2) exp(x_ii) <= tr(W_i Q_ii)
//  (d)  R_i <= tangent of log2(1 + e^y) at ybar_i                [exact: <= log2(1 + e^y_i)]
//  (e)  exp(y_i - x_ii) <= z_i
//  (S)  tr(W_i) <= P_i, tr(W_i Q_ik) >= delta, W_i >= 0; plus R_i >= 0.
// Constraints are grouped per user in the order b, c, c2, d, e, P, delta, R0.
Subproblem build_central_subproblem(const ChannelSet& cs, const Anchor& anchor,
                                    const UtilitySpec& spec,
                                    LinkForm form = LinkForm::kLinearized);

// What transmitter i knows when it builds its local program: its own CDI
// {Q_ik}_k, the system parameters, and the published log-interference table.
struct LocalView {
  int i = 0;
  int K = 0;
  int Nt = 0;
  double delta = 1e-5;
  std::vector<CMatrix> Q_out;  // Q_ik for k = 0..K-1
  std::vector<double> sigma2, P, eps;

  static LocalView from_channel_set(const ChannelSet& cs, int i);
};

// Per-transmitter program: only W_i plus {R_k, x_ik, y_k, z_k} are variables;
// every foreign interference term enters as the constant exp(xbar_kj) taken
// from the published table (row-major K x K, -inf for silent links).
Subproblem build_local_subproblem(const LocalView& view, const std::vector<double>& xbar,
                                  const std::vector<double>& ybar, const UtilitySpec& spec);

// The anchor-consistent point (W, Rt, xbar, ybar, zbar) of a program.
Vector anchor_point(const Subproblem& sp, const std::vector<CMatrix>& W, const RateTuple& Rt,
                    const std::vector<double>& xbar, const std::vector<double>& ybar);

struct InteriorOptions {
  double theta = 1e-3;
  double slack = 1e-3;
  double margin = 1e-6;
  int max_backoff = 20;
};

struct InteriorPoint {
  Vector point;
  double theta = 0.0;
  double min_margin = 0.0;  // -max residual
};

// Pulls every W block toward (P/(2 Nt)) I by theta and moves the scalars so
// each constraint holds strictly. Throws InfeasibleStart after max_backoff
// halvings of theta and slack.
InteriorPoint feasible_interior_point(const Subproblem& sp, const Vector& anchor_pt,
                                      const ChannelSet& cs, const InteriorOptions& opts = {});
InteriorPoint feasible_interior_point(const Subproblem& sp, const Vector& anchor_pt,
                                      const std::vector<double>& P,
                                      const InteriorOptions& opts = {});

struct ProgramPoint {
  std::vector<CMatrix> W;  // empty matrix for non-variable blocks
  RateTuple R;
  std::vector<double> x;   // K x K, NaN where absent
  std::vector<double> y;
  std::vector<double> z;
};

ProgramPoint extract_point(const Subproblem& sp, const Vector& v);

}  // namespace cbf
