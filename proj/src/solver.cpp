#include "cbf/solver.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace cbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BarrierEval {
  double value = kInf;
  Vector grad;
  Matrix hess;
};

// -t f0 - sum log(-g) - sum log det W; +inf outside the domain.
double barrier_value(const ConvexProgram& prog, const Vector& v, double t) {
  const double f0 = prog.objective.value(v);
  if (!std::isfinite(f0)) return kInf;
  double phi = -t * f0;
  for (const auto& c : prog.constraints) {
    const double g = c.value(v);
    if (!(g < 0)) return kInf;
    phi -= std::log(-g);
  }
  for (const auto& b : prog.blocks) {
    Eigen::LLT<CMatrix> llt(b.matrix(v));
    if (llt.info() != Eigen::Success) return kInf;
    const auto diag = llt.matrixLLT().diagonal().real();
    for (Eigen::Index j = 0; j < diag.size(); ++j) {
      if (!(diag[j] > 0)) return kInf;
      phi -= 2.0 * std::log(diag[j]);
    }
  }
  return phi;
}

void barrier_derivatives(const ConvexProgram& prog, const Vector& v, double t, BarrierEval& out) {
  const int n = prog.num_vars;
  out.grad = Vector::Zero(n);
  out.hess = Matrix::Zero(n, n);
  prog.objective.gradient(v, out.grad);
  out.grad *= -t;
  prog.objective.add_hessian(v, -t, out.hess);
  for (const auto& c : prog.constraints) {
    const double g = c.value(v);
    const double inv = 1.0 / (-g);
    const SparseVec sg = c.gradient(v);
    for (const auto& [p, a] : sg) out.grad[p] += a * inv;
    const double inv2 = inv * inv;
    for (const auto& [p, a] : sg) {
      for (const auto& [q, b] : sg) out.hess(p, q) += a * b * inv2;
    }
    c.add_hessian(v, inv, out.hess);
  }
  for (const auto& b : prog.blocks) {
    const CMatrix w = b.matrix(v);
    const CMatrix a = w.llt().solve(CMatrix::Identity(b.nt, b.nt));
    const CMatrix ah = hermitize(a);
    const int d = hermitian_dim(b.nt);
    out.grad.segment(b.offset, d) -= trace_coefficients(ah);
    out.hess.block(b.offset, b.offset, d, d) += hermitian_quadratic_form(ah);
  }
}

Vector newton_direction(const Matrix& h, const Vector& grad) {
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() == Eigen::Success) {
    Vector dx = llt.solve(-grad);
    if (dx.allFinite()) return dx;
  }
  double ridge = 1e-10 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 12; ++attempt, ridge *= 10.0) {
    Matrix hr = h;
    hr.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt_r(hr);
    if (llt_r.info() == Eigen::Success) {
      Vector dx = llt_r.solve(-grad);
      if (dx.allFinite()) return dx;
    }
  }
  return h.ldlt().solve(-grad);
}

void fill_barrier_duals(const ConvexProgram& prog, const Vector& v, double t, Solution& sol) {
  for (size_t j = 0; j < prog.constraints.size(); ++j) {
    sol.lambda[j] = 1.0 / (t * (-prog.constraints[j].value(v)));
  }
  for (size_t b = 0; b < prog.blocks.size(); ++b) {
    const auto& blk = prog.blocks[b];
    sol.Z[b] = hermitize(blk.matrix(v).llt().solve(CMatrix::Identity(blk.nt, blk.nt))) / t;
  }
}

// Fits duals on a given active set by least squares on the stationarity
// equation. Inactive constraints keep lambda_fixed; each PSD dual is
// rest_b + U_b S_b U_b^H with S_b free.
void fit_active(const ConvexProgram& prog, const Vector& v, const std::vector<bool>& active_flags,
                const std::vector<CMatrix>& u0, const std::vector<CMatrix>& rest,
                std::vector<double>& lambda, std::vector<CMatrix>& Z) {
  const int n = prog.num_vars;
  Vector rhs = Vector::Zero(n);
  prog.objective.gradient(v, rhs);  // grad f0 = sum lambda grad g - Z terms

  std::vector<int> active;
  std::vector<SparseVec> grads(prog.constraints.size());
  for (size_t j = 0; j < prog.constraints.size(); ++j) {
    grads[j] = prog.constraints[j].gradient(v);
    if (active_flags[j]) {
      active.push_back(static_cast<int>(j));
    } else {
      for (const auto& [p, a] : grads[j]) rhs[p] -= lambda[j] * a;
    }
  }
  int extra = 0;
  for (size_t b = 0; b < prog.blocks.size(); ++b) {
    const auto& blk = prog.blocks[b];
    rhs.segment(blk.offset, hermitian_dim(blk.nt)) += trace_coefficients(hermitize(rest[b]));
    extra += static_cast<int>(u0[b].cols() * u0[b].cols());
  }
  const int m = static_cast<int>(active.size()) + extra;
  if (m == 0) {
    for (size_t b = 0; b < prog.blocks.size(); ++b) Z[b] = hermitize(rest[b]);
    return;
  }
  Matrix a = Matrix::Zero(n, m);
  for (size_t c = 0; c < active.size(); ++c) {
    for (const auto& [p, g] : grads[static_cast<size_t>(active[c])]) a(p, static_cast<int>(c)) += g;
  }
  int col = static_cast<int>(active.size());
  for (size_t b = 0; b < prog.blocks.size(); ++b) {
    const auto& blk = prog.blocks[b];
    const int r0 = static_cast<int>(u0[b].cols());
    for (int q = 0; q < r0 * r0; ++q, ++col) {
      Vector e = Vector::Zero(r0 * r0);
      e[q] = 1.0;
      const CMatrix s = unpack_hermitian(std::span<const double>(e.data(), static_cast<size_t>(e.size())), r0);
      const CMatrix zq = u0[b] * s * u0[b].adjoint();
      a.block(blk.offset, col, hermitian_dim(blk.nt), 1) = -trace_coefficients(hermitize(zq));
    }
  }
  const Vector sol = a.completeOrthogonalDecomposition().solve(rhs);
  if (!sol.allFinite()) return;
  for (size_t c = 0; c < active.size(); ++c) {
    lambda[static_cast<size_t>(active[c])] = std::max(0.0, sol[static_cast<int>(c)]);
  }
  col = static_cast<int>(active.size());
  for (size_t b = 0; b < prog.blocks.size(); ++b) {
    const int r0 = static_cast<int>(u0[b].cols());
    CMatrix z = rest[b];
    if (r0 > 0) {
      const CMatrix s = unpack_hermitian(std::span<const double>(sol.data() + col, static_cast<size_t>(r0 * r0)), r0);
      z += u0[b] * s * u0[b].adjoint();
      col += r0 * r0;
    }
    Z[b] = hermitize(z);
  }
}

// Active constraints have barrier multipliers above 1/sqrt(t) (slack below
// it); PSD duals are refit on the eigenvectors of W whose barrier dual exceeds
// the same threshold, the rest of Z keeps its barrier value.
void refine_duals(const ConvexProgram& prog, const Vector& v, double t, Solution& out) {
  const double threshold = 1.0 / std::sqrt(t);
  std::vector<bool> active(prog.constraints.size());
  for (size_t j = 0; j < active.size(); ++j) active[j] = out.lambda[j] > threshold;
  std::vector<CMatrix> u0(prog.blocks.size()), rest(prog.blocks.size());
  for (size_t b = 0; b < prog.blocks.size(); ++b) {
    const int nt = prog.blocks[b].nt;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(out.Z[b]);
    int r0 = 0;
    for (int j = 0; j < nt; ++j) r0 += es.eigenvalues()(j) > threshold ? 1 : 0;
    u0[b] = es.eigenvectors().rightCols(r0);
    rest[b] = es.eigenvectors().leftCols(nt - r0) * es.eigenvalues().head(nt - r0).asDiagonal() *
              es.eigenvectors().leftCols(nt - r0).adjoint();
  }
  fit_active(prog, v, active, u0, rest, out.lambda, out.Z);
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kMaxIter:
      return "max-iter";
    case SolveStatus::kInfeasibleStart:
      return "infeasible-start";
  }
  return "unknown";
}

double KktBreakdown::max() const {
  return std::max(std::max(stationarity, primal), std::max(complementarity, dual));
}

KktBreakdown kkt_breakdown(const ConvexProgram& prog, const Vector& x,
                           const std::vector<double>& lambda, const std::vector<CMatrix>& Z) {
  KktBreakdown k;
  Vector r = Vector::Zero(prog.num_vars);
  prog.objective.gradient(x, r);
  r = -r;
  for (size_t j = 0; j < prog.constraints.size(); ++j) {
    const auto& c = prog.constraints[j];
    const double g = c.value(x);
    const double l = lambda[j];
    for (const auto& [p, a] : c.gradient(x)) r[p] += l * a;
    k.primal = std::max(k.primal, g);
    k.complementarity = std::max(k.complementarity, std::abs(l * g));
    k.dual = std::max(k.dual, -l);
  }
  for (size_t b = 0; b < prog.blocks.size(); ++b) {
    const auto& blk = prog.blocks[b];
    const CMatrix w = blk.matrix(x);
    const int d = hermitian_dim(blk.nt);
    r.segment(blk.offset, d) -= trace_coefficients(Z[b]);
    k.primal = std::max(k.primal, -lambda_min(w));
    k.complementarity = std::max(k.complementarity, std::abs(trace_product(Z[b], w)));
    k.dual = std::max(k.dual, -lambda_min(hermitize(Z[b])));
  }
  k.stationarity = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
  return k;
}

double kkt_residual(const ConvexProgram& prog, const Vector& x, const std::vector<double>& lambda,
                    const std::vector<CMatrix>& Z) {
  return kkt_breakdown(prog, x, lambda, Z).max();
}

DualFit fit_duals(const ConvexProgram& prog, const Vector& x, double active_tol) {
  DualFit fit;
  fit.lambda.assign(prog.constraints.size(), 0.0);
  fit.Z.resize(prog.blocks.size());
  std::vector<bool> active(prog.constraints.size());
  for (size_t j = 0; j < active.size(); ++j) active[j] = prog.constraints[j].value(x) >= -active_tol;
  std::vector<CMatrix> u0(prog.blocks.size()), rest(prog.blocks.size());
  for (size_t b = 0; b < prog.blocks.size(); ++b) {
    const auto& blk = prog.blocks[b];
    Eigen::SelfAdjointEigenSolver<CMatrix> es(blk.matrix(x));
    const double top = std::max(es.eigenvalues()(blk.nt - 1), 0.0);
    int r0 = 0;
    while (r0 < blk.nt && es.eigenvalues()(r0) <= active_tol * std::max(top, 1.0)) ++r0;
    u0[b] = es.eigenvectors().leftCols(r0);
    rest[b] = CMatrix::Zero(blk.nt, blk.nt);
  }
  fit_active(prog, x, active, u0, rest, fit.lambda, fit.Z);
  fit.residual = kkt_residual(prog, x, fit.lambda, fit.Z);
  return fit;
}

Solution solve_barrier(const ConvexProgram& prog, const Vector& start, const SolverConfig& cfg) {
  Solution sol;
  sol.x = start;
  sol.lambda.assign(prog.constraints.size(), 0.0);
  sol.Z.assign(prog.blocks.size(), CMatrix());
  for (size_t b = 0; b < prog.blocks.size(); ++b) {
    sol.Z[b] = CMatrix::Zero(prog.blocks[b].nt, prog.blocks[b].nt);
  }
  if (!prog.strictly_feasible(start) || !std::isfinite(prog.objective.value(start))) {
    sol.status = SolveStatus::kInfeasibleStart;
    sol.objective = prog.objective.value(start);
    sol.kkt_residual = kInf;
    return sol;
  }

  double degree = static_cast<double>(prog.constraints.size());
  for (const auto& b : prog.blocks) degree += b.nt;

  Vector v = start;
  double t = cfg.t0;
  BarrierEval ev;
  for (int centering = 0; centering < cfg.max_centerings; ++centering) {
    double phi = barrier_value(prog, v, t);
    double decrement2 = kInf;
    for (int step = 0; step < cfg.newton_max; ++step) {
      barrier_derivatives(prog, v, t, ev);
      const Vector dx = newton_direction(ev.hess, ev.grad);
      const double slope = ev.grad.dot(dx);
      decrement2 = -slope;
      if (!(decrement2 > 0) || decrement2 / 2.0 <= cfg.newton_tol) break;
      double s = 1.0;
      double phi_new = kInf;
      Vector trial;
      for (int ls = 0; ls < 80; ++ls) {
        trial = v + s * dx;
        phi_new = barrier_value(prog, trial, t);
        if (phi_new <= phi + cfg.ls_alpha * s * slope) break;
        s *= cfg.ls_beta;
      }
      ++sol.newton_steps;
      if (!(phi_new <= phi + cfg.ls_alpha * s * slope)) {
        // Accept any strict decrease; otherwise the center is as good as
        // floating point resolves it.
        if (phi_new < phi) {
          v = trial;
          phi = phi_new;
        }
        break;
      }
      v = trial;
      phi = phi_new;
    }
    sol.centerings = centering + 1;
    if (cfg.verbosity >= 2 && cfg.log != nullptr) {
      *cfg.log << "centering " << centering << " t=" << t
               << " objective=" << prog.objective.value(v) << " decrement=" << decrement2 / 2.0
               << '\n';
    }
    if (degree / t <= cfg.kkt_tol / 10.0) break;
    t *= cfg.barrier_mu;
  }

  // Polish the last center. At large t the barrier value cannot resolve the
  // remaining decrease, so steps are accepted on KKT-residual decrease.
  fill_barrier_duals(prog, v, t, sol);
  double best = kkt_residual(prog, v, sol.lambda, sol.Z);
  for (int step = 0; step < cfg.newton_max && best > cfg.kkt_tol / 10.0; ++step) {
    barrier_derivatives(prog, v, t, ev);
    const Vector dx = newton_direction(ev.hess, ev.grad);
    double s = 1.0;
    Vector trial = v + dx;
    while (s > 1e-12 && !(prog.strictly_feasible(trial) &&
                          std::isfinite(prog.objective.value(trial)))) {
      s *= cfg.ls_beta;
      trial = v + s * dx;
    }
    if (s <= 1e-12) break;
    Solution probe;
    probe.lambda.resize(prog.constraints.size());
    probe.Z.resize(prog.blocks.size());
    fill_barrier_duals(prog, trial, t, probe);
    const double r = kkt_residual(prog, trial, probe.lambda, probe.Z);
    ++sol.newton_steps;
    if (!(r < best)) break;
    best = r;
    v = trial;
    sol.lambda = std::move(probe.lambda);
    sol.Z = std::move(probe.Z);
  }

  Solution refined = sol;
  refine_duals(prog, v, t, refined);
  const double r_refined = kkt_residual(prog, v, refined.lambda, refined.Z);
  if (r_refined < best) {
    best = r_refined;
    sol.lambda = std::move(refined.lambda);
    sol.Z = std::move(refined.Z);
  }

  sol.x = v;
  sol.objective = prog.objective.value(v);
  sol.kkt_residual = best;
  sol.status = sol.kkt_residual <= cfg.kkt_tol ? SolveStatus::kOptimal : SolveStatus::kMaxIter;
  return sol;
}

}  // namespace cbf
