#include "cbf/sca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "cbf/errors.hpp"
#include "cbf/outage.hpp"
#include "cbf/rng.hpp"

namespace cbf {

namespace {

bool meets_floor(const BeamformerSet& bf, const ChannelSet& cs, int i) {
  for (int k = 0; k < cs.K; ++k) {
    if (cs.has_delta_floor(i, k) && bf.received_power(cs, i, k) < cs.delta) return false;
  }
  return true;
}

double safe_utility(const UtilitySpec& spec, const RateTuple& R) {
  try {
    return utility_value(spec, R);
  } catch (const DomainError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

BeamformerSet mrt_init(const ChannelSet& cs) {
  std::vector<CVector> w;
  for (int i = 0; i < cs.K; ++i) {
    w.push_back(std::sqrt(cs.P[static_cast<size_t>(i)]) * principal_eigenvector(cs.q(i, i)));
  }
  return BeamformerSet::from_vectors(std::move(w));
}

std::optional<BeamformerSet> zf_init(const ChannelSet& cs, std::vector<double>* kappa) {
  const BeamformerSet mrt = mrt_init(cs);
  std::vector<CVector> w(static_cast<size_t>(cs.K));
  std::vector<double> chosen(static_cast<size_t>(cs.K), 0.0);
  for (int i = 0; i < cs.K; ++i) {
    const auto ui = static_cast<size_t>(i);
    CMatrix S = CMatrix::Zero(cs.Nt, cs.Nt);
    for (int k = 0; k < cs.K; ++k) {
      if (k != i) S += cs.q(i, k);
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(S));
    const double tol = 1e-10 * std::max(1.0, es.eigenvalues()(cs.Nt - 1));
    int null_dim = 0;
    while (null_dim < cs.Nt && es.eigenvalues()(null_dim) <= tol) ++null_dim;
    if (null_dim == 0) return std::nullopt;
    const CMatrix N = es.eigenvectors().leftCols(null_dim);
    const CMatrix projected = hermitize(N.adjoint() * cs.q(i, i) * N);
    if (lambda_max(projected) <= 1e-10) return std::nullopt;
    CVector v = N * principal_eigenvector(projected);
    normalize_phase(v);
    const CVector zf = std::sqrt(cs.P[ui]) * v.normalized();

    bool placed = false;
    for (double k : {0.0, 0.01, 0.1}) {
      CVector cand = (1.0 - k) * zf + k * mrt.w[ui];
      if (cand.norm() == 0.0) continue;
      cand *= std::sqrt(cs.P[ui]) / cand.norm();
      std::vector<CVector> probe(static_cast<size_t>(cs.K), CVector::Zero(cs.Nt));
      probe[ui] = cand;
      if (meets_floor(BeamformerSet::from_vectors(probe), cs, i)) {
        w[ui] = cand;
        chosen[ui] = k;
        placed = true;
        break;
      }
    }
    if (!placed) return std::nullopt;
  }
  if (kappa != nullptr) *kappa = chosen;
  return BeamformerSet::from_vectors(std::move(w));
}

std::vector<CMatrix> preserved_maps(const ChannelSet& cs, int i) {
  std::vector<CMatrix> maps{CMatrix::Identity(cs.Nt, cs.Nt)};
  for (int k = 0; k < cs.K; ++k) {
    if (k != i && !cs.is_zero_link(i, k)) maps.push_back(cs.q(i, k));
  }
  return maps;
}

RankReduction rank_reduce(const CMatrix& W, const CMatrix& Q_signal,
                          const std::vector<CMatrix>& preserved) {
  RankReduction out;
  out.rank_before = numerical_rank(W);
  const int nt = static_cast<int>(W.rows());
  const int m = static_cast<int>(preserved.size());

  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(W));
  const double top = es.eigenvalues()(nt - 1);
  if (!(top > 0)) {
    out.W = W;
    out.rank_after = 0;
    return out;
  }
  int r = 0;
  for (int j = 0; j < nt; ++j) r += es.eigenvalues()(j) > 1e-6 * top ? 1 : 0;
  // W = V V^H on the retained eigenspace.
  CMatrix V = es.eigenvectors().rightCols(r) *
              es.eigenvalues().tail(r).cwiseSqrt().asDiagonal();

  while (r > 1 && r * r > m) {
    const int d = hermitian_dim(r);
    // Hold the signal as well when the null space leaves room for it.
    const CMatrix Qs = hermitize(V.adjoint() * Q_signal * V);
    std::optional<Vector> coords;
    for (const bool hold_signal : {true, false}) {
      Matrix C(m + (hold_signal ? 1 : 0), d);
      for (int j = 0; j < m; ++j) {
        C.row(j) = trace_coefficients(hermitize(V.adjoint() * preserved[static_cast<size_t>(j)] * V)).transpose();
      }
      if (hold_signal) C.row(m) = trace_coefficients(Qs).transpose();
      Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      const double tol = 1e-12 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
      int rank_c = 0;
      for (Eigen::Index j = 0; j < sv.size(); ++j) rank_c += sv(j) > tol ? 1 : 0;
      if (rank_c < d) {
        coords = svd.matrixV().col(rank_c);
        break;
      }
    }
    if (!coords) {
      out.stalled = true;
      break;
    }
    CMatrix delta = unpack_hermitian(std::span<const double>(coords->data(), static_cast<size_t>(d)), r);
    if (trace_product(Qs, delta) > 0) delta = -delta;
    const double lmax = lambda_max(delta);
    if (!(lmax > 0)) {
      out.stalled = true;
      break;
    }
    // I - delta / lmax is PSD with a zero eigenvalue: one rank is shed.
    const CMatrix step = hermitize(CMatrix::Identity(r, r) - delta / lmax);
    Eigen::SelfAdjointEigenSolver<CMatrix> se(step);
    int keep = 0;
    const double stop = se.eigenvalues()(r - 1);
    for (int j = 0; j < r; ++j) keep += se.eigenvalues()(j) > 1e-12 * stop ? 1 : 0;
    V = V * se.eigenvectors().rightCols(keep) *
        se.eigenvalues().tail(keep).cwiseMax(0.0).cwiseSqrt().asDiagonal();
    r = keep;
  }
  out.W = hermitize(V * V.adjoint());
  out.rank_after = r;
  return out;
}

BeamformerSet principal_vectors(const std::vector<CMatrix>& W) {
  std::vector<CVector> w;
  for (const auto& m : W) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(m));
    const int nt = static_cast<int>(m.rows());
    CVector v = es.eigenvectors().col(nt - 1);
    normalize_phase(v);
    w.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(nt - 1))) * v);
  }
  return BeamformerSet::from_vectors(std::move(w));
}

Randomized gaussian_randomize(const std::vector<CMatrix>& W, const ChannelSet& cs,
                              const UtilitySpec& spec, int count, std::uint64_t seed) {
  Randomized best;
  best.utility = -std::numeric_limits<double>::infinity();
  bool all_rank_one = true;
  for (const auto& m : W) all_rank_one = all_rank_one && numerical_rank(m) <= 1;
  if (all_rank_one) {
    best.bf = principal_vectors(W);
    best.rates = tighten_rates(best.bf, cs);
    best.utility = safe_utility(spec, best.rates);
    return best;
  }

  std::vector<CMatrix> factors;
  for (const auto& m : W) factors.push_back(psd_factor(hermitize(m), 1e-8));
  bool found = false;
  for (int c = 0; c < count; ++c) {
    std::vector<CVector> w;
    for (int i = 0; i < cs.K; ++i) {
      const GaussianStream stream(seed, StreamDomain::kRandomization,
                                  static_cast<std::uint32_t>(c * cs.K + i));
      CVector g(cs.Nt);
      for (int a = 0; a < cs.Nt; ++a) g[a] = stream.sample(static_cast<std::uint64_t>(a));
      CVector v = factors[static_cast<size_t>(i)] * g;
      const double target = W[static_cast<size_t>(i)].trace().real();
      if (v.squaredNorm() > 0) v *= std::sqrt(target / v.squaredNorm());
      w.push_back(std::move(v));
    }
    const BeamformerSet cand = BeamformerSet::from_vectors(std::move(w));
    bool ok = true;
    for (int i = 0; i < cs.K && ok; ++i) ok = meets_floor(cand, cs, i) && cand.received_power(cs, i, i) > 0;
    if (!ok) continue;
    const RateTuple r = tighten_rates(cand, cs);
    const double u = safe_utility(spec, r);
    if (!found || u > best.utility) {
      best.bf = cand;
      best.rates = r;
      best.utility = u;
      found = true;
    }
  }
  if (!found) {
    best.bf = principal_vectors(W);
    best.rates = tighten_rates(best.bf, cs);
    best.utility = safe_utility(spec, best.rates);
    best.fallback = true;
  }
  return best;
}

double stationarity_at(const ChannelSet& cs, const UtilitySpec& spec, const std::vector<CMatrix>& W) {
  const BeamformerSet bf = BeamformerSet::from_matrices(W);
  const RateTuple Rt = tighten_rates(bf, cs);
  const Anchor anchor = compute_anchor(bf, Rt, cs);
  const Subproblem exact = build_central_subproblem(cs, anchor, spec, LinkForm::kExact);
  const Vector v = anchor_point(exact, W, Rt, anchor.xbar, anchor.ybar);
  return fit_duals(exact.program, v, 1e-6).residual;
}

ScaTrace run_sca(const ChannelSet& cs, const UtilitySpec& spec, const BeamformerSet& init,
                 const ScaConfig& cfg) {
  ScaTrace trace;
  BeamformerSet bf = init.as_matrices();
  RateTuple Rt = tighten_rates(bf, cs);
  double U = utility_value(spec, Rt);
  {
    ScaIteration it;
    it.n = 0;
    it.utility = U;
    it.rates = Rt;
    it.program_rates = Rt;
    it.kkt = std::numeric_limits<double>::quiet_NaN();
    trace.iterations.push_back(it);
  }

  std::optional<Subproblem> last_sp;
  std::optional<Solution> last_sol;
  for (int n = 1; n <= cfg.max_iters; ++n) {
    const Anchor anchor = compute_anchor(bf, Rt, cs);
    Subproblem sp = build_central_subproblem(cs, anchor, spec);
    const Vector start = anchor_point(sp, bf.W, Rt, anchor.xbar, anchor.ybar);
    const InteriorPoint ip = feasible_interior_point(sp, start, cs, cfg.interior);
    Solution sol = solve_barrier(sp.program, ip.point, cfg.solver);
    if (sol.status == SolveStatus::kInfeasibleStart) {
      throw InfeasibleStart("barrier solver rejected the interior start");
    }
    const ProgramPoint pt = extract_point(sp, sol.x);

    ScaIteration it;
    it.n = n;
    it.status = sol.status;
    it.kkt = sol.kkt_residual;
    it.program_rates = pt.R;
    for (int k = 0; k < cs.K; ++k) {
      for (int i = 0; i < cs.K; ++i) {
        if (!anchor.has_link(k, i)) continue;
        it.gap_x = std::max(it.gap_x, std::abs(pt.x[static_cast<size_t>(k * cs.K + i)] - anchor.x(k, i)));
      }
      it.gap_y = std::max(it.gap_y, std::abs(pt.y[static_cast<size_t>(k)] - anchor.ybar[static_cast<size_t>(k)]));
    }

    std::vector<CMatrix> Wn;
    for (const auto& w : pt.W) Wn.push_back(hermitize(w));
    const BeamformerSet next = BeamformerSet::from_matrices(Wn);
    const RateTuple Rn = tighten_rates(next, cs);
    const double Un = utility_value(spec, Rn);
    it.rates = Rn;
    it.utility = Un;
    if (cfg.solver.verbosity >= 1 && cfg.solver.log != nullptr) {
      *cfg.solver.log << "sca iter " << n << " utility=" << Un << " gap_x=" << it.gap_x
                      << " gap_y=" << it.gap_y << " status=" << to_string(sol.status)
                      << " kkt=" << sol.kkt_residual << '\n';
    }
    if (Un < U - 1e-12) {
      // Only an inaccurate solve can lose utility; keep the previous point.
      it.accepted = false;
      trace.iterations.push_back(it);
      break;
    }
    trace.iterations.push_back(it);
    const double improvement = (Un - U) / std::max(std::abs(U), 1e-300);
    bf = next;
    Rt = Rn;
    U = Un;
    last_sp = std::move(sp);
    last_sol = std::move(sol);
    if (improvement < cfg.stop_rel) {
      trace.converged = true;
      break;
    }
  }

  trace.W = bf.W;
  if (last_sp && last_sol) {
    Anchor presence;
    presence.K = cs.K;
    presence.xbar.assign(static_cast<size_t>(cs.K * cs.K), -std::numeric_limits<double>::infinity());
    for (int k = 0; k < cs.K; ++k) {
      for (int i = 0; i < cs.K; ++i) {
        if (last_sp->layout.x_at(k, i) >= 0) presence.xbar[static_cast<size_t>(k * cs.K + i)] = 0.0;
      }
    }
    presence.ybar.assign(static_cast<size_t>(cs.K), 0.0);
    const Subproblem exact = build_central_subproblem(cs, presence, spec, LinkForm::kExact);
    const double with_solver_duals = kkt_residual(exact.program, last_sol->x, last_sol->lambda, last_sol->Z);
    const double fitted = fit_duals(exact.program, last_sol->x, 1e-6).residual;
    trace.kkt_exact = std::min(with_solver_duals, fitted);
  } else {
    trace.kkt_exact = stationarity_at(cs, spec, bf.W);
  }

  bool all_rank_one = true;
  for (int i = 0; i < cs.K; ++i) {
    RankReduction rr = rank_reduce(bf.W[static_cast<size_t>(i)], cs.q(i, i), preserved_maps(cs, i));
    all_rank_one = all_rank_one && rr.rank_after <= 1;
    trace.W_reduced.push_back(rr.W);
    trace.ranks.push_back(std::move(rr));
  }
  if (all_rank_one) {
    trace.beams = principal_vectors(trace.W_reduced);
    trace.rates = tighten_rates(trace.beams, cs);
    trace.utility = safe_utility(spec, trace.rates);
  } else {
    Randomized r = gaussian_randomize(trace.W_reduced, cs, spec, cfg.randomization_count, cfg.seed);
    trace.beams = std::move(r.bf);
    trace.rates = std::move(r.rates);
    trace.utility = r.utility;
    trace.randomized = true;
  }
  return trace;
}

}  // namespace cbf
