#include "cbf/approx.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "cbf/errors.hpp"

namespace cbf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLn2 = std::log(2.0);

size_t at(int k, int i, int K) { return static_cast<size_t>(k * K + i); }

bool zero_matrix(const CMatrix& q) { return q.cwiseAbs().maxCoeff() == 0.0; }

Objective utility_objective(const UtilitySpec& spec, std::vector<int> r_idx) {
  Objective o;
  const double beta = spec.beta;
  const std::vector<double> alpha = spec.alpha;
  o.value = [beta, alpha, r_idx](const Vector& v) {
    double s = 0.0;
    for (size_t j = 0; j < r_idx.size(); ++j) {
      if (alpha[j] == 0.0) continue;
      s += alpha[j] * utility_term(beta, v[r_idx[j]]);
    }
    return s;
  };
  o.gradient = [beta, alpha, r_idx](const Vector& v, Vector& g) {
    for (size_t j = 0; j < r_idx.size(); ++j) {
      g[r_idx[j]] += beta == 0.0 ? alpha[j] : alpha[j] * std::pow(v[r_idx[j]], -beta);
    }
  };
  o.add_hessian = [beta, alpha, r_idx](const Vector& v, double scale, Matrix& h) {
    if (beta == 0.0) return;
    for (size_t j = 0; j < r_idx.size(); ++j) {
      const int p = r_idx[j];
      h(p, p) += scale * -beta * alpha[j] * std::pow(v[p], -beta - 1.0);
    }
  };
  return o;
}

Ridge ridge(ScalarFn fn, double coeff, AffineForm arg) {
  Ridge r;
  r.fn = fn;
  r.coeff = coeff;
  r.arg = std::move(arg);
  return r;
}

Constraint make(std::string tag, int user, int link) {
  Constraint c;
  c.tag = std::move(tag);
  c.user = user;
  c.link = link;
  return c;
}

// R_i <= tangent (or the exact softplus) of log2(1 + e^y).
Constraint rate_constraint(int user, int r, int y, double ybar, LinkForm form) {
  Constraint c = make("d", user, -1);
  c.affine.add(r, 1.0);
  if (form == LinkForm::kLinearized) {
    const RateTangent t = rate_tangent(ybar);
    c.affine.add(y, -t.slope);
    c.affine.constant = -(t.value - t.slope * ybar);
  } else {
    c.ridges.push_back(ridge(ScalarFn::kSoftplus, -1.0 / kLn2, AffineForm().add(y, 1.0)));
  }
  return c;
}

Constraint nonnegative_rate(int user, int r) {
  Constraint c = make("R0", user, -1);
  c.affine.add(r, -1.0);
  return c;
}

}  // namespace

bool Anchor::has_link(int k, int i) const { return std::isfinite(x(k, i)); }

Anchor compute_anchor(const BeamformerSet& bf, const RateTuple& Rt, const ChannelSet& cs) {
  Anchor a;
  a.K = cs.K;
  a.xbar.assign(static_cast<size_t>(cs.K * cs.K), kNegInf);
  a.ybar.resize(static_cast<size_t>(cs.K));
  a.zbar.resize(static_cast<size_t>(cs.K));
  for (int k = 0; k < cs.K; ++k) {
    for (int i = 0; i < cs.K; ++i) {
      if (cs.is_zero_link(k, i)) continue;
      const double tr = bf.received_power(cs, k, i);
      if (cs.has_delta_floor(k, i) && tr < cs.delta * (1.0 - 1e-9)) {
        throw InfeasibleAnchor("received power " + std::to_string(tr) + " on link (" +
                               std::to_string(k) + ", " + std::to_string(i) +
                               ") is below the interference floor");
      }
      if (!(tr > 0)) {
        throw InfeasibleAnchor("link (" + std::to_string(k) + ", " + std::to_string(i) +
                               ") carries no power");
      }
      a.xbar[at(k, i, cs.K)] = std::log(tr);
    }
  }
  for (int i = 0; i < cs.K; ++i) {
    const double r = Rt[static_cast<size_t>(i)];
    if (!(r > 0)) throw InfeasibleAnchor("anchor rate must be positive");
    if (!a.has_link(i, i)) throw InfeasibleAnchor("direct link has zero covariance");
    a.ybar[static_cast<size_t>(i)] = std::log(std::expm1(r * kLn2));
    a.zbar[static_cast<size_t>(i)] = std::exp(a.ybar[static_cast<size_t>(i)] - a.x(i, i));
  }
  return a;
}

double first_order_gap(GapKind kind, double anchor, double point) {
  if (kind == GapKind::kExp) {
    const double e = std::exp(anchor);
    return std::exp(point) - e * (point - anchor + 1.0);
  }
  const RateTangent t = rate_tangent(anchor);
  return scalar_fn(ScalarFn::kSoftplus, point) / kLn2 - (t.value + t.slope * (point - anchor));
}

RateTangent rate_tangent(double ybar) {
  return {scalar_fn(ScalarFn::kSoftplus, ybar) / kLn2,
          scalar_fn_d1(ScalarFn::kSoftplus, ybar) / kLn2};
}

Subproblem build_central_subproblem(const ChannelSet& cs, const Anchor& anchor,
                                    const UtilitySpec& spec, LinkForm form) {
  const int K = cs.K;
  Subproblem sp;
  auto& prog = sp.program;
  auto& lay = sp.layout;
  lay.K = K;
  lay.Nt = cs.Nt;
  lay.W.resize(static_cast<size_t>(K));
  lay.R.resize(static_cast<size_t>(K));
  lay.y.resize(static_cast<size_t>(K));
  lay.z.resize(static_cast<size_t>(K));
  lay.x.assign(static_cast<size_t>(K * K), -1);

  for (int k = 0; k < K; ++k) lay.W[static_cast<size_t>(k)] = prog.add_block(cs.Nt, "W" + std::to_string(k));
  for (int i = 0; i < K; ++i) {
    const std::string s = std::to_string(i);
    lay.R[static_cast<size_t>(i)] = prog.add_variable("R" + s);
    lay.y[static_cast<size_t>(i)] = prog.add_variable("y" + s);
    lay.z[static_cast<size_t>(i)] = prog.add_variable("z" + s);
    for (int k = 0; k < K; ++k) {
      if (!anchor.has_link(k, i)) continue;
      lay.x[at(k, i, K)] = prog.add_variable("x" + std::to_string(k) + "_" + s);
    }
    if (lay.x_at(i, i) < 0) throw std::invalid_argument("direct link has zero covariance");
  }

  for (int i = 0; i < K; ++i) {
    const auto ui = static_cast<size_t>(i);
    const int xii = lay.x_at(i, i);

    Constraint b = make("b", i, -1);
    b.affine.constant = std::log(cs.rho(i));
    b.affine.add(lay.z[ui], cs.sigma2[ui]);
    for (int k = 0; k < K; ++k) {
      if (k == i || lay.x_at(k, i) < 0) continue;
      b.ridges.push_back(ridge(ScalarFn::kSoftplus, 1.0,
                               AffineForm().add(lay.x_at(k, i), 1.0).add(xii, -1.0).add(lay.y[ui], 1.0)));
    }
    prog.constraints.push_back(std::move(b));

    for (int k = 0; k < K; ++k) {
      if (k == i || lay.x_at(k, i) < 0) continue;
      Constraint c = make("c", i, k);
      c.affine.add(lay.W[static_cast<size_t>(k)], trace_coefficients(cs.q(k, i)));
      if (form == LinkForm::kLinearized) {
        const double xb = anchor.x(k, i);
        const double e = std::exp(xb);
        c.affine.add(lay.x_at(k, i), -e);
        c.affine.constant = -e * (1.0 - xb);
      } else {
        c.ridges.push_back(ridge(ScalarFn::kExp, -1.0, AffineForm().add(lay.x_at(k, i), 1.0)));
      }
      prog.constraints.push_back(std::move(c));
    }

    Constraint c2 = make("c2", i, i);
    c2.ridges.push_back(ridge(ScalarFn::kExp, 1.0, AffineForm().add(xii, 1.0)));
    c2.affine.add(lay.W[ui], -trace_coefficients(cs.q(i, i)));
    prog.constraints.push_back(std::move(c2));

    prog.constraints.push_back(rate_constraint(i, lay.R[ui], lay.y[ui], anchor.ybar[ui], form));

    Constraint e = make("e", i, -1);
    e.ridges.push_back(ridge(ScalarFn::kExp, 1.0, AffineForm().add(lay.y[ui], 1.0).add(xii, -1.0)));
    e.affine.add(lay.z[ui], -1.0);
    prog.constraints.push_back(std::move(e));

    Constraint pw = make("P", i, -1);
    pw.affine.add(lay.W[ui], trace_coefficients(CMatrix::Identity(cs.Nt, cs.Nt)));
    pw.affine.constant = -cs.P[ui];
    prog.constraints.push_back(std::move(pw));

    for (int k = 0; k < K; ++k) {
      if (!cs.has_delta_floor(i, k)) continue;
      Constraint d = make("delta", i, k);
      d.affine.add(lay.W[ui], -trace_coefficients(cs.q(i, k)));
      d.affine.constant = cs.delta;
      prog.constraints.push_back(std::move(d));
    }

    prog.constraints.push_back(nonnegative_rate(i, lay.R[ui]));
  }
  prog.objective = utility_objective(spec, lay.R);
  return sp;
}

LocalView LocalView::from_channel_set(const ChannelSet& cs, int i) {
  LocalView v;
  v.i = i;
  v.K = cs.K;
  v.Nt = cs.Nt;
  v.delta = cs.delta;
  v.sigma2 = cs.sigma2;
  v.P = cs.P;
  v.eps = cs.eps;
  for (int k = 0; k < cs.K; ++k) v.Q_out.push_back(cs.q(i, k));
  return v;
}

Subproblem build_local_subproblem(const LocalView& view, const std::vector<double>& xbar,
                                  const std::vector<double>& ybar, const UtilitySpec& spec) {
  const int K = view.K;
  const int me = view.i;
  const auto ume = static_cast<size_t>(me);
  Subproblem sp;
  auto& prog = sp.program;
  auto& lay = sp.layout;
  lay.K = K;
  lay.Nt = view.Nt;
  lay.W.assign(static_cast<size_t>(K), -1);
  lay.R.resize(static_cast<size_t>(K));
  lay.y.resize(static_cast<size_t>(K));
  lay.z.resize(static_cast<size_t>(K));
  lay.x.assign(static_cast<size_t>(K * K), -1);
  auto xb = [&](int k, int j) { return xbar[at(k, j, K)]; };
  auto own_link = [&](int k) { return !zero_matrix(view.Q_out[static_cast<size_t>(k)]); };

  lay.W[ume] = prog.add_block(view.Nt, "W" + std::to_string(me));
  for (int j = 0; j < K; ++j) {
    const std::string s = std::to_string(j);
    lay.R[static_cast<size_t>(j)] = prog.add_variable("R" + s);
    lay.y[static_cast<size_t>(j)] = prog.add_variable("y" + s);
    lay.z[static_cast<size_t>(j)] = prog.add_variable("z" + s);
    if (own_link(j)) lay.x[at(me, j, K)] = prog.add_variable("x" + std::to_string(me) + "_" + s);
  }
  if (lay.x_at(me, me) < 0) throw std::invalid_argument("direct link has zero covariance");

  for (int j = 0; j < K; ++j) {
    const auto uj = static_cast<size_t>(j);
    const int yj = lay.y[uj];

    // Own rate constraint uses the variable x_ii; a peer's uses the published
    // x_jj, with this node's interference x_ij as the only variable term.
    Constraint b = make("b", j, -1);
    b.affine.constant = std::log(1.0 - view.eps[uj]);
    b.affine.add(lay.z[uj], view.sigma2[uj]);
    for (int k = 0; k < K; ++k) {
      if (k == j) continue;
      AffineForm arg;
      arg.add(yj, 1.0);
      if (j == me) {
        if (!std::isfinite(xb(k, j))) continue;
        arg.add(lay.x_at(me, me), -1.0);
        arg.constant = xb(k, j);
      } else if (k == me) {
        if (lay.x_at(me, j) < 0) continue;
        arg.add(lay.x_at(me, j), 1.0);
        arg.constant = -xb(j, j);
      } else {
        if (!std::isfinite(xb(k, j))) continue;
        arg.constant = xb(k, j) - xb(j, j);
      }
      b.ridges.push_back(ridge(ScalarFn::kSoftplus, 1.0, std::move(arg)));
    }
    prog.constraints.push_back(std::move(b));

    if (j == me) {
      for (int k = 0; k < K; ++k) {
        if (k == me || lay.x_at(me, k) < 0) continue;
        Constraint c = make("c", k, me);
        const double x0 = xb(me, k);
        const double e = std::exp(x0);
        c.affine.add(lay.W[ume], trace_coefficients(view.Q_out[static_cast<size_t>(k)]));
        c.affine.add(lay.x_at(me, k), -e);
        c.affine.constant = -e * (1.0 - x0);
        prog.constraints.push_back(std::move(c));
      }
      Constraint c2 = make("c2", me, me);
      c2.ridges.push_back(ridge(ScalarFn::kExp, 1.0, AffineForm().add(lay.x_at(me, me), 1.0)));
      c2.affine.add(lay.W[ume], -trace_coefficients(view.Q_out[ume]));
      prog.constraints.push_back(std::move(c2));
    }

    prog.constraints.push_back(rate_constraint(j, lay.R[uj], yj, ybar[uj], LinkForm::kLinearized));

    Constraint e = make("e", j, -1);
    if (j == me) {
      e.ridges.push_back(ridge(ScalarFn::kExp, 1.0, AffineForm().add(yj, 1.0).add(lay.x_at(me, me), -1.0)));
    } else {
      AffineForm arg;
      arg.add(yj, 1.0);
      arg.constant = -xb(j, j);
      e.ridges.push_back(ridge(ScalarFn::kExp, 1.0, std::move(arg)));
    }
    e.affine.add(lay.z[uj], -1.0);
    prog.constraints.push_back(std::move(e));

    if (j == me) {
      Constraint pw = make("P", me, -1);
      pw.affine.add(lay.W[ume], trace_coefficients(CMatrix::Identity(view.Nt, view.Nt)));
      pw.affine.constant = -view.P[ume];
      prog.constraints.push_back(std::move(pw));
      for (int k = 0; k < K; ++k) {
        const CMatrix& q = view.Q_out[static_cast<size_t>(k)];
        if (zero_matrix(q) || lambda_max(q) * view.P[ume] < 2.0 * view.delta) continue;
        Constraint d = make("delta", me, k);
        d.affine.add(lay.W[ume], -trace_coefficients(q));
        d.affine.constant = view.delta;
        prog.constraints.push_back(std::move(d));
      }
    }

    prog.constraints.push_back(nonnegative_rate(j, lay.R[uj]));
  }
  prog.objective = utility_objective(spec, lay.R);
  return sp;
}

Vector anchor_point(const Subproblem& sp, const std::vector<CMatrix>& W, const RateTuple& Rt,
                    const std::vector<double>& xbar, const std::vector<double>& ybar) {
  const auto& lay = sp.layout;
  const int K = lay.K;
  Vector v = Vector::Zero(sp.program.num_vars);
  for (int k = 0; k < K; ++k) {
    const int off = lay.W[static_cast<size_t>(k)];
    if (off < 0) continue;
    pack_hermitian(W[static_cast<size_t>(k)],
                   std::span<double>(v.data() + off, static_cast<size_t>(hermitian_dim(lay.Nt))));
  }
  for (int j = 0; j < K; ++j) {
    const auto uj = static_cast<size_t>(j);
    v[lay.R[uj]] = Rt[uj];
    v[lay.y[uj]] = ybar[uj];
    v[lay.z[uj]] = std::exp(ybar[uj] - xbar[at(j, j, K)]);
    for (int k = 0; k < K; ++k) {
      if (lay.x_at(k, j) >= 0) v[lay.x_at(k, j)] = xbar[at(k, j, K)];
    }
  }
  return v;
}

namespace {

bool try_interior(const Subproblem& sp, const std::vector<double>& P, double theta, double slack,
                  double margin, Vector& v) {
  const auto& prog = sp.program;
  const auto& lay = sp.layout;
  const int nt = lay.Nt;
  for (int k = 0; k < lay.K; ++k) {
    const int off = lay.W[static_cast<size_t>(k)];
    if (off < 0) continue;
    const std::span<double> coords(v.data() + off, static_cast<size_t>(hermitian_dim(nt)));
    CMatrix w = unpack_hermitian(coords, nt);
    w = (1.0 - theta) * w + theta * P[static_cast<size_t>(k)] / (2.0 * nt) * CMatrix::Identity(nt, nt);
    pack_hermitian(w, coords);
  }

  std::map<std::pair<std::string, int>, const Constraint*> by_user;
  for (const auto& c : prog.constraints) {
    if (c.tag == "c") {
      // Move the log variable, whose coefficient is -exp(xbar), so the
      // constraint holds with slack relative to the tangent scale.
      for (const auto& [idx, coef] : c.affine.terms) {
        if (coef >= 0 || idx < lay.R.front()) continue;
        const double m = std::max(slack * -coef, margin);
        v[idx] += (c.value(v) + m) / -coef;
      }
    } else if (c.tag == "c2") {
      const int idx = c.ridges.front().arg.terms.front().first;
      const double tr = -c.affine.eval(v);
      const double m = std::max(slack * tr, margin);
      if (!(tr > m)) return false;
      v[idx] = std::log(tr - m);
    } else if (c.tag == "b" || c.tag == "d" || c.tag == "e") {
      by_user[{c.tag, c.user}] = &c;
    }
  }

  for (int j = 0; j < lay.K; ++j) {
    const auto uj = static_cast<size_t>(j);
    const Constraint* b = by_user.at({"b", j});
    const Constraint* d = by_user.at({"d", j});
    const Constraint* e = by_user.at({"e", j});
    const int y = lay.y[uj];
    const int z = lay.z[uj];
    auto place = [&](double yv) {
      v[y] = yv;
      const double ex = e->value(v) + v[z];
      v[z] = ex + std::max(slack * ex, margin);
      return b->value(v);
    };
    const double target = -std::max(slack, margin);
    const double y0 = v[y];
    double lo = y0;
    double step = 1e-3;
    while (place(lo) > target) {
      lo = y0 - step;
      step *= 2.0;
      if (step > 400.0) return false;
    }
    if (lo < y0) {
      double hi = y0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (place(mid) > target ? hi : lo) = mid;
      }
      place(lo);
    }
    // d reads R - tangent(y); keep R a slack below the tangent.
    const double tangent = v[lay.R[uj]] - d->value(v);
    if (!(tangent > 0)) return false;
    v[lay.R[uj]] = tangent - std::min(std::max(slack, margin), tangent / 2.0);
  }
  return prog.strictly_feasible(v);
}

}  // namespace

InteriorPoint feasible_interior_point(const Subproblem& sp, const Vector& anchor_pt,
                                      const std::vector<double>& P, const InteriorOptions& opts) {
  double theta = opts.theta;
  double slack = opts.slack;
  for (int attempt = 0; attempt <= opts.max_backoff; ++attempt) {
    Vector v = anchor_pt;
    if (try_interior(sp, P, theta, slack, opts.margin, v)) {
      InteriorPoint out;
      out.point = std::move(v);
      out.theta = theta;
      out.min_margin = -sp.program.max_violation(out.point);
      return out;
    }
    // Pulling toward the identity leaks power into links the anchor has
    // already driven near the floor, so retries move less, not more.
    theta *= 0.5;
    slack *= 0.5;
  }
  throw InfeasibleStart("no strictly feasible start near the anchor point");
}

InteriorPoint feasible_interior_point(const Subproblem& sp, const Vector& anchor_pt,
                                      const ChannelSet& cs, const InteriorOptions& opts) {
  return feasible_interior_point(sp, anchor_pt, cs.P, opts);
}

ProgramPoint extract_point(const Subproblem& sp, const Vector& v) {
  const auto& lay = sp.layout;
  const int K = lay.K;
  ProgramPoint p;
  p.W.resize(static_cast<size_t>(K));
  p.R.resize(static_cast<size_t>(K));
  p.y.resize(static_cast<size_t>(K));
  p.z.resize(static_cast<size_t>(K));
  p.x.assign(static_cast<size_t>(K * K), std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < K; ++k) {
    const auto uk = static_cast<size_t>(k);
    if (lay.W[uk] >= 0) {
      p.W[uk] = unpack_hermitian(
          std::span<const double>(v.data() + lay.W[uk], static_cast<size_t>(hermitian_dim(lay.Nt))), lay.Nt);
    }
    p.R[uk] = v[lay.R[uk]];
    p.y[uk] = v[lay.y[uk]];
    p.z[uk] = v[lay.z[uk]];
    for (int i = 0; i < K; ++i) {
      if (lay.x_at(k, i) >= 0) p.x[at(k, i, K)] = v[lay.x_at(k, i)];
    }
  }
  return p;
}

}  // namespace cbf
