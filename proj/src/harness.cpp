#include "cbf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "cbf/dist.hpp"
#include "cbf/errors.hpp"
#include "cbf/outage.hpp"
#include "cbf/sca.hpp"

namespace cbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double score(const UtilitySpec& spec, const RateTuple& R) {
  try {
    return utility_value(spec, R);
  } catch (const DomainError&) {
    return -kInf;
  }
}

UtilitySpec make_spec(const ExperimentConfig& cfg) {
  UtilitySpec spec = UtilitySpec::uniform(cfg.K, cfg.beta);
  if (!cfg.alpha.empty()) spec.alpha = cfg.alpha;
  spec.validate(cfg.K);
  return spec;
}

}  // namespace

std::vector<double> interference_caps(double lo, double hi, int M) {
  if (M < 1) throw std::invalid_argument("grid needs at least one level");
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("cap range must satisfy 0 < lo < hi");
  std::vector<double> caps(static_cast<size_t>(M + 1));
  const double ratio = std::log(hi / lo);
  for (int j = 0; j <= M; ++j) {
    caps[static_cast<size_t>(j)] = j == M ? hi : lo * std::exp(ratio * j / M);
  }
  return caps;
}

CMatrix solve_cap_problem(const CMatrix& Q_signal, const CMatrix& Q_leak, double cap, double P,
                          const SolverConfig& cfg) {
  const int nt = static_cast<int>(Q_signal.rows());
  if (!std::isfinite(cap)) {
    const CVector v = principal_eigenvector(Q_signal);
    return P * v * v.adjoint();
  }
  ConvexProgram prog;
  const int off = prog.add_block(nt, "W");
  prog.objective = Objective::linear(trace_coefficients(Q_signal));

  Constraint leak;
  leak.tag = "cap";
  leak.affine.add(off, trace_coefficients(Q_leak));
  leak.affine.constant = -cap;
  prog.constraints.push_back(std::move(leak));

  Constraint power;
  power.tag = "P";
  power.affine.add(off, trace_coefficients(CMatrix::Identity(nt, nt)));
  power.affine.constant = -P;
  prog.constraints.push_back(std::move(power));

  const double leak_trace = Q_leak.trace().real();
  double c = P / nt;
  if (leak_trace > 0.0) c = std::min(c, cap / leak_trace);
  Vector start(prog.num_vars);
  pack_hermitian(0.5 * c * CMatrix::Identity(nt, nt), std::span<double>(start.data(), static_cast<size_t>(start.size())));
  const Solution sol = solve_barrier(prog, start, cfg);
  if (sol.status == SolveStatus::kInfeasibleStart) throw NumericFailure("cap problem has no interior start");
  return hermitize(prog.blocks.front().matrix(sol.x));
}

BaselineResult exhaustive_search(const ChannelSet& cs, const UtilitySpec& spec, int M,
                                 const SolverConfig& cfg) {
  if (cs.K != 2) throw std::invalid_argument("exhaustive search supports K = 2 only");
  spec.validate(cs.K);
  // candidates[i]: cap-problem solutions of transmitter i over its leakage grid.
  std::vector<std::vector<CMatrix>> candidates(2);
  for (int i = 0; i < 2; ++i) {
    const int k = 1 - i;
    const double P = cs.P[static_cast<size_t>(i)];
    const double hi = P * lambda_max(cs.q(i, k));
    if (cs.is_zero_link(i, k) || hi <= cs.delta) {
      candidates[static_cast<size_t>(i)].push_back(solve_cap_problem(cs.q(i, i), cs.q(i, k), kInf, P, cfg));
      continue;
    }
    for (double cap : interference_caps(cs.delta, hi, M)) {
      candidates[static_cast<size_t>(i)].push_back(solve_cap_problem(cs.q(i, i), cs.q(i, k), cap, P, cfg));
    }
  }
  BaselineResult best;
  best.utility = -kInf;
  for (const CMatrix& W0 : candidates[0]) {
    for (const CMatrix& W1 : candidates[1]) {
      BeamformerSet bf = BeamformerSet::from_matrices({W0, W1});
      RateTuple R = tighten_rates(bf, cs);
      const double u = score(spec, R);
      if (u > best.utility) {
        best.utility = u;
        best.rates = std::move(R);
        best.beams = std::move(bf);
      }
    }
  }
  return best;
}

BaselineResult power_grid_oracle(const ChannelSet& cs, const UtilitySpec& spec, int grid) {
  if (cs.Nt != 1) throw std::invalid_argument("power grid oracle needs Nt = 1");
  if (cs.K > 3) throw std::invalid_argument("power grid oracle is limited to K <= 3");
  if (grid < 2) throw std::invalid_argument("power grid needs at least two points");
  spec.validate(cs.K);
  const int K = cs.K;
  std::vector<double> gain(static_cast<size_t>(K * K));
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < K; ++i) gain[static_cast<size_t>(k * K + i)] = cs.q(k, i)(0, 0).real();
  }

  std::vector<int> idx(static_cast<size_t>(K), 0);
  std::vector<double> p(static_cast<size_t>(K));
  RateTuple R(static_cast<size_t>(K));
  BaselineResult best;
  best.utility = -kInf;
  std::vector<double> best_p;
  for (;;) {
    for (int i = 0; i < K; ++i) {
      p[static_cast<size_t>(i)] = cs.P[static_cast<size_t>(i)] * idx[static_cast<size_t>(i)] / (grid - 1);
    }
    for (int i = 0; i < K; ++i) {
      LinkPowers lp;
      lp.signal = p[static_cast<size_t>(i)] * gain[static_cast<size_t>(i * K + i)];
      if (lp.signal <= 0.0) {
        R[static_cast<size_t>(i)] = 0.0;
        continue;
      }
      for (int k = 0; k < K; ++k) {
        if (k != i && !cs.is_zero_link(k, i)) lp.interference.push_back(p[static_cast<size_t>(k)] * gain[static_cast<size_t>(k * K + i)]);
      }
      R[static_cast<size_t>(i)] = tight_rate(cs.rho(i), cs.sigma2[static_cast<size_t>(i)], lp);
    }
    const double u = score(spec, R);
    if (u > best.utility) {
      best.utility = u;
      best.rates = R;
      best_p = p;
    }
    int d = 0;
    while (d < K && ++idx[static_cast<size_t>(d)] == grid) idx[static_cast<size_t>(d++)] = 0;
    if (d == K) break;
  }
  std::vector<CVector> w;
  for (int i = 0; i < K; ++i) {
    CVector v(1);
    v[0] = std::sqrt(best_p[static_cast<size_t>(i)]);
    w.push_back(std::move(v));
  }
  best.beams = BeamformerSet::from_vectors(std::move(w));
  return best;
}

void ExperimentConfig::validate() const {
  if (instances < 1) throw std::invalid_argument("instances must be positive");
  if (axis != "snr_db" && axis != "eta") throw std::invalid_argument("axis must be snr_db or eta");
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (K < 1 || Nt < 1 || rank < 1) throw std::invalid_argument("K, Nt and rank must be positive");
  if (methods.empty()) throw std::invalid_argument("no methods requested");
  for (const auto& m : methods) {
    if (m != "sca" && m != "dist" && m != "mrt" && m != "zf" && m != "exhaustive") {
      throw std::invalid_argument("unknown method " + m);
    }
    if (m == "exhaustive" && K != 2) throw std::invalid_argument("exhaustive search needs K = 2");
  }
  if (M < 1) throw std::invalid_argument("M must be positive");
  if (axis == "eta") {
    for (double v : values) {
      if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("eta values must lie in (0, 1]");
    }
  }
  make_spec(*this);
}

ExperimentConfig experiment_from_json(const std::string& text) {
  ExperimentConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    c.instances = j.value("instances", c.instances);
    c.seed_base = j.value("seed_base", c.seed_base);
    c.axis = j.value("axis", c.axis);
    c.values = j.value("values", c.values);
    c.K = j.value("K", c.K);
    c.Nt = j.value("Nt", c.Nt);
    c.rank = j.value("rank", c.rank);
    c.eta = j.value("eta", c.eta);
    c.snr_db = j.value("snr_db", c.snr_db);
    c.beta = j.value("beta", c.beta);
    c.alpha = j.value("alpha", c.alpha);
    c.methods = j.value("methods", c.methods);
    c.M = j.value("M", c.M);
    c.P = j.value("P", c.P);
    c.eps = j.value("eps", c.eps);
    c.delta = j.value("delta", c.delta);
    c.stop_rel = j.value("stop_rel", c.stop_rel);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.max_rounds = j.value("max_rounds", c.max_rounds);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

bool solution_feasible(const BeamformerSet& bf, const RateTuple& R, const ChannelSet& cs) {
  if (static_cast<int>(R.size()) != cs.K || bf.size() != cs.K) return false;
  for (int i = 0; i < cs.K; ++i) {
    const auto ui = static_cast<size_t>(i);
    if (!(R[ui] >= 0.0)) return false;
    if (bf.power(i) > cs.P[ui] + 1e-9) return false;
    if (R[ui] > 0.0 && closed_form_outage(bf, R[ui], i, cs) > cs.eps[ui] + 1e-6) return false;
  }
  return true;
}

BaselineResult run_method(const std::string& method, const ChannelSet& cs, const UtilitySpec& spec,
                          const ExperimentConfig& cfg) {
  BaselineResult r;
  if (method == "mrt" || method == "zf") {
    if (method == "mrt") {
      r.beams = mrt_init(cs);
    } else {
      auto zf = zf_init(cs);
      if (!zf) throw NumericFailure("zero-forcing has no admissible direction");
      r.beams = std::move(*zf);
    }
    r.rates = tighten_rates(r.beams, cs);
    r.utility = utility_value(spec, r.rates);
  } else if (method == "sca") {
    ScaConfig sc;
    sc.stop_rel = cfg.stop_rel;
    sc.max_iters = cfg.max_iters;
    sc.seed = cfg.seed_base;
    ScaTrace t = run_sca(cs, spec, mrt_init(cs), sc);
    r.beams = std::move(t.beams);
    r.rates = std::move(t.rates);
    r.utility = t.utility;
  } else if (method == "dist") {
    DistConfig dc;
    dc.stop_rel = cfg.stop_rel;
    dc.max_rounds = cfg.max_rounds;
    dc.seed = cfg.seed_base;
    DistTrace t = run_distributed(cs, spec, mrt_init(cs), dc);
    r.beams = std::move(t.beams);
    r.rates = std::move(t.rates);
    r.utility = t.utility;
  } else if (method == "exhaustive") {
    r = exhaustive_search(cs, spec, cfg.M);
  } else {
    throw std::invalid_argument("unknown method " + method);
  }
  if (!std::isfinite(r.utility)) throw DomainError(method + " produced a non-finite utility");
  if (!solution_feasible(r.beams, r.rates, cs)) throw NumericFailure(method + " produced an infeasible solution");
  return r;
}

double pairwise_sum(const double* v, size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (size_t j = 0; j < n; ++j) s += v[j];
    return s;
  }
  const size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const UtilitySpec spec = make_spec(cfg);
  SweepResult out;
  for (double value : cfg.values) {
    ChannelSetOptions o;
    o.P = cfg.P;
    o.eps = cfg.eps;
    o.delta = cfg.delta;
    double eta = cfg.eta;
    double snr_db = cfg.snr_db;
    (cfg.axis == "eta" ? eta : snr_db) = value;
    o.sigma2 = std::pow(10.0, -snr_db / 10.0);

    std::vector<std::vector<double>> utilities(cfg.methods.size());
    std::vector<int> failures(cfg.methods.size(), 0);
    for (int s = 0; s < cfg.instances; ++s) {
      const ChannelSet cs = generate_channel_set(cfg.K, cfg.Nt, eta, cfg.rank, cfg.seed_base + static_cast<std::uint64_t>(s), o);
      for (size_t m = 0; m < cfg.methods.size(); ++m) {
        try {
          utilities[m].push_back(run_method(cfg.methods[m], cs, spec, cfg).utility);
        } catch (const std::runtime_error&) {
          ++failures[m];
        } catch (const std::domain_error&) {
          ++failures[m];
        }
      }
    }
    for (size_t m = 0; m < cfg.methods.size(); ++m) {
      const auto& u = utilities[m];
      SweepRow row;
      row.value = value;
      row.method = cfg.methods[m];
      row.n = static_cast<int>(u.size());
      row.failures = failures[m];
      if (!u.empty()) {
        row.mean = pairwise_sum(u.data(), u.size()) / static_cast<double>(u.size());
        if (u.size() > 1) {
          std::vector<double> dev(u.size());
          for (size_t j = 0; j < u.size(); ++j) dev[j] = (u[j] - row.mean) * (u[j] - row.mean);
          const double var = pairwise_sum(dev.data(), dev.size()) / static_cast<double>(u.size() - 1);
          row.stderr_ = std::sqrt(var / static_cast<double>(u.size()));
        }
      } else {
        row.mean = std::numeric_limits<double>::quiet_NaN();
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::string s = "sweep_value,method,mean_utility,stderr,n_instances,failures\n";
  char buf[256];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%s,%.10g,%.10g,%d,%d\n", row.value, row.method.c_str(), row.mean,
                  row.stderr_, row.n, row.failures);
    s += buf;
  }
  return s;
}

}  // namespace cbf
