#include "cbf/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cbf/errors.hpp"
#include "cbf/outage.hpp"

namespace cbf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<CMatrix> local_maps(const LocalView& v) {
  std::vector<CMatrix> maps{CMatrix::Identity(v.Nt, v.Nt)};
  for (int k = 0; k < v.K; ++k) {
    const CMatrix& q = v.Q_out[static_cast<size_t>(k)];
    if (k != v.i && q.cwiseAbs().maxCoeff() != 0.0) maps.push_back(q);
  }
  return maps;
}

}  // namespace

void MessageBus::publish(Message m) {
  if (static_cast<int>(m.payload.size()) != nodes_) {
    throw std::invalid_argument("message payload must hold one value per node");
  }
  log_.push_back(std::move(m));
}

long long MessageBus::delivered_reals() const {
  long long n = 0;
  for (const auto& m : log_) n += static_cast<long long>(m.payload.size()) * (nodes_ - 1);
  return n;
}

std::vector<double> NodeState::own_row() const {
  std::vector<double> row(static_cast<size_t>(view.K), kNegInf);
  for (int k = 0; k < view.K; ++k) {
    const CMatrix& q = view.Q_out[static_cast<size_t>(k)];
    if (q.cwiseAbs().maxCoeff() == 0.0) continue;
    row[static_cast<size_t>(k)] = std::log(trace_product(W, q));
  }
  return row;
}

void NodeState::receive(const Message& m) {
  const int K = view.K;
  for (int k = 0; k < K; ++k) table[static_cast<size_t>(m.sender * K + k)] = m.payload[static_cast<size_t>(k)];
  row_round[static_cast<size_t>(m.sender)] = m.round;
}

RateTuple table_rates(const std::vector<double>& table, const std::vector<double>& sigma2,
                      const std::vector<double>& eps, int K) {
  RateTuple r(static_cast<size_t>(K));
  for (int j = 0; j < K; ++j) {
    LinkPowers p;
    p.signal = std::exp(table[static_cast<size_t>(j * K + j)]);
    for (int k = 0; k < K; ++k) {
      const double x = table[static_cast<size_t>(k * K + j)];
      if (k != j && std::isfinite(x)) p.interference.push_back(std::exp(x));
    }
    r[static_cast<size_t>(j)] = tight_rate(1.0 - eps[static_cast<size_t>(j)], sigma2[static_cast<size_t>(j)], p);
  }
  return r;
}

DistTrace run_distributed(const ChannelSet& truth, const std::vector<LocalView>& views,
                          const UtilitySpec& spec, const BeamformerSet& init, const DistConfig& cfg) {
  const int K = truth.K;
  if (static_cast<int>(views.size()) != K) throw std::invalid_argument("one view per node required");
  std::vector<int> order = cfg.order;
  if (order.empty()) {
    order.resize(static_cast<size_t>(K));
    std::iota(order.begin(), order.end(), 0);
  }
  {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < K; ++k) {
      if (sorted.size() != static_cast<size_t>(K) || sorted[static_cast<size_t>(k)] != k) {
        throw std::invalid_argument("order must be a permutation of the nodes");
      }
    }
  }

  MessageBus bus(K);
  std::vector<NodeState> nodes(static_cast<size_t>(K));
  for (int i = 0; i < K; ++i) {
    auto& nd = nodes[static_cast<size_t>(i)];
    nd.view = views[static_cast<size_t>(i)];
    nd.W = init.matrix(i);
    nd.table.assign(static_cast<size_t>(K * K), kNegInf);
    nd.row_round.assign(static_cast<size_t>(K), -1);
  }
  auto broadcast = [&](const Message& m) {
    bus.publish(m);
    for (auto& nd : nodes) nd.receive(m);
  };
  for (int i = 0; i < K; ++i) broadcast({0, i, nodes[static_cast<size_t>(i)].own_row()});

  DistTrace trace;
  const auto& t0 = nodes.front().table;
  double U_round = utility_value(spec, table_rates(t0, truth.sigma2, truth.eps, K));
  trace.round_utility.push_back(U_round);
  double U_last = U_round;

  for (int n = 1; n <= cfg.max_rounds; ++n) {
    for (int i : order) {
      auto& nd = nodes[static_cast<size_t>(i)];
      const LocalView& v = nd.view;
      DistRecord rec;
      rec.round = n;
      rec.node = i;
      rec.rows_used = nd.row_round;

      const RateTuple Rt = table_rates(nd.table, v.sigma2, v.eps, K);
      std::vector<double> ybar(static_cast<size_t>(K));
      for (int j = 0; j < K; ++j) ybar[static_cast<size_t>(j)] = std::log(std::expm1(Rt[static_cast<size_t>(j)] * std::log(2.0)));

      CMatrix W_prev = nd.W;
      try {
        const Subproblem sp = build_local_subproblem(v, nd.table, ybar, spec);
        std::vector<CMatrix> Ws(static_cast<size_t>(K));
        Ws[static_cast<size_t>(i)] = nd.W;
        const Vector start = anchor_point(sp, Ws, Rt, nd.table, ybar);
        const InteriorPoint ip = feasible_interior_point(sp, start, v.P, cfg.interior);
        const Solution sol = solve_barrier(sp.program, ip.point, cfg.solver);
        rec.status = sol.status;
        rec.kkt = sol.kkt_residual;
        if (sol.status == SolveStatus::kInfeasibleStart) {
          rec.failed = true;
        } else {
          nd.W = hermitize(sp.program.blocks.front().matrix(sol.x));
        }
      } catch (const std::runtime_error&) {
        rec.failed = true;
      }

      std::vector<double> table = nd.table;
      std::vector<double> row = nd.own_row();
      for (int k = 0; k < K; ++k) table[static_cast<size_t>(i * K + k)] = row[static_cast<size_t>(k)];
      RateTuple r = table_rates(table, v.sigma2, v.eps, K);
      double u = utility_value(spec, r);
      if (!rec.failed && u < U_last - 1e-12) {
        // An inaccurate solve lost utility; keep the previous beamformer.
        rec.failed = true;
      }
      if (rec.failed) {
        nd.W = W_prev;
        row = nd.own_row();
        for (int k = 0; k < K; ++k) table[static_cast<size_t>(i * K + k)] = row[static_cast<size_t>(k)];
        r = table_rates(table, v.sigma2, v.eps, K);
        u = utility_value(spec, r);
      }
      broadcast({n, i, row});
      rec.utility = u;
      rec.rates = r;
      U_last = u;
      if (cfg.solver.verbosity >= 1 && cfg.solver.log != nullptr) {
        *cfg.solver.log << "round " << n << " node " << i << " utility=" << u
                        << (rec.failed ? " (kept previous)" : "") << '\n';
      }
      trace.records.push_back(std::move(rec));
    }
    trace.rounds = n;
    trace.round_utility.push_back(U_last);
    const double improvement = (U_last - U_round) / std::max(std::abs(U_round), 1e-300);
    U_round = U_last;
    if (improvement < cfg.stop_rel) {
      trace.converged = true;
      break;
    }
  }

  trace.messages = bus.log();
  trace.simulated_overhead = bus.delivered_reals();
  for (const auto& nd : nodes) trace.W.push_back(nd.W);
  trace.kkt_exact = stationarity_at(truth, spec, trace.W);

  bool all_rank_one = true;
  for (int i = 0; i < K; ++i) {
    const auto& nd = nodes[static_cast<size_t>(i)];
    RankReduction rr = rank_reduce(nd.W, nd.view.Q_out[static_cast<size_t>(i)], local_maps(nd.view));
    all_rank_one = all_rank_one && rr.rank_after <= 1;
    trace.W_reduced.push_back(rr.W);
    trace.ranks.push_back(std::move(rr));
  }
  if (all_rank_one) {
    trace.beams = principal_vectors(trace.W_reduced);
    trace.rates = tighten_rates(trace.beams, truth);
    trace.utility = utility_value(spec, trace.rates);
  } else {
    Randomized r = gaussian_randomize(trace.W_reduced, truth, spec, cfg.randomization_count, cfg.seed);
    trace.beams = std::move(r.bf);
    trace.rates = std::move(r.rates);
    trace.utility = r.utility;
    trace.randomized = true;
  }
  return trace;
}

DistTrace run_distributed(const ChannelSet& cs, const UtilitySpec& spec, const BeamformerSet& init,
                          const DistConfig& cfg) {
  std::vector<LocalView> views;
  for (int i = 0; i < cs.K; ++i) views.push_back(LocalView::from_channel_set(cs, i));
  return run_distributed(cs, views, spec, init, cfg);
}

const char* to_string(OverheadScheme s) {
  switch (s) {
    case OverheadScheme::kAlg2:
      return "alg2";
    case OverheadScheme::kCdiExchange:
      return "cdi-exchange";
    case OverheadScheme::kControlCenter:
      return "control-center";
  }
  return "unknown";
}

long long overhead_count(int K, int Nt, int N, OverheadScheme scheme) {
  if (K < 1 || Nt < 1 || N < 0) throw std::invalid_argument("overhead arguments must be positive");
  const long long k = K;
  const long long nt = Nt;
  switch (scheme) {
    case OverheadScheme::kAlg2:
      return k * k * (k - 1) * N;
    case OverheadScheme::kCdiExchange:
      return k * k * (k - 1) * nt * nt;
    case OverheadScheme::kControlCenter:
      return k * k * nt * nt + k * (2 * nt + 1);
  }
  return 0;
}

}  // namespace cbf
