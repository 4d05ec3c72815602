#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbf/approx.hpp"
#include "cbf/sca.hpp"

namespace cbf {

// One broadcast: the sender's log-interference row {xbar_ik}_k, -inf on silent links.
struct Message {
  int round = 0;
  int sender = 0;
  std::vector<double> payload;
};

// Error-free, zero-latency broadcast that delivers each message to every
// other node and keeps the full log.
class MessageBus {
 public:
  explicit MessageBus(int nodes) : nodes_(nodes) {}

  void publish(Message m);
  const std::vector<Message>& log() const { return log_; }
  // Real values delivered so far: payload length times K - 1 receivers.
  long long delivered_reals() const;

 private:
  int nodes_;
  std::vector<Message> log_;
};

// What transmitter i holds: its own CDI, its beamformer, and the latest row
// received from every peer with the round it was published in.
struct NodeState {
  LocalView view;
  CMatrix W;
  std::vector<double> table;   // K x K, row k as last published by node k
  std::vector<int> row_round;  // publication round of each row

  std::vector<double> own_row() const;
  void receive(const Message& m);
};

struct DistConfig {
  double stop_rel = 0.01;
  int max_rounds = 30;
  std::vector<int> order;  // node update order; empty means 0..K-1
  int randomization_count = 200;
  std::uint64_t seed = 0;
  SolverConfig solver;
  InteriorOptions interior;
};

struct DistRecord {
  int round = 0;
  int node = 0;
  double utility = 0.0;
  RateTuple rates;
  SolveStatus status = SolveStatus::kOptimal;
  double kkt = 0.0;
  bool failed = false;         // solve failed; previous row republished
  std::vector<int> rows_used;  // round of each table row the node read
};

struct DistTrace {
  std::vector<DistRecord> records;
  std::vector<double> round_utility;  // entry 0: initial point
  std::vector<Message> messages;
  int rounds = 0;
  bool converged = false;
  std::vector<CMatrix> W;
  std::vector<CMatrix> W_reduced;
  std::vector<RankReduction> ranks;
  BeamformerSet beams;
  RateTuple rates;
  double utility = 0.0;
  bool randomized = false;
  double kkt_exact = 0.0;
  long long simulated_overhead = 0;
};

// Gauss-Seidel rounds: every node in turn tightens the rates from the
// published table, solves its local program once, and broadcasts its new row.
// `truth` is used only to score and check the final point; each node reads
// nothing but its own view and the bus.
DistTrace run_distributed(const ChannelSet& truth, const std::vector<LocalView>& views,
                          const UtilitySpec& spec, const BeamformerSet& init,
                          const DistConfig& cfg = {});

DistTrace run_distributed(const ChannelSet& cs, const UtilitySpec& spec, const BeamformerSet& init,
                          const DistConfig& cfg = {});

// Tight rates implied by a published log-interference table.
RateTuple table_rates(const std::vector<double>& table, const std::vector<double>& sigma2,
                      const std::vector<double>& eps, int K);

enum class OverheadScheme { kAlg2, kCdiExchange, kControlCenter };

const char* to_string(OverheadScheme s);

// Real values exchanged: K^2 (K-1) N for the distributed algorithm,
// K^2 (K-1) Nt^2 for exchanging all covariances, K^2 Nt^2 + K (2 Nt + 1)
// through a control center.
long long overhead_count(int K, int Nt, int N, OverheadScheme scheme);

}  // namespace cbf
