#include <doctest.h>

#include <cmath>

#include "cbf/dist.hpp"
#include "cbf/outage.hpp"

using namespace cbf;

namespace {

ChannelSet instance(int K, int Nt, std::uint64_t seed, double snr_db = 10.0) {
  ChannelSetOptions o;
  o.sigma2 = std::pow(10.0, -snr_db / 10.0);
  return generate_channel_set(K, Nt, 0.4, 2, seed, o);
}

}  // namespace

TEST_CASE("overhead formulas") {
  CHECK(overhead_count(4, 8, 10, OverheadScheme::kAlg2) == 480);
  CHECK(overhead_count(4, 8, 10, OverheadScheme::kCdiExchange) == 3072);
  CHECK(overhead_count(4, 8, 10, OverheadScheme::kControlCenter) == 1092);
  CHECK(overhead_count(1, 4, 3, OverheadScheme::kAlg2) == 0);
}

TEST_CASE("single node reproduces the centralized run") {
  const auto cs = instance(1, 3, 1);
  const auto spec = UtilitySpec::uniform(1, 0.0);
  ScaConfig sc;
  sc.stop_rel = 1e-4;
  DistConfig dc;
  dc.stop_rel = 1e-4;
  const auto c = run_sca(cs, spec, mrt_init(cs), sc);
  const auto d = run_distributed(cs, spec, mrt_init(cs), dc);
  CHECK(d.utility == doctest::Approx(c.utility).epsilon(1e-8));
}

TEST_CASE("bus log, staleness and overhead") {
  const int K = 3;
  const auto cs = instance(K, 4, 2);
  DistConfig dc;
  dc.stop_rel = 1e-4;
  dc.max_rounds = 6;
  const auto d = run_distributed(cs, UtilitySpec::uniform(K, 1.0), mrt_init(cs), dc);
  REQUIRE(d.rounds >= 1);
  CHECK(d.messages.size() == static_cast<size_t>(K * (d.rounds + 1)));
  for (int n = 0; n <= d.rounds; ++n) {
    int count = 0;
    for (const auto& m : d.messages) {
      if (m.round != n) continue;
      ++count;
      CHECK(m.payload.size() == static_cast<size_t>(K));
    }
    CHECK(count == K);
  }
  CHECK(d.simulated_overhead == overhead_count(K, 4, d.rounds + 1, OverheadScheme::kAlg2));

  for (const auto& r : d.records) {
    for (int k = 0; k < K; ++k) {
      if (k == r.node) continue;
      const int expected = k < r.node ? r.round : r.round - 1;
      CHECK(r.rows_used[static_cast<size_t>(k)] == expected);
    }
  }
  // The same fact read from the log: the latest message of a peer before the
  // node's own broadcast in that round.
  for (size_t j = 0; j < d.messages.size(); ++j) {
    const auto& m = d.messages[j];
    if (m.round == 0) continue;
    for (int k = 0; k < K; ++k) {
      if (k == m.sender) continue;
      int latest = -1;
      for (size_t p = 0; p < j; ++p) {
        if (d.messages[p].sender == k) latest = d.messages[p].round;
      }
      CHECK(latest == (k < m.sender ? m.round : m.round - 1));
    }
  }
}

TEST_CASE("utility is nondecreasing over every node update") {
  for (int s = 0; s < 4; ++s) {
    const auto cs = instance(3, 2 + 2 * (s % 2), 10 + s, 10.0 * (s % 3));
    const auto spec = UtilitySpec::uniform(3, static_cast<double>(s % 3));
    DistConfig dc;
    dc.stop_rel = 1e-4;
    const auto d = run_distributed(cs, spec, mrt_init(cs), dc);
    double prev = d.round_utility.front();
    for (const auto& r : d.records) {
      CHECK(r.utility >= prev - 1e-8);
      prev = r.utility;
    }
    for (int i = 0; i < 3; ++i) {
      CHECK(d.beams.power(i) <= cs.P[static_cast<size_t>(i)] + 1e-9);
      CHECK(closed_form_outage(d.beams, d.rates[static_cast<size_t>(i)], i, cs) <= cs.eps[static_cast<size_t>(i)] + 1e-6);
    }
  }
}

TEST_CASE("nodes never read foreign covariances") {
  const auto cs = instance(3, 2, 20);
  std::vector<LocalView> views;
  for (int i = 0; i < 3; ++i) {
    ChannelSet poisoned = cs;
    for (int k = 0; k < 3; ++k) {
      if (k == i) continue;
      for (int j = 0; j < 3; ++j) poisoned.q(k, j) = 3.0 * CMatrix::Identity(2, 2);
    }
    views.push_back(LocalView::from_channel_set(poisoned, i));
  }
  const auto spec = UtilitySpec::uniform(3, 0.0);
  const auto clean = run_distributed(cs, spec, mrt_init(cs));
  const auto dirty = run_distributed(cs, views, spec, mrt_init(cs));
  REQUIRE(clean.records.size() == dirty.records.size());
  for (size_t j = 0; j < clean.records.size(); ++j) CHECK(clean.records[j].utility == dirty.records[j].utility);
  CHECK(clean.utility == dirty.utility);
}

TEST_CASE("converged nodes agree and the point is stationary") {
  const auto cs = instance(3, 2, 30);
  const auto spec = UtilitySpec::uniform(3, 0.0);
  DistConfig dc;
  dc.stop_rel = 1e-12;
  dc.max_rounds = 60;
  const auto d = run_distributed(cs, spec, mrt_init(cs), dc);
  const size_t n = d.records.size();
  REQUIRE(n >= 3);
  for (size_t j = n - 3; j < n; ++j) CHECK(d.records[j].utility == doctest::Approx(d.records[n - 1].utility).epsilon(1e-6));
  CHECK(d.kkt_exact <= 1e-4);
}

TEST_CASE("node order is configurable") {
  const auto cs = instance(3, 2, 40);
  DistConfig dc;
  dc.order = {2, 0, 1};
  const auto d = run_distributed(cs, UtilitySpec::uniform(3, 0.0), mrt_init(cs), dc);
  CHECK(d.records.front().node == 2);
  dc.order = {0, 0, 1};
  CHECK_THROWS_AS(run_distributed(cs, UtilitySpec::uniform(3, 0.0), mrt_init(cs), dc), std::invalid_argument);
}
