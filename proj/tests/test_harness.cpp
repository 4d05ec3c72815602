#include <doctest.h>

#include <cmath>

#include "cbf/harness.hpp"
#include "cbf/outage.hpp"
#include "cbf/sca.hpp"

using namespace cbf;

namespace {

ChannelSet instance(int K, int Nt, std::uint64_t seed, double snr_db = 10.0, double eta = 0.5) {
  ChannelSetOptions o;
  o.sigma2 = std::pow(10.0, -snr_db / 10.0);
  return generate_channel_set(K, Nt, eta, Nt == 1 ? 1 : 2, seed, o);
}

}  // namespace

TEST_CASE("cap grids nest under doubling") {
  const auto a = interference_caps(1e-5, 0.7, 32);
  const auto b = interference_caps(1e-5, 0.7, 64);
  REQUIRE(a.size() == 33);
  CHECK(a.front() == 1e-5);
  CHECK(a.back() == 0.7);
  for (size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[2 * j]);
  for (size_t j = 1; j < b.size(); ++j) CHECK(b[j] > b[j - 1]);
}

TEST_CASE("cap problem meets its constraints and is tight") {
  const auto cs = instance(2, 3, 5);
  const double cap = 0.01;
  const CMatrix W = solve_cap_problem(cs.q(0, 0), cs.q(0, 1), cap, 1.0);
  CHECK(trace_product(W, cs.q(0, 1)) <= cap + 1e-7);
  CHECK(W.trace().real() <= 1.0 + 1e-7);
  CHECK(lambda_min(W) >= -1e-9);
  // Loosening the cap cannot lower the signal.
  const CMatrix W2 = solve_cap_problem(cs.q(0, 0), cs.q(0, 1), 2 * cap, 1.0);
  CHECK(trace_product(W2, cs.q(0, 0)) >= trace_product(W, cs.q(0, 0)) - 1e-7);
}

TEST_CASE("exhaustive search is monotone in nested doublings") {
  for (int s = 0; s < 3; ++s) {
    const auto cs = instance(2, 2, 40 + s, 10.0 * s);
    const auto spec = UtilitySpec::uniform(2, 0.0);
    const double u32 = exhaustive_search(cs, spec, 32).utility;
    const double u64 = exhaustive_search(cs, spec, 64).utility;
    CHECK(u32 <= u64 + 1e-9);
  }
  CHECK_THROWS_AS(exhaustive_search(instance(3, 2, 1), UtilitySpec::uniform(3, 0.0), 8), std::invalid_argument);
}

TEST_CASE("single-antenna exhaustive search matches the power grid") {
  for (int s = 0; s < 6; ++s) {
    const auto cs = instance(2, 1, 60 + s, 10.0 + 5.0 * (s % 3), s < 3 ? 0.5 : 1.0);
    const auto spec = UtilitySpec::uniform(2, 1.0 + (s % 2));
    const double ex = exhaustive_search(cs, spec, 64).utility;
    const double orc = power_grid_oracle(cs, spec, 200).utility;
    CHECK(std::abs(ex - orc) <= 1e-4 * std::abs(orc));
  }
  // At beta = 0 the best grid point may switch a user off, which the leakage
  // floor forbids; the floor then costs a little.
  for (int s = 0; s < 3; ++s) {
    const auto cs = instance(2, 1, 70 + s, 20.0);
    const auto spec = UtilitySpec::uniform(2, 0.0);
    const double ex = exhaustive_search(cs, spec, 64).utility;
    const double orc = power_grid_oracle(cs, spec, 200).utility;
    CHECK(ex <= orc + 1e-9);
    CHECK(ex >= orc * (1.0 - 1e-2));
  }
}

TEST_CASE("power grid oracle") {
  SUBCASE("no cross links: full power and single-user rates") {
    auto cs = instance(2, 1, 70);
    cs.q(0, 1).setZero();
    cs.q(1, 0).setZero();
    const auto r = power_grid_oracle(cs, UtilitySpec::uniform(2, 1.0), 50);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::norm(r.beams.w[static_cast<size_t>(i)][0]) == doctest::Approx(1.0));
      const double s = cs.q(i, i)(0, 0).real();
      const double expect = std::log2(1.0 + s * std::log(1.0 / cs.rho(i)) / cs.sigma2[static_cast<size_t>(i)]);
      CHECK(r.rates[static_cast<size_t>(i)] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  SUBCASE("refining the grid barely moves the optimum") {
    for (int s = 0; s < 5; ++s) {
      const auto cs = instance(2, 1, 80 + s, 10.0);
      const auto spec = UtilitySpec::uniform(2, static_cast<double>(s % 3));
      const double coarse = power_grid_oracle(cs, spec, 100).utility;
      const double fine = power_grid_oracle(cs, spec, 200).utility;
      CHECK(std::abs(fine - coarse) <= 0.005 * std::abs(fine));
    }
  }
  SUBCASE("emitted point is feasible and consistent") {
    const auto cs = instance(3, 1, 90);
    const auto spec = UtilitySpec::uniform(3, 0.0);
    const auto r = power_grid_oracle(cs, spec, 20);
    CHECK(solution_feasible(r.beams, r.rates, cs));
    for (int i = 0; i < 3; ++i) {
      LinkPowers lp = link_powers(r.beams, i, cs);
      if (lp.signal == 0.0) {
        CHECK(r.rates[static_cast<size_t>(i)] == 0.0);
        continue;
      }
      CHECK(tight_rate(cs.rho(i), cs.sigma2[static_cast<size_t>(i)], lp) ==
            doctest::Approx(r.rates[static_cast<size_t>(i)]));
    }
  }
  CHECK_THROWS_AS(power_grid_oracle(instance(2, 2, 1), UtilitySpec::uniform(2, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(power_grid_oracle(instance(4, 1, 1), UtilitySpec::uniform(4, 0.0), 3), std::invalid_argument);
}

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000);
  for (size_t j = 0; j < v.size(); ++j) v[j] = static_cast<double>(j);
  CHECK(pairwise_sum(v.data(), v.size()) == 499500.0);
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
}

TEST_CASE("sweep with MRT only reproduces the tightened MRT utility") {
  ExperimentConfig cfg;
  cfg.K = 1;
  cfg.Nt = 3;
  cfg.instances = 4;
  cfg.seed_base = 100;
  cfg.values = {0.0, 10.0};
  cfg.methods = {"mrt"};
  const auto r = run_sweep(cfg);
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    ChannelSetOptions o;
    o.sigma2 = std::pow(10.0, -row.value / 10.0);
    std::vector<double> u;
    for (int s = 0; s < 4; ++s) {
      const auto cs = generate_channel_set(1, 3, cfg.eta, cfg.rank, 100 + s, o);
      u.push_back(utility_value(UtilitySpec::uniform(1, 0.0), tighten_rates(mrt_init(cs), cs)));
    }
    CHECK(row.mean == pairwise_sum(u.data(), u.size()) / 4.0);
    CHECK(row.n == 4);
    CHECK(row.failures == 0);
  }
}

TEST_CASE("sweep output format and determinism") {
  ExperimentConfig cfg;
  cfg.K = 2;
  cfg.Nt = 2;
  cfg.instances = 3;
  cfg.values = {0.0, 10.0, 20.0};
  cfg.methods = {"sca", "mrt", "zf"};
  const auto a = run_sweep(cfg);
  const std::string csv = sweep_csv(a);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 3 * 3 + 1);
  CHECK(csv.rfind("sweep_value,method,mean_utility,stderr,n_instances,failures\n", 0) == 0);
  CHECK(sweep_csv(run_sweep(cfg)) == csv);
  for (const auto& row : a.rows) CHECK(row.n + row.failures == 3);

  const std::string svg = sweep_svg(a, cfg);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("3 instances per point") != std::string::npos);
}

TEST_CASE("experiment config parsing") {
  const auto c = experiment_from_json(R"({"instances": 5, "axis": "eta", "values": [0.2, 0.6],
                                          "methods": ["mrt", "exhaustive"], "K": 2, "M": 8})");
  CHECK(c.instances == 5);
  CHECK(c.axis == "eta");
  CHECK(c.M == 8);
  CHECK_THROWS_AS(experiment_from_json(R"({"K": 3, "methods": ["exhaustive"]})"), std::invalid_argument);
  CHECK_THROWS_AS(experiment_from_json(R"({"methods": ["magic"]})"), std::invalid_argument);
  CHECK_THROWS_AS(experiment_from_json(R"({"axis": "power"})"), std::invalid_argument);
  CHECK_THROWS_AS(experiment_from_json("{"), std::invalid_argument);
}
