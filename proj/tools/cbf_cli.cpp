// Command-line front end: instance generation, solving, validation, baselines
// and sweeps. Node, user and sender indices in every output are 1-based.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbf/dist.hpp"
#include "cbf/errors.hpp"
#include "cbf/harness.hpp"
#include "cbf/io.hpp"
#include "cbf/outage.hpp"
#include "cbf/sca.hpp"
#include "cbf/simd/kernels.hpp"

using namespace cbf;

namespace {

struct Common {
  std::string channels;
  double beta = 0.0;
  std::vector<double> alpha;
  std::string init = "mrt";
  double stop_rel = 0.01;
  int max_iters = 50;
  std::uint64_t seed = 0;
  double solver_tol = 1e-10;
  int solver_max_centerings = 60;
  std::string out;
  std::string trace;
};

int verbosity = 0;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void add_problem_options(CLI::App* app, Common& c) {
  app->add_option("channels", c.channels, "channel set JSON written by gen")->required()->check(CLI::ExistingFile);
  app->add_option("--beta", c.beta, "fairness parameter (0 sum rate, 1 proportional, 2 harmonic)")->check(CLI::NonNegativeNumber);
  app->add_option("--alpha", c.alpha, "user weights a1,a2,... summing to 1")->delimiter(',');
  app->add_option("--init", c.init, "initial beamformers")->check(CLI::IsMember({"mrt", "zf"}));
  app->add_option("--stop-rel", c.stop_rel, "relative utility improvement that ends the run");
  app->add_option("--seed", c.seed, "randomization seed");
  app->add_option("--solver-tol", c.solver_tol, "KKT tolerance of the barrier solver");
  app->add_option("--solver-max-centerings", c.solver_max_centerings, "outer barrier iterations");
  app->add_option("-o,--out", c.out, "solution JSON");
}

UtilitySpec make_spec(const Common& c, int K) {
  UtilitySpec spec = UtilitySpec::uniform(K, c.beta);
  if (!c.alpha.empty()) spec.alpha = c.alpha;
  spec.validate(K);
  return spec;
}

SolverConfig make_solver(const Common& c) {
  SolverConfig s;
  s.kkt_tol = c.solver_tol;
  s.max_centerings = c.solver_max_centerings;
  s.verbosity = verbosity;
  s.log = &std::cerr;
  return s;
}

BeamformerSet make_init(const Common& c, const ChannelSet& cs) {
  if (c.init == "zf") {
    auto zf = zf_init(cs);
    if (!zf) throw std::runtime_error("zero-forcing initialization is unavailable for this instance");
    return *zf;
  }
  return mrt_init(cs);
}

json solution_json(const BeamformerSet& bf, const RateTuple& R, const ChannelSet& cs, const UtilitySpec& spec) {
  json j = to_json(bf);
  j["R"] = R;
  std::vector<double> outage;
  for (int i = 0; i < cs.K; ++i) {
    // A silent user carries rate 0, which never outages.
    const double r = R[static_cast<size_t>(i)];
    outage.push_back(r > 0.0 ? closed_form_outage(bf, r, i, cs) : 0.0);
  }
  j["outage"] = outage;
  j["utility"] = utility_value(spec, R);
  j["beta"] = spec.beta;
  j["alpha"] = spec.alpha;
  std::vector<double> power;
  for (int i = 0; i < cs.K; ++i) power.push_back(bf.power(i));
  j["power"] = power;
  return j;
}

void write_solution(const std::string& path, const json& j) {
  if (path.empty()) {
    std::cout << j.dump(1) << '\n';
  } else {
    write_text_file(path, j.dump(1) + "\n");
  }
}

std::string rate_header(int K) {
  std::string s;
  for (int i = 1; i <= K; ++i) s += ",R_" + std::to_string(i);
  return s;
}

std::string rate_cells(const RateTuple& R) {
  std::string s;
  for (double r : R) s += "," + num(r);
  return s;
}

int cmd_gen(int K, int Nt, double eta, int rank, std::uint64_t seed, double snr_db, double P, double eps,
            double delta, const std::string& out) {
  ChannelSetOptions o;
  o.sigma2 = std::pow(10.0, -snr_db / 10.0);
  o.P = P;
  o.eps = eps;
  o.delta = delta;
  const ChannelSet cs = generate_channel_set(K, Nt, eta, rank, seed, o);
  if (out.empty()) {
    std::cout << to_json(cs).dump(1) << '\n';
  } else {
    save_channel_set(cs, out);
  }
  return 0;
}

int cmd_validate(const std::string& channels, const std::string& beams, int n, std::uint64_t seed) {
  const ChannelSet cs = load_channel_set(channels);
  const json j = read_json_file(beams);
  const BeamformerSet bf = beamformers_from_json(j, cs.K, cs.Nt);
  if (bf.form != BeamformerSet::Form::kVectors) throw std::invalid_argument("validate needs vector beamformers (\"w\")");
  RateTuple R = j.contains("R") ? j.at("R").get<RateTuple>() : tighten_rates(bf, cs);
  if (static_cast<int>(R.size()) != cs.K) throw std::invalid_argument("R must have K entries");
  const auto emp = empirical_outage(bf, R, cs, n, seed);
  std::cout << "user,closed,empirical,gap,n,seed\n";
  for (int i = 0; i < cs.K; ++i) {
    const double r = R[static_cast<size_t>(i)];
    const double closed = r > 0.0 ? closed_form_outage(bf, r, i, cs) : 0.0;
    const double e = emp[static_cast<size_t>(i)];
    std::cout << i + 1 << ',' << num(closed) << ',' << num(e) << ',' << num(std::abs(closed - e)) << ',' << n << ','
              << seed << '\n';
  }
  return 0;
}

int cmd_solve(const Common& c) {
  const ChannelSet cs = load_channel_set(c.channels);
  const UtilitySpec spec = make_spec(c, cs.K);
  ScaConfig cfg;
  cfg.stop_rel = c.stop_rel;
  cfg.max_iters = c.max_iters;
  cfg.seed = c.seed;
  cfg.solver = make_solver(c);
  const ScaTrace t = run_sca(cs, spec, make_init(c, cs), cfg);

  const std::string instance = std::filesystem::path(c.channels).stem().string();
  std::ostringstream csv;
  csv << "instance,iter,utility" << rate_header(cs.K) << ",anchor_gap_x,anchor_gap_y,kkt\n";
  for (const auto& it : t.iterations) {
    csv << instance << ',' << it.n << ',' << num(it.utility) << rate_cells(it.rates) << ',' << num(it.gap_x) << ','
        << num(it.gap_y) << ',' << (it.n == 0 ? std::string() : num(it.kkt)) << '\n';
  }
  if (c.trace.empty()) {
    std::cerr << csv.str();
  } else {
    write_text_file(c.trace, csv.str());
  }
  json sol = solution_json(t.beams, t.rates, cs, spec);
  sol["iterations"] = static_cast<int>(t.iterations.size()) - 1;
  sol["converged"] = t.converged;
  sol["randomized"] = t.randomized;
  sol["kkt_exact"] = t.kkt_exact;
  write_solution(c.out, sol);
  if (verbosity >= 1) {
    std::cerr << "utility " << num(t.utility) << " after " << t.iterations.size() - 1 << " iterations"
              << (t.converged ? "" : " (iteration cap)") << '\n';
  }
  return 0;
}

int cmd_solve_dist(const Common& c, int max_rounds, const std::vector<int>& order, const std::string& messages,
                   const std::string& overhead_path) {
  const ChannelSet cs = load_channel_set(c.channels);
  const UtilitySpec spec = make_spec(c, cs.K);
  DistConfig cfg;
  cfg.stop_rel = c.stop_rel;
  cfg.max_rounds = max_rounds;
  cfg.seed = c.seed;
  cfg.solver = make_solver(c);
  for (int o : order) cfg.order.push_back(o - 1);
  const DistTrace t = run_distributed(cs, spec, make_init(c, cs), cfg);

  std::ostringstream csv;
  csv << "round,node,utility" << rate_header(cs.K) << ",failed\n";
  for (const auto& r : t.records) {
    csv << r.round << ',' << r.node + 1 << ',' << num(r.utility) << rate_cells(r.rates) << ',' << (r.failed ? 1 : 0)
        << '\n';
  }
  if (c.trace.empty()) {
    std::cerr << csv.str();
  } else {
    write_text_file(c.trace, csv.str());
  }

  if (!messages.empty()) {
    std::ostringstream log;
    log << "round,sender";
    for (int k = 1; k <= cs.K; ++k) log << ",x_" << k;
    log << '\n';
    for (const auto& m : t.messages) {
      log << m.round << ',' << m.sender + 1;
      for (double v : m.payload) log << ',' << num(v);
      log << '\n';
    }
    write_text_file(messages, log.str());
  }

  const int N = t.rounds + 1;
  std::ostringstream ov;
  ov << "scheme,simulated,formula\n";
  ov << "alg2," << t.simulated_overhead << ',' << overhead_count(cs.K, cs.Nt, N, OverheadScheme::kAlg2) << '\n';
  ov << "cdi-exchange,," << overhead_count(cs.K, cs.Nt, N, OverheadScheme::kCdiExchange) << '\n';
  ov << "control-center,," << overhead_count(cs.K, cs.Nt, N, OverheadScheme::kControlCenter) << '\n';
  if (overhead_path.empty()) {
    std::cerr << ov.str();
  } else {
    write_text_file(overhead_path, ov.str());
  }

  json sol = solution_json(t.beams, t.rates, cs, spec);
  sol["rounds"] = t.rounds;
  sol["converged"] = t.converged;
  sol["randomized"] = t.randomized;
  sol["kkt_exact"] = t.kkt_exact;
  write_solution(c.out, sol);
  return 0;
}

int cmd_baseline(const Common& c, const std::string& method, int M, int grid) {
  const ChannelSet cs = load_channel_set(c.channels);
  const UtilitySpec spec = make_spec(c, cs.K);
  BaselineResult r;
  if (method == "oracle") {
    r = power_grid_oracle(cs, spec, grid);
  } else {
    ExperimentConfig cfg;
    cfg.K = cs.K;
    cfg.M = M;
    r = run_method(method, cs, spec, cfg);
  }
  json sol = solution_json(r.beams, r.rates, cs, spec);
  sol["method"] = method;
  write_solution(c.out, sol);
  return 0;
}

int cmd_sweep(const std::string& config) {
  std::ifstream in(config);
  if (!in) throw std::runtime_error("cannot open " + config);
  std::stringstream text;
  text << in.rdbuf();
  const ExperimentConfig cfg = experiment_from_json(text.str());
  const SweepResult r = run_sweep(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const auto dir = std::filesystem::path(cfg.output_dir);
  write_text_file((dir / "sweep.csv").string(), sweep_csv(r));
  write_text_file((dir / "sweep.svg").string(), sweep_svg(r, cfg));
  std::cout << sweep_csv(r);
  return 0;
}

int cmd_overhead(const std::vector<int>& Ks, const std::vector<int>& Nts, const std::vector<int>& Ns) {
  std::printf("%4s %4s %4s %12s %14s %16s\n", "K", "Nt", "N", "alg2", "cdi-exchange", "control-center");
  for (int K : Ks) {
    for (int Nt : Nts) {
      for (int N : Ns) {
        std::printf("%4d %4d %4d %12lld %14lld %16lld\n", K, Nt, N, overhead_count(K, Nt, N, OverheadScheme::kAlg2),
                    overhead_count(K, Nt, N, OverheadScheme::kCdiExchange),
                    overhead_count(K, Nt, N, OverheadScheme::kControlCenter));
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outage-constrained coordinated beamforming for the MISO interference channel"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", verbosity, "more output; -vv adds the barrier solver trace");

  int K = 2, Nt = 2, rank = 2;
  double eta = 0.5, snr_db = 10.0, P = 1.0, eps = 0.1, delta = 1e-5;
  std::uint64_t seed = 0;
  std::string out;
  auto* gen = app.add_subcommand("gen", "generate a random channel set");
  gen->add_option("--K", K, "transmitter-receiver pairs")->check(CLI::PositiveNumber);
  gen->add_option("--Nt", Nt, "transmit antennas")->check(CLI::PositiveNumber);
  gen->add_option("--eta", eta, "largest eigenvalue of cross-link covariances");
  gen->add_option("--rank", rank, "covariance rank");
  gen->add_option("--seed", seed);
  gen->add_option("--snr-db", snr_db, "1/sigma^2 in dB");
  gen->add_option("--P", P, "power budget");
  gen->add_option("--eps", eps, "outage tolerance");
  gen->add_option("--delta", delta, "interference floor");
  gen->add_option("-o,--out", out, "output JSON (stdout if omitted)");

  std::string vchannels, vbeams;
  int vn = 200000;
  std::uint64_t vseed = 1;
  auto* validate = app.add_subcommand("validate", "closed-form vs Monte-Carlo outage of a solution");
  validate->add_option("channels", vchannels)->required()->check(CLI::ExistingFile);
  validate->add_option("beams", vbeams, "solution or beamformer JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("-n,--samples", vn, "channel draws")->check(CLI::PositiveNumber);
  validate->add_option("--seed", vseed);

  Common sc;
  auto* solve = app.add_subcommand("solve", "centralized successive convex approximation");
  add_problem_options(solve, sc);
  solve->add_option("--max-iters", sc.max_iters);
  solve->add_option("--trace", sc.trace, "iteration CSV (stderr if omitted)");

  Common dc;
  int max_rounds = 30;
  std::vector<int> order;
  std::string messages, overhead_out;
  auto* dist = app.add_subcommand("solve-dist", "distributed round-robin solver over a simulated bus");
  add_problem_options(dist, dc);
  dist->add_option("--max-rounds", max_rounds);
  dist->add_option("--order", order, "node update order, e.g. 3,1,2")->delimiter(',');
  dist->add_option("--trace", dc.trace, "per-update CSV (stderr if omitted)");
  dist->add_option("--messages", messages, "message log CSV");
  dist->add_option("--overhead", overhead_out, "overhead summary CSV (stderr if omitted)");

  std::string config;
  auto* sweep = app.add_subcommand("sweep", "run an experiment sweep");
  sweep->add_option("--config", config)->required()->check(CLI::ExistingFile);

  Common bc;
  std::string method = "mrt";
  int M = 32, grid = 200;
  auto* baseline = app.add_subcommand("baseline", "reference solutions");
  baseline->add_option("channels", bc.channels)->required()->check(CLI::ExistingFile);
  baseline->add_option("--method", method)->check(CLI::IsMember({"mrt", "zf", "exhaustive", "oracle"}));
  baseline->add_option("--beta", bc.beta)->check(CLI::NonNegativeNumber);
  baseline->add_option("--alpha", bc.alpha)->delimiter(',');
  baseline->add_option("--M", M, "cap levels per link for exhaustive search");
  baseline->add_option("--grid", grid, "power levels per user for the oracle");
  baseline->add_option("-o,--out", bc.out);

  std::vector<int> oK{2, 3, 4}, oNt{2, 4, 8}, oN{5, 10, 15};
  auto* overhead = app.add_subcommand("overhead", "signaling overhead of the three exchange schemes");
  overhead->add_option("--K", oK)->delimiter(',');
  overhead->add_option("--Nt", oNt)->delimiter(',');
  overhead->add_option("--N", oN, "rounds")->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  if (verbosity >= 1) std::cerr << "simd backend: " << simd::backend_name(simd::active_backend()) << '\n';

  try {
    if (*gen) return cmd_gen(K, Nt, eta, rank, seed, snr_db, P, eps, delta, out);
    if (*validate) return cmd_validate(vchannels, vbeams, vn, vseed);
    if (*solve) return cmd_solve(sc);
    if (*dist) return cmd_solve_dist(dc, max_rounds, order, messages, overhead_out);
    if (*sweep) return cmd_sweep(config);
    if (*baseline) return cmd_baseline(bc, method, M, grid);
    if (*overhead) return cmd_overhead(oK, oNt, oN);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
