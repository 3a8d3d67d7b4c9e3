// Batch front-end: certify / simulate / equilibrium / game / generate.
// Exit codes: 0 success, 1 usage error, 2 input error, 3 certificate or
// convergence failure, 4 integrator failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tshopfield/certificates.hpp"
#include "tshopfield/dynamics.hpp"
#include "tshopfield/io.hpp"
#include "tshopfield/network.hpp"
#include "tshopfield/timescale.hpp"

namespace {

bool log_enabled() {
  const char* v = std::getenv("TSHOPFIELD_LOG");
  return v != nullptr && std::string(v) != "" && std::string(v) != "off";
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[tshopfield] " << msg << "\n";
}

void write_output(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot open output file: " + out);
  f << content << "\n";
}

struct CommonOpts {
  std::string network_path;
  std::string timescale_path;
  double t0 = std::numeric_limits<double>::quiet_NaN();
  double tf = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> mu_star;
  std::string out;
  unsigned long seed = 0;
  double tol = 1e-10;
};

// Horizon defaults: t0 = inf T; tf = sup T when bounded, else t0 + 10.
void resolve_horizon(const tsh::TimeScale& ts, CommonOpts& o) {
  if (std::isnan(o.t0)) o.t0 = ts.inf_t();
  if (std::isnan(o.tf)) {
    o.tf = ts.unbounded_above() ? o.t0 + 10.0 : ts.sup_t();
  }
}

Eigen::VectorXd sample_in_ball(std::mt19937_64& rng, const Eigen::VectorXd& center,
                               double radius) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd dir(center.size());
  for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
  const double norm = dir.norm();
  if (norm == 0.0) return center;
  const double r =
      radius * std::pow(unif(rng), 1.0 / static_cast<double>(center.size()));
  return center + dir * (r / norm);
}

int cmd_certify(const CommonOpts& opts) {
  tsh::NetworkSpec net = tsh::load_network(opts.network_path);
  tsh::TimeScale ts = tsh::load_timescale(opts.timescale_path);
  CommonOpts o = opts;
  resolve_horizon(ts, o);
  tsh::HopfieldSystem sys = net.build();
  tsh::CertificateReport rep = tsh::evaluate_certificates(
      net.graph, net.params, net.payoff, sys, ts, o.t0, o.tf, o.mu_star);
  write_output(o.out, tsh::to_json(rep).dump(2));
  log_line(std::string("certify: all_pass=") + (rep.all_pass() ? "true" : "false"));
  return rep.all_pass() ? 0 : 3;
}

int cmd_equilibrium(const CommonOpts& opts) {
  tsh::NetworkSpec net = tsh::load_network(opts.network_path);
  tsh::HopfieldSystem sys = net.build();
  tsh::EquilibriumConfig cfg;
  cfg.tol = opts.tol;
  tsh::EquilibriumResult res = tsh::find_equilibrium(sys, cfg);
  write_output(opts.out, tsh::to_json(res).dump(2));
  return res.converged ? 0 : 3;
}

struct SimulateOpts : CommonOpts {
  int runs = 1;
  bool check_envelope = false;
  std::string u0_csv;
};

int cmd_simulate(const SimulateOpts& opts) {
  tsh::NetworkSpec net = tsh::load_network(opts.network_path);
  tsh::TimeScale ts = tsh::load_timescale(opts.timescale_path);
  SimulateOpts o = opts;
  resolve_horizon(ts, o);
  if (!ts.contains(o.t0) || !ts.contains(o.tf)) {
    throw std::invalid_argument("simulate: t0/tf not in the time scale");
  }
  tsh::HopfieldSystem sys = net.build();
  tsh::EquilibriumResult eq = tsh::find_equilibrium(sys);
  const double r0 = tsh::equilibrium_bound_r0(sys);

  std::optional<double> beta;
  if (o.check_envelope) {
    auto expv = tsh::check_exponential(sys, net.graph, net.params, net.payoff,
                                       ts, o.t0, o.tf);
    if (!expv.pass) {
      throw std::invalid_argument(
          "simulate: --check-envelope requires a certified rate (beta > 0, "
          "-b_min positively regressive)");
    }
    beta = expv.beta;
  }

  std::vector<Eigen::VectorXd> starts;
  if (!o.u0_csv.empty()) {
    std::vector<double> vals;
    std::stringstream ss(o.u0_csv);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    if (vals.size() != sys.size()) {
      throw std::invalid_argument("simulate: --u0 has wrong dimension");
    }
    starts.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(),
                                                 static_cast<Eigen::Index>(vals.size())));
  } else {
    std::mt19937_64 rng(o.seed);
    for (int k = 0; k < o.runs; ++k) {
      starts.push_back(sample_in_ball(rng, eq.u_star, 2.0 * r0));
    }
  }

  const std::string prefix = o.out.empty() ? "trajectory" : o.out;
  tsh::json summary;
  summary["runs"] = tsh::json::array();
  bool all_envelopes_pass = true;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    tsh::Trajectory traj;
    try {
      traj = tsh::simulate(sys, ts, starts[k], o.t0, o.tf);
    } catch (const std::runtime_error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 4;
    }
    const std::string csv_path = prefix + "_run" + std::to_string(k) + ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open output file: " + csv_path);
    tsh::write_trajectory_csv(csv, traj, eq.u_star, beta, ts);
    tsh::json run;
    run["index"] = k;
    run["csv"] = csv_path;
    run["final_V"] = (traj.samples.back().u - eq.u_star).squaredNorm();
    if (beta) {
      auto env = tsh::verify_envelope(traj, eq.u_star, *beta, ts);
      run["envelope"] = tsh::to_json(env);
      all_envelopes_pass = all_envelopes_pass && env.pass;
    }
    summary["runs"].push_back(std::move(run));
    log_line("simulate: run " + std::to_string(k) + " done");
  }
  summary["equilibrium"] = tsh::to_json(eq);
  summary["r0"] = r0;
  if (beta) {
    summary["beta"] = *beta;
    summary["all_envelopes_pass"] = all_envelopes_pass;
  }
  write_output(prefix + "_summary.json", summary.dump(2));
  return (beta && !all_envelopes_pass) ? 3 : 0;
}

struct GameOpts : CommonOpts {
  int steps = 10;
  std::string mode = "sync";
  std::string s0 = "zeros";
};

int cmd_game(const GameOpts& opts) {
  tsh::NetworkSpec net = tsh::load_network(opts.network_path);
  const std::size_t n = net.graph.size();
  tsh::GameState st;
  st.S.assign(n, 0);
  if (opts.s0 == "ones") {
    st.S.assign(n, 1);
  } else if (opts.s0 == "random") {
    std::mt19937_64 rng(opts.seed);
    std::bernoulli_distribution coin(0.5);
    for (auto& s : st.S) s = coin(rng) ? 1 : 0;
  } else if (opts.s0 != "zeros") {
    if (opts.s0.size() != n) {
      throw std::invalid_argument("game: --s0 bit string has wrong length");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (opts.s0[i] != '0' && opts.s0[i] != '1') {
        throw std::invalid_argument("game: --s0 must be bits, zeros, ones or random");
      }
      st.S[i] = opts.s0[i] - '0';
    }
  }
  const tsh::UpdateMode mode = opts.mode == "seq" ? tsh::UpdateMode::Sequential
                                                  : tsh::UpdateMode::Synchronous;
  std::vector<double> U;
  for (const auto& np : net.params) U.push_back(np.U);

  std::ostringstream csv;
  csv << "step";
  for (std::size_t i = 0; i < n; ++i) csv << ",node_" << i;
  csv << "\n";
  for (int step = 0; step <= opts.steps; ++step) {
    csv << step;
    for (std::size_t i = 0; i < n; ++i) csv << "," << st.S[i];
    csv << "\n";
    if (step < opts.steps) {
      st = tsh::threshold_step(net.graph, net.payoff, st, U, mode);
    }
  }
  if (opts.out.empty() || opts.out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(opts.out);
    if (!f) throw std::runtime_error("cannot open output file: " + opts.out);
    f << csv.str();
  }
  return 0;
}

struct GenerateOpts {
  std::string kind;
  std::size_t n = 10;
  unsigned long seed = 0;
  double edge_prob = 0.3;
  double b = 0.02, c = 0.01;
  double C = 1.0, R = 1.0, lambda = 1.0, M = 1.0, J = 0.0, theta = 0.0, U = 0.0;
  std::string activation = "tanh";
  std::string out;
};

int cmd_generate(const GenerateOpts& opts) {
  if (opts.n == 0) throw std::invalid_argument("generate: n must be > 0");
  tsh::Graph g(opts.n);
  if (opts.kind == "ring") {
    if (opts.n >= 3) {
      for (std::size_t i = 0; i < opts.n; ++i) g.add_edge(i, (i + 1) % opts.n);
    } else if (opts.n == 2) {
      g.add_edge(0, 1);
    }
  } else if (opts.kind == "complete") {
    for (std::size_t i = 0; i < opts.n; ++i) {
      for (std::size_t j = i + 1; j < opts.n; ++j) g.add_edge(i, j);
    }
  } else if (opts.kind == "star") {
    for (std::size_t i = 1; i < opts.n; ++i) g.add_edge(0, i);
  } else if (opts.kind == "erdos-renyi") {
    std::mt19937_64 rng(opts.seed);
    std::bernoulli_distribution coin(opts.edge_prob);
    for (std::size_t i = 0; i < opts.n; ++i) {
      for (std::size_t j = i + 1; j < opts.n; ++j) {
        if (coin(rng)) g.add_edge(i, j);
      }
    }
  } else {
    throw std::invalid_argument("generate: unknown kind \"" + opts.kind + "\"");
  }
  tsh::NodeParams np;
  np.C = opts.C;
  np.R = opts.R;
  np.lambda = opts.lambda;
  np.M = opts.M;
  np.J = opts.J;
  np.theta = opts.theta;
  np.U = opts.U;
  np.validate();
  std::vector<tsh::NodeParams> params(opts.n, np);
  tsh::PayoffSpec p{opts.b, opts.c};
  p.validate();
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < opts.n; ++i) labels.push_back(std::to_string(i));
  tsh::NetworkSpec spec{std::move(g), std::move(params), p,
                        tsh::parse_activation(opts.activation), std::move(labels)};
  write_output(opts.out, tsh::network_to_json(spec).dump(2));
  return 0;
}

void add_common(CLI::App* sub, CommonOpts& o, bool with_timescale) {
  sub->add_option("--network", o.network_path, "network JSON file")->required();
  if (with_timescale) {
    sub->add_option("--timescale", o.timescale_path, "time-scale JSON file")
        ->required();
    sub->add_option("--t0", o.t0, "horizon start (default: inf T)");
    sub->add_option("--tf", o.tf, "horizon end (default: sup T or t0 + 10)");
    sub->add_option("--mu-star", o.mu_star,
                    "graininess bound mu* (default: observed supremum)");
  }
  sub->add_option("--out", o.out, "output path (default: stdout)");
  sub->add_option("--seed", o.seed, "RNG seed");
  sub->add_option("--tol", o.tol, "solver tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability certificates and simulation for Hopfield-type "
               "social-network dynamics on time scales"};
  app.require_subcommand(1);

  CommonOpts certify_opts;
  auto* certify = app.add_subcommand("certify", "evaluate all stability certificates");
  add_common(certify, certify_opts, true);

  CommonOpts eq_opts;
  auto* equilibrium = app.add_subcommand("equilibrium", "solve for the equilibrium state");
  add_common(equilibrium, eq_opts, false);

  SimulateOpts sim_opts;
  auto* simulate = app.add_subcommand("simulate", "simulate trajectories on the time scale");
  add_common(simulate, sim_opts, true);
  simulate->add_option("--runs", sim_opts.runs, "number of random initial states");
  simulate->add_option("--u0", sim_opts.u0_csv, "explicit initial state (comma separated)");
  simulate->add_flag("--check-envelope", sim_opts.check_envelope,
                     "verify the exponential envelope (requires certified rate)");

  GameOpts game_opts;
  auto* game = app.add_subcommand("game", "run the discrete threshold-rule game");
  add_common(game, game_opts, false);
  game->add_option("--steps", game_opts.steps, "number of update steps");
  game->add_option("--mode", game_opts.mode, "sync or seq")
      ->check(CLI::IsMember({"sync", "seq"}));
  game->add_option("--s0", game_opts.s0, "initial state: zeros, ones, random, or a bit string");

  GenerateOpts gen_opts;
  auto* generate = app.add_subcommand("generate", "emit a network JSON file");
  generate->add_option("kind", gen_opts.kind, "ring | complete | star | erdos-renyi")
      ->required();
  generate->add_option("--n", gen_opts.n, "node count");
  generate->add_option("--seed", gen_opts.seed, "RNG seed");
  generate->add_option("--p", gen_opts.edge_prob, "edge probability (erdos-renyi)");
  generate->add_option("--b", gen_opts.b, "payoff benefit");
  generate->add_option("--c", gen_opts.c, "payoff cost");
  generate->add_option("--C", gen_opts.C, "capacitance");
  generate->add_option("--R", gen_opts.R, "resistance");
  generate->add_option("--lambda", gen_opts.lambda, "activation Lipschitz constant");
  generate->add_option("--M", gen_opts.M, "activation bound");
  generate->add_option("--J", gen_opts.J, "constant external input");
  generate->add_option("--theta", gen_opts.theta, "activation midpoint offset");
  generate->add_option("--U", gen_opts.U, "payoff threshold (discrete game)");
  generate->add_option("--activation", gen_opts.activation, "tanh | logistic | pwl");
  generate->add_option("--out", gen_opts.out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (certify->parsed()) return cmd_certify(certify_opts);
    if (equilibrium->parsed()) return cmd_equilibrium(eq_opts);
    if (simulate->parsed()) return cmd_simulate(sim_opts);
    if (game->parsed()) return cmd_game(game_opts);
    if (generate->parsed()) return cmd_generate(gen_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
