#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "dfd/io.hpp"
#include "dfd/sim.hpp"
#include "dfd/testing/random_graph.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitDivergence = 4;

dfd::ScenarioConfig resolve_config(const std::string& name) {
  if (auto builtin = dfd::builtin_scenario(name)) return *builtin;
  if (!fs::exists(name)) throw dfd::ConfigError("file not found: " + name);
  return dfd::load_scenario(name);
}

std::string output_dir(const std::optional<std::string>& flag) {
  if (flag.has_value()) return *flag;
  if (const char* env = std::getenv("DFD_OUT_DIR")) return env;
  return ".";
}

std::string fmt_time(const std::optional<double>& t) {
  if (!t.has_value()) return "not reached";
  std::ostringstream os;
  os << std::setprecision(6) << *t << " s";
  return os.str();
}

struct RunOptions {
  std::string config;
  std::optional<double> dt, t_end, tol, window;
  std::optional<int> decimate;
  std::optional<std::string> out;
};

int do_run(const RunOptions& opt) {
  dfd::ScenarioConfig cfg = resolve_config(opt.config);
  if (opt.dt) cfg.dt = *opt.dt;
  if (opt.t_end) cfg.t_end = *opt.t_end;
  if (opt.tol) cfg.tol = *opt.tol;
  if (opt.window) cfg.window = *opt.window;
  if (opt.decimate) cfg.decimate = *opt.decimate;

  const dfd::PreparedScenario prep = dfd::prepare(cfg);
  const dfd::Trajectory traj = dfd::integrate(cfg, prep);

  const fs::path dir = output_dir(opt.out);
  fs::create_directories(dir);
  const std::string csv_path = (dir / (cfg.id + ".csv")).string();
  const std::string summary_path = (dir / (cfg.id + "_summary.json")).string();

  const dfd::RunSummary summary = dfd::summarize(cfg, prep, traj, csv_path, summary_path);
  dfd::write_trajectory_csv(traj, csv_path);
  dfd::write_summary_json(summary, summary_path);

  std::cout << "scenario        " << summary.scenario << " (" << dfd::to_string(summary.mode)
            << ", n=" << summary.n << ")\n";
  std::cout << "gains           k1=" << summary.gains.k1 << " k2=" << summary.gains.k2
            << " (rho=" << summary.gains.rho << ", " << (summary.gains_auto ? "auto" : "explicit")
            << ")\n";
  if (summary.gain_check.has_value()) {
    std::cout << "certified       " << (summary.gain_check->certified() ? "yes" : "no")
              << " (k1 margin " << summary.gain_check->k1_margin << ", k2 margin "
              << summary.gain_check->k2_margin << ")\n";
  }
  std::cout << "lambda1(G)      " << summary.lambda1 << "\n";
  std::cout << "convergence     position " << fmt_time(summary.conv_position) << ", velocity "
            << fmt_time(summary.conv_velocity) << ", both " << fmt_time(summary.conv_both)
            << "  (tol " << summary.tol << ", window " << summary.window << " s)\n";
  std::cout << "settling        V(0)=" << summary.v0 << ", bound "
            << fmt_time(summary.settling_bound) << ", observed " << fmt_time(summary.conv_both)
            << "\n";
  std::cout << "lyapunov        " << summary.lyapunov.violations << " violations / "
            << summary.lyapunov.samples_checked << " samples checked (slack "
            << summary.lyapunov.slack << ")\n";
  if (summary.disturbance_bound_violations > 0) {
    std::cout << "warning         disturbance bound |d_i| <= l2 exceeded at "
              << summary.disturbance_bound_violations << " steps\n";
  }
  std::cout << "artifacts       " << csv_path << ", " << summary_path << "\n";

  if (traj.diverged_at.has_value()) {
    std::cerr << "divergence: state left the admissible range at t = " << *traj.diverged_at
              << " s; artifacts contain the valid prefix\n";
    return kExitDivergence;
  }
  return 0;
}

int do_certify(const std::string& config) {
  dfd::ScenarioConfig cfg = resolve_config(config);

  const bool connected = dfd::is_strongly_connected(cfg.graph);
  std::cout << "strongly connected   " << (connected ? "yes" : "no") << "\n";
  int pinned = 0;
  for (int i = 0; i < cfg.graph.size(); ++i) pinned += cfg.graph.pinned(i) ? 1 : 0;
  std::cout << "pinned agents        " << pinned << " of " << cfg.graph.size() << "\n";
  if (!connected) {
    std::cerr << "Assumption 1 violated: not strongly connected\n";
    return kExitAssumption;
  }
  if (pinned == 0) {
    std::cerr << "Assumption 1 violated: no agent is pinned to the leader\n";
    return kExitAssumption;
  }

  const dfd::PreparedScenario prep = dfd::prepare(cfg);
  std::cout << "w                    [";
  for (Eigen::Index i = 0; i < prep.cert.w.size(); ++i) {
    std::cout << (i ? ", " : "") << prep.cert.w(i);
  }
  std::cout << "]\n";
  std::cout << "lambda1(G)           " << prep.cert.lambda1 << "\n";
  std::cout << "constants            rho=" << prep.constants.rho << " l=" << prep.constants.l
            << " l1=" << prep.constants.l1 << " -> l2=" << prep.constants.l2
            << " gamma0=" << prep.constants.gamma0 << " gamma1=" << prep.constants.gamma1
            << " gamma2=" << prep.constants.gamma2 << "\n";
  if (cfg.gains.auto_select()) {
    std::cout << "minimal gains        k1=" << prep.gains.k1 << " k2=" << prep.gains.k2;
    if (prep.gains.degenerate()) {
      std::cout << "  (degenerate: l2 = 0; finite-time claims need k2 > 0)";
    }
    std::cout << "\n";
  }
  if (prep.gain_check.has_value()) {
    const auto& ck = *prep.gain_check;
    std::cout << "gain check           k2 required " << ck.k2_required << ", margin "
              << ck.k2_margin << " (" << (ck.k2_satisfied ? "ok" : "violated") << ")\n";
    std::cout << "                     k1 required " << ck.k1_required << ", margin "
              << ck.k1_margin << " (" << (ck.k1_satisfied ? "ok" : "violated") << ")\n";
    std::cout << "certified            " << (ck.certified() ? "yes" : "no") << "\n";
  }
  return 0;
}

int do_gen_graph(int n, std::uint64_t seed, double edge_prob, const std::string& out) {
  dfd::testing::RandomGraphOptions opt;
  opt.n = n;
  opt.edge_prob = edge_prob;
  const dfd::DirectedGraph g = dfd::testing::random_graph(seed, opt);
  dfd::write_text_file(out, dfd::graph_to_json(g));
  std::cout << "wrote " << out << " (n=" << n << ", seed=" << seed << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed finite-time differentiator and output-consensus simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "simulate a scenario, emit trajectory CSV + summary JSON");
  run->add_option("config", run_opt.config,
                  "builtin scenario (vi-a, vi-b, vi-c) or scenario config path")
      ->required();
  run->add_option("--dt", run_opt.dt, "integration step override [s]");
  run->add_option("--t-end", run_opt.t_end, "horizon override [s]");
  run->add_option("--tol", run_opt.tol, "convergence tolerance override");
  run->add_option("--window", run_opt.window, "convergence dwell window override [s]");
  run->add_option("--decimate", run_opt.decimate, "record every k-th step");
  run->add_option("--out", run_opt.out, "output directory (default $DFD_OUT_DIR or .)");

  std::string certify_config;
  auto* certify = app.add_subcommand(
      "certify", "report topology certificate, derived constants and gain margins, no simulation");
  certify->add_option("config", certify_config, "builtin scenario name or scenario config path")
      ->required();

  int gg_n = 4;
  std::uint64_t gg_seed = 0;
  double gg_edge_prob = 0.3;
  std::string gg_out = "graph.json";
  auto* gen = app.add_subcommand("gen-graph",
                                 "generate a seeded random strongly connected test topology");
  gen->add_option("--n", gg_n, "agent count")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gg_seed, "generator seed");
  gen->add_option("--edge-prob", gg_edge_prob, "extra edge probability");
  gen->add_option("--out", gg_out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return do_run(run_opt);
    if (certify->parsed()) return do_certify(certify_config);
    if (gen->parsed()) return do_gen_graph(gg_n, gg_seed, gg_edge_prob, gg_out);
  } catch (const dfd::AssumptionError& e) {
    std::cerr << e.what() << "\n";
    return kExitAssumption;
  } catch (const dfd::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
