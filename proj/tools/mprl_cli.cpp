// Command-line front end: pong | pendulum | sweep.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "mprl/harness.hpp"

namespace {

using namespace mprl;
using namespace mprl::harness;

struct Flags {
  std::string config_file;
  std::string agent, seeds, out, param, values, cadence, tie_break;
  int episodes = 0, threads = 0;
  long long steps = 0, max_steps = 0;
  double rbar = 0, runderbar = 0, hy = 0, alpha = 0, gamma = 0, epsilon = 0;
  bool dump_frames = false, no_steps = false;
};

void add_run_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_file, "key=value file; command-line flags take precedence")
      ->check(CLI::ExistingFile);
  app->add_option("--agent", f.agent, "mprl, q or mpc")->check(CLI::IsMember({"mprl", "q", "mpc", "q_only", "mpc_only"}));
  app->add_option("--episodes", f.episodes, "episodes per seed");
  app->add_option("--seeds", f.seeds, "comma-separated seeds");
  app->add_option("--rbar", f.rbar, "shaped reward on agreement");
  app->add_option("--runderbar", f.runderbar, "shaped reward on disagreement");
  app->add_option("--hy", f.hy, "handover threshold in rows");
  app->add_option("--alpha", f.alpha, "learning rate");
  app->add_option("--gamma", f.gamma, "discount");
  app->add_option("--epsilon", f.epsilon, "exploration rate");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--threads", f.threads, "worker threads (0 = auto)");
  app->add_option("--cadence", f.cadence, "environment reward cadence: event or step");
  app->add_option("--tie-break", f.tie_break, "greedy tie rule: smallest or first");
  app->add_flag("--no-steps", f.no_steps, "skip the per-step CSV");
}

/// Config file first, then every flag that was given on the command line.
RunConfig build_config(Environment env, CLI::App* app, const Flags& f) {
  RunConfig cfg = default_run_config(env);
  if (!f.config_file.empty()) {
    std::ifstream is(f.config_file);
    if (!is) throw Error("cannot read " + f.config_file);
    apply_settings(cfg, read_key_values(is));
  }
  auto given = [&](const char* name) {
    const CLI::Option* o = app->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  if (given("--agent")) cfg.agent = parse_agent_kind(f.agent);
  if (given("--episodes")) cfg.episodes = f.episodes;
  if (given("--seeds")) cfg.seeds = parse_list<std::uint64_t>(f.seeds);
  if (given("--rbar")) cfg.mprl.r_bar = f.rbar;
  if (given("--runderbar")) cfg.mprl.r_underbar = f.runderbar;
  if (given("--hy")) cfg.mprl.h_y = f.hy;
  if (given("--alpha")) cfg.mprl.qcfg.alpha = f.alpha;
  if (given("--gamma")) cfg.mprl.qcfg.gamma = f.gamma;
  if (given("--epsilon")) cfg.mprl.qcfg.epsilon = f.epsilon;
  if (given("--out")) cfg.out = f.out;
  if (given("--threads")) cfg.threads = f.threads;
  if (given("--cadence")) apply_setting(cfg, "cadence", f.cadence);
  if (given("--tie-break")) apply_setting(cfg, "tie_break", f.tie_break);
  if (given("--no-steps")) cfg.write_steps = false;
  if (given("--dump-frames")) cfg.dump_frames = f.dump_frames;
  if (given("--steps")) cfg.pendulum_steps = f.steps;
  if (given("--max-steps")) cfg.pong_max_steps = f.max_steps;
  return cfg;
}

void report(const BatchResult& b) {
  std::cout << "episode,mean,min,max\n";
  for (const auto& st : b.per_episode) {
    std::cout << st.episode << ',' << format_double(st.mean) << ',' << format_double(st.min) << ','
              << format_double(st.max) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPC-augmented Q-learning experiments"};
  app.require_subcommand(1);

  Flags pong_f, pend_f, sweep_f;
  auto* pong_cmd = app.add_subcommand("pong", "run a Pong batch");
  add_run_flags(pong_cmd, pong_f);
  pong_cmd->add_flag("--dump-frames", pong_f.dump_frames, "write every frame as PGM");
  pong_cmd->add_option("--max-steps", pong_f.max_steps, "per-episode step guard");

  auto* pend_cmd = app.add_subcommand("pendulum", "run a pendulum batch");
  add_run_flags(pend_cmd, pend_f);
  pend_cmd->add_option("--steps", pend_f.steps, "steps per episode");

  auto* sweep_cmd = app.add_subcommand("sweep", "sweep one MPRL parameter on Pong");
  add_run_flags(sweep_cmd, sweep_f);
  sweep_cmd->add_option("--param", sweep_f.param, "hy, rbar or runderbar")
      ->required()
      ->check(CLI::IsMember({"hy", "rbar", "runderbar"}));
  sweep_cmd->add_option("--max-steps", sweep_f.max_steps, "per-episode step guard");
  sweep_cmd->add_option("--values", sweep_f.values, "comma-separated values (default: the reference grid)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pong_cmd->parsed()) {
      report(run_batch(build_config(Environment::Pong, pong_cmd, pong_f)));
    } else if (pend_cmd->parsed()) {
      report(run_batch(build_config(Environment::Pendulum, pend_cmd, pend_f)));
    } else {
      RunConfig cfg = build_config(Environment::Pong, sweep_cmd, sweep_f);
      const SweepParam param = parse_sweep_param(sweep_f.param);
      const auto values = sweep_cmd->count("--values") ? parse_list<double>(sweep_f.values)
                                                       : default_sweep_values(param);
      std::cout << "value,final10_mean\n";
      for (const auto& p : run_sweep(cfg, param, values)) {
        const int n = p.batch.config.episodes;
        std::cout << format_double(p.value) << ',' << format_double(p.batch.window_mean(std::max(1, n - 9), n))
                  << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
