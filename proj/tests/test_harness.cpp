#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mprl/harness.hpp"

using namespace mprl;
using namespace mprl::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mprl_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig small_pong(AgentKind agent) {
  RunConfig cfg = default_run_config(Environment::Pong);
  cfg.agent = agent;
  cfg.episodes = 2;
  cfg.seeds = {3, 4};
  return cfg;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Config, Defaults) {
  const RunConfig pong = default_run_config(Environment::Pong);
  EXPECT_EQ(pong.episodes, 50);
  EXPECT_EQ(pong.seeds.size(), 5u);
  EXPECT_EQ(pong.mprl.r_bar, 0.1);
  EXPECT_EQ(pong.mprl.r_underbar, 0.0);
  EXPECT_EQ(pong.mprl.h_y, 5.0);
  EXPECT_EQ(pong.mprl.qcfg.alpha, 0.7);
  EXPECT_EQ(pong.mprl.qcfg.gamma, 0.7);
  EXPECT_EQ(pong.mprl.qcfg.epsilon, 0.0);
  const RunConfig pend = default_run_config(Environment::Pendulum);
  EXPECT_EQ(pend.episodes, 20);
  EXPECT_EQ(pend.pendulum_steps, 2000);
}

TEST(Config, Invalid) {
  RunConfig cfg = small_pong(AgentKind::Mprl);
  cfg.episodes = 0;
  EXPECT_THROW(run_batch(cfg), InvalidConfig);
  cfg = small_pong(AgentKind::Mprl);
  cfg.seeds.clear();
  EXPECT_THROW(run_batch(cfg), InvalidConfig);
  cfg = small_pong(AgentKind::Mprl);
  cfg.dump_frames = true;
  EXPECT_THROW(run_batch(cfg), InvalidConfig);
}

TEST(Config, KeyValues) {
  std::istringstream is("# comment\nagent = q\nepisodes=7\nseeds=1, 9\nrbar=0.3 # trailing\ncadence=step\ntie_break=smallest\n");
  RunConfig cfg = default_run_config(Environment::Pong);
  apply_settings(cfg, read_key_values(is));
  EXPECT_EQ(cfg.agent, AgentKind::QOnly);
  EXPECT_EQ(cfg.episodes, 7);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 9}));
  EXPECT_EQ(cfg.mprl.r_bar, 0.3);
  EXPECT_EQ(cfg.mprl.cadence, EnvRewardCadence::EveryStep);
  EXPECT_EQ(cfg.mprl.qcfg.tie_break, TieBreak::SmallestId);
  EXPECT_THROW(apply_setting(cfg, "colour", "red"), InvalidConfig);
  EXPECT_THROW(apply_setting(cfg, "episodes", "many"), InvalidConfig);
  std::istringstream bad("episodes\n");
  EXPECT_THROW(read_key_values(bad), InvalidConfig);
}

TEST(Lists, Parse) {
  EXPECT_EQ(parse_list<double>("0.1, 0.5,0.9"), (std::vector<double>{0.1, 0.5, 0.9}));
  EXPECT_THROW(parse_list<int>("1,x"), InvalidConfig);
  EXPECT_THROW(parse_list<int>(""), InvalidConfig);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-3.0), "-3");
  EXPECT_EQ(format_double(1.0 / 3.0), "0.3333333333333333");
}

TEST(Seeds, EpisodeSeedsDistinct) {
  EXPECT_NE(episode_seed(1, 0), episode_seed(1, 1));
  EXPECT_NE(episode_seed(1, 0), episode_seed(2, 0));
  EXPECT_EQ(episode_seed(2, 3), 2 * 1000003ULL + 3);
}

TEST(Summary, MeanMinMax) {
  std::vector<SeedResult> seeds(3);
  const double scores[3][2] = {{-3, 5}, {1, 7}, {2, -9}};
  for (int i = 0; i < 3; ++i) {
    for (int e = 0; e < 2; ++e) {
      EpisodeSummary s;
      s.episode = e + 1;
      s.score = scores[i][e];
      s.violations = i;
      seeds[i].episodes.push_back(s);
    }
  }
  const auto st = summarize(seeds, 2);
  ASSERT_EQ(st.size(), 2u);
  EXPECT_EQ(st[0].mean, 0.0);
  EXPECT_EQ(st[0].min, -3.0);
  EXPECT_EQ(st[0].max, 2.0);
  EXPECT_EQ(st[1].mean, 1.0);
  EXPECT_EQ(st[1].mean_violations, 1.0);
  BatchResult b{RunConfig{}, seeds, st};
  EXPECT_EQ(b.window_mean(1, 2), 0.5);
  EXPECT_THROW((void)b.window_mean(0, 2), InvalidConfig);
  EXPECT_THROW((void)b.window_mean(1, 3), InvalidConfig);
  EXPECT_EQ(b.total_violations(), 6);
}

TEST(Batch, PongCsvLayout) {
  RunConfig cfg = small_pong(AgentKind::Mprl);
  cfg.out = scratch("layout");
  const auto b = run_batch(cfg);
  ASSERT_EQ(b.per_episode.size(), 2u);
  const std::string top = slurp(*cfg.out / "summary.csv");
  EXPECT_EQ(top.substr(0, top.find('\n')), "episode,mean,min,max");
  EXPECT_EQ(count_lines(top), 3);
  for (std::uint64_t s : cfg.seeds) {
    const auto dir = *cfg.out / ("seed_" + std::to_string(s));
    const std::string sum = slurp(dir / "summary.csv");
    EXPECT_EQ(sum.substr(0, sum.find('\n')), "episode,game_reward,steps,mpc_steps,ql_steps,agreements");
    EXPECT_EQ(count_lines(sum), 3);
    const std::string steps = slurp(dir / "steps.csv");
    EXPECT_EQ(steps.substr(0, steps.find('\n')),
              "episode,step,controller,s1,s2,s3,s4,s5,u,a,applied,shaped_r,env_r,score_a,score_o");
    std::int64_t total = 0;
    for (const auto& e : b.seeds[s == 3 ? 0 : 1].episodes) total += e.steps;
    EXPECT_EQ(count_lines(steps), total + 1);
  }
  // per-episode stats recomputed from the per-seed rows
  for (int e = 0; e < 2; ++e) {
    const double a = b.seeds[0].episodes[e].score, c = b.seeds[1].episodes[e].score;
    EXPECT_EQ(b.per_episode[e].mean, (a + c) / 2);
    EXPECT_EQ(b.per_episode[e].min, std::min(a, c));
  }
  fs::remove_all(*cfg.out);
}

TEST(Batch, DeterministicAndThreadIndependent) {
  RunConfig cfg = small_pong(AgentKind::Mprl);
  cfg.out = scratch("det_a");
  cfg.threads = 1;
  run_batch(cfg);
  RunConfig again = cfg;
  again.out = scratch("det_b");
  again.threads = 2;
  run_batch(again);
  for (const char* rel : {"summary.csv", "seed_3/summary.csv", "seed_3/steps.csv", "seed_4/steps.csv"}) {
    EXPECT_EQ(slurp(*cfg.out / rel), slurp(*again.out / rel)) << rel;
  }
  fs::remove_all(*cfg.out);
  fs::remove_all(*again.out);
}

TEST(Batch, AgentKindsShareEnvironmentSeeds) {
  // with no learning signal the q-only and mpc-only agents still see the same serves
  RunConfig a = small_pong(AgentKind::QOnly), b = small_pong(AgentKind::MpcOnly);
  a.episodes = b.episodes = 1;
  a.seeds = b.seeds = {7};
  EXPECT_EQ(run_batch(a).seeds[0].episodes.size(), run_batch(b).seeds[0].episodes.size());
  pong::PongState sa = pong::reset(episode_seed(7, 0)), sb = pong::reset(episode_seed(7, 0));
  EXPECT_EQ(sa, sb);
}

TEST(Batch, PendulumCsvLayout) {
  RunConfig cfg = default_run_config(Environment::Pendulum);
  cfg.episodes = 2;
  cfg.seeds = {1};
  cfg.pendulum_steps = 100;
  cfg.out = scratch("pend");
  const auto b = run_batch(cfg);
  const std::string top = slurp(*cfg.out / "summary.csv");
  EXPECT_EQ(top.substr(0, top.find('\n')), "episode,mean,min,max,mean_violations");
  const std::string steps = slurp(*cfg.out / "seed_1" / "steps.csv");
  EXPECT_EQ(steps.substr(0, steps.find('\n')), "episode,step,theta,theta_dot,controller,action,reward,violation");
  EXPECT_EQ(count_lines(steps), 201);
  const std::string sum = slurp(*cfg.out / "seed_1" / "summary.csv");
  EXPECT_EQ(sum.substr(0, sum.find('\n')), "episode,mean_reward,steps,safety_steps,ql_steps,violations");
  EXPECT_EQ(b.seeds[0].episodes[0].steps, 100);
  fs::remove_all(*cfg.out);
}

TEST(Batch, NoStepsFile) {
  RunConfig cfg = small_pong(AgentKind::MpcOnly);
  cfg.episodes = 1;
  cfg.write_steps = false;
  cfg.out = scratch("nosteps");
  run_batch(cfg);
  EXPECT_FALSE(fs::exists(*cfg.out / "seed_3" / "steps.csv"));
  EXPECT_TRUE(fs::exists(*cfg.out / "seed_3" / "summary.csv"));
  fs::remove_all(*cfg.out);
}

TEST(Sweep, GridsAndCsv) {
  EXPECT_EQ(default_sweep_values(SweepParam::HY), (std::vector<double>{4, 5, 6}));
  EXPECT_EQ(default_sweep_values(SweepParam::RBar).size(), 5u);
  EXPECT_EQ(default_sweep_values(SweepParam::RUnderbar).front(), -0.1);
  EXPECT_EQ(parse_sweep_param("runderbar"), SweepParam::RUnderbar);
  EXPECT_THROW(parse_sweep_param("alpha"), InvalidConfig);

  RunConfig cfg = small_pong(AgentKind::Mprl);
  cfg.episodes = 1;
  cfg.write_steps = false;
  cfg.out = scratch("sweep");
  const auto pts = run_sweep(cfg, SweepParam::HY, {4, 6});
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1].batch.config.mprl.h_y, 6.0);
  EXPECT_TRUE(fs::exists(*cfg.out / "hy_4" / "summary.csv"));
  const std::string csv = slurp(*cfg.out / "sweep_hy.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "param,value,episode,mean,min,max");
  EXPECT_EQ(count_lines(csv), 3);
  EXPECT_THROW(run_sweep(cfg, SweepParam::HY, {}), InvalidConfig);
  fs::remove_all(*cfg.out);
}
