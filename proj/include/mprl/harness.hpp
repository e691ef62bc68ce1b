#pragma once

// Seeded experiment batches and parameter sweeps with CSV output.
//
// Layout under RunConfig::out:
//   summary.csv               episode,mean,min,max (,mean_violations for the pendulum)
//   seed_<s>/summary.csv      one row per episode
//   seed_<s>/steps.csv        one row per step (when write_steps)
//   seed_<s>/frames/*.pgm     Pong frames (when dump_frames)

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

#include "mprl/errors.hpp"
#include "mprl/hybrid.hpp"
#include "mprl/pendulum.hpp"
#include "mprl/pong.hpp"
#include "mprl/pong_agent.hpp"
#include "mprl/qlearn.hpp"

namespace mprl::harness {

enum class Environment { Pong, Pendulum };

inline const char* to_string(Environment e) { return e == Environment::Pong ? "pong" : "pendulum"; }

inline Environment parse_environment(const std::string& s) {
  if (s == "pong") return Environment::Pong;
  if (s == "pendulum") return Environment::Pendulum;
  throw InvalidConfig("unknown environment '" + s + "' (expected pong or pendulum)");
}

struct RunConfig {
  Environment environment = Environment::Pong;
  AgentKind agent = AgentKind::Mprl;
  int episodes = 50;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  MprlConfig mprl = pong::pong_default_config();
  std::optional<std::filesystem::path> out;
  bool dump_frames = false;
  bool write_steps = true;
  /// Worker threads for the seed loop; 0 picks min(seeds, hardware threads).
  int threads = 0;
  pong::PongParams pong;
  std::int64_t pong_max_steps = 200000;
  pendulum::PendulumParams pendulum;
  std::int64_t pendulum_steps = 2000;

  void validate() const {
    if (episodes < 1) throw InvalidConfig("episodes must be >= 1");
    if (seeds.empty()) throw InvalidConfig("seeds must not be empty");
    if (threads < 0) throw InvalidConfig("threads must be >= 0");
    if (pendulum_steps < 1) throw InvalidConfig("pendulum steps must be >= 1");
    if (pong_max_steps < 1) throw InvalidConfig("max steps must be >= 1");
    if (dump_frames && environment != Environment::Pong) throw InvalidConfig("frame dumps exist for pong only");
    if (dump_frames && !out) throw InvalidConfig("frame dumps need an output directory");
    mprl.validate();
    pendulum.validate();
  }
};

/// Defaults for an environment: Pong 50 episodes with stay-first ties,
/// pendulum 20 episodes of 2000 steps with smallest-id ties.
inline RunConfig default_run_config(Environment env) {
  RunConfig cfg;
  cfg.environment = env;
  if (env == Environment::Pendulum) {
    cfg.episodes = 20;
    cfg.mprl = MprlConfig{};
  }
  return cfg;
}

/// Environment seed for (replica seed, episode index); shared by every agent kind.
inline std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  return seed * 1000003ULL + static_cast<std::uint64_t>(episode);
}

/// Shortest decimal that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct EpisodeSummary {
  int episode = 0;
  /// Pong: game reward. Pendulum: mean per-step reward.
  double score = 0.0;
  std::int64_t steps = 0;
  std::int64_t mpc_steps = 0;
  std::int64_t ql_steps = 0;
  std::int64_t agreements = 0;
  std::int64_t violations = 0;
  bool truncated = false;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpisodeSummary> episodes;
};

struct EpisodeStats {
  int episode = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean_violations = 0.0;
};

struct BatchResult {
  RunConfig config;
  std::vector<SeedResult> seeds;
  std::vector<EpisodeStats> per_episode;

  /// Mean over seeds and over episodes [first, last] (1-based, inclusive).
  [[nodiscard]] double window_mean(int first, int last) const {
    if (first < 1 || last < first || last > static_cast<int>(per_episode.size()))
      throw InvalidConfig("episode window out of range");
    double sum = 0.0;
    for (int e = first; e <= last; ++e) sum += per_episode[e - 1].mean;
    return sum / (last - first + 1);
  }

  [[nodiscard]] std::int64_t total_violations() const {
    std::int64_t n = 0;
    for (const auto& s : seeds)
      for (const auto& e : s.episodes) n += e.violations;
    return n;
  }
};

inline std::vector<EpisodeStats> summarize(const std::vector<SeedResult>& seeds, int episodes) {
  std::vector<EpisodeStats> out;
  for (int e = 0; e < episodes; ++e) {
    EpisodeStats st;
    st.episode = e + 1;
    st.min = std::numeric_limits<double>::infinity();
    st.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    double viol = 0.0;
    for (const auto& s : seeds) {
      const double v = s.episodes.at(e).score;
      sum += v;
      viol += static_cast<double>(s.episodes.at(e).violations);
      st.min = std::min(st.min, v);
      st.max = std::max(st.max, v);
    }
    st.mean = sum / static_cast<double>(seeds.size());
    st.mean_violations = viol / static_cast<double>(seeds.size());
    out.push_back(st);
  }
  return out;
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  return os;
}

template <typename T>
std::string cell(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

inline std::filesystem::path seed_dir(const RunConfig& cfg, std::uint64_t seed) {
  return *cfg.out / ("seed_" + std::to_string(seed));
}

inline SeedResult run_pong_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedResult result{seed, {}};
  pong::QTable5 table(pong::pong_actions());
  pong::PongAgent agent(cfg.agent, cfg.mprl, table, seed, cfg.pong);

  std::optional<std::ofstream> steps;
  std::optional<std::ofstream> summary;
  std::optional<std::filesystem::path> frames;
  if (cfg.out) {
    const auto dir = seed_dir(cfg, seed);
    std::filesystem::create_directories(dir);
    summary = open_csv(dir / "summary.csv");
    *summary << "episode,game_reward,steps,mpc_steps,ql_steps,agreements\n";
    if (cfg.write_steps) {
      steps = open_csv(dir / "steps.csv");
      *steps << "episode,step,controller,s1,s2,s3,s4,s5,u,a,applied,shaped_r,env_r,score_a,score_o\n";
    }
    if (cfg.dump_frames) {
      frames = dir / "frames";
      std::filesystem::create_directories(*frames);
    }
  }

  for (int e = 0; e < cfg.episodes; ++e) {
    pong::EpisodeOptions opt;
    opt.episode_index = e + 1;
    opt.max_steps = cfg.pong_max_steps;
    opt.frame_dir = frames;
    opt.keep_rows = steps.has_value();
    const auto log = pong::run_episode(agent, episode_seed(seed, e), cfg.pong, opt);

    EpisodeSummary s;
    s.episode = e + 1;
    s.score = log.game_reward();
    s.steps = log.steps;
    s.mpc_steps = log.mpc_steps;
    s.ql_steps = log.ql_steps;
    s.agreements = log.agreements;
    s.truncated = log.truncated;
    result.episodes.push_back(s);

    if (summary) {
      *summary << s.episode << ',' << log.game_reward() << ',' << s.steps << ',' << s.mpc_steps << ','
               << s.ql_steps << ',' << s.agreements << '\n';
    }
    if (steps) {
      for (const auto& row : log.rows) {
        const auto& r = row.record;
        *steps << s.episode << ',' << r.step_index << ',' << mprl::to_string(r.controller);
        for (int c : r.state) *steps << ',' << c;
        *steps << ',' << cell(r.mpc_action) << ',' << cell(r.ql_action) << ',' << r.applied << ','
               << cell(r.shaped_reward) << ',' << format_double(r.env_reward) << ',' << row.score_agent << ','
               << row.score_opponent << '\n';
      }
    }
  }
  return result;
}

inline SeedResult run_pendulum_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedResult result{seed, {}};
  QTable<2> table;
  pendulum::PendulumAgent agent(cfg.agent, cfg.mprl, table, seed);

  std::optional<std::ofstream> steps;
  std::optional<std::ofstream> summary;
  if (cfg.out) {
    const auto dir = seed_dir(cfg, seed);
    std::filesystem::create_directories(dir);
    summary = open_csv(dir / "summary.csv");
    *summary << "episode,mean_reward,steps,safety_steps,ql_steps,violations\n";
    if (cfg.write_steps) {
      steps = open_csv(dir / "steps.csv");
      *steps << "episode,step,theta,theta_dot,controller,action,reward,violation\n";
    }
  }

  for (int e = 0; e < cfg.episodes; ++e) {
    pendulum::PendulumEpisodeOptions opt;
    opt.steps = cfg.pendulum_steps;
    opt.keep_rows = steps.has_value();
    const auto log = pendulum::run_pendulum_episode(agent, episode_seed(seed, e), cfg.pendulum, opt);

    EpisodeSummary s;
    s.episode = e + 1;
    s.score = log.mean_reward();
    s.steps = log.steps;
    s.mpc_steps = log.safety_steps;
    s.ql_steps = log.steps - log.safety_steps;
    s.violations = log.violations;
    result.episodes.push_back(s);

    if (summary) {
      *summary << s.episode << ',' << format_double(s.score) << ',' << s.steps << ',' << s.mpc_steps << ','
               << s.ql_steps << ',' << s.violations << '\n';
    }
    if (steps) {
      for (const auto& r : log.rows) {
        *steps << s.episode << ',' << r.step << ',' << format_double(r.theta) << ','
               << format_double(r.theta_dot) << ',' << mprl::to_string(r.controller) << ',' << r.action << ','
               << r.reward << ',' << (r.violation ? 1 : 0) << '\n';
      }
    }
  }
  return result;
}

inline void write_batch_summary(const BatchResult& b) {
  auto os = open_csv(*b.config.out / "summary.csv");
  const bool pend = b.config.environment == Environment::Pendulum;
  os << "episode,mean,min,max" << (pend ? ",mean_violations" : "") << '\n';
  for (const auto& st : b.per_episode) {
    os << st.episode << ',' << format_double(st.mean) << ',' << format_double(st.min) << ','
       << format_double(st.max);
    if (pend) os << ',' << format_double(st.mean_violations);
    os << '\n';
  }
}

}  // namespace detail

/// Runs every seed (a private table, agent and environment each), merges the
/// per-episode statistics and writes the CSVs when an output directory is set.
inline BatchResult run_batch(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.out) std::filesystem::create_directories(*cfg.out);

  std::vector<SeedResult> results(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  auto work = [&](std::size_t i) {
    try {
      results[i] = cfg.environment == Environment::Pong ? detail::run_pong_seed(cfg, cfg.seeds[i])
                                                        : detail::run_pendulum_seed(cfg, cfg.seeds[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  std::size_t workers = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.seeds.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < cfg.seeds.size(); i += workers) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  BatchResult b{cfg, std::move(results), {}};
  b.per_episode = summarize(b.seeds, cfg.episodes);
  if (cfg.out) detail::write_batch_summary(b);
  return b;
}

enum class SweepParam { HY, RBar, RUnderbar };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::HY: return "hy";
    case SweepParam::RBar: return "rbar";
    case SweepParam::RUnderbar: return "runderbar";
  }
  return "?";
}

inline SweepParam parse_sweep_param(const std::string& s) {
  if (s == "hy") return SweepParam::HY;
  if (s == "rbar") return SweepParam::RBar;
  if (s == "runderbar") return SweepParam::RUnderbar;
  throw InvalidConfig("unknown sweep parameter '" + s + "' (expected hy, rbar or runderbar)");
}

/// The grids swept in the reference experiments.
inline std::vector<double> default_sweep_values(SweepParam p) {
  switch (p) {
    case SweepParam::HY: return {4, 5, 6};
    case SweepParam::RBar: return {0.1, 0.3, 0.5, 0.7, 0.9};
    case SweepParam::RUnderbar: return {-0.1, -0.3, -0.5, -0.7, -0.9};
  }
  return {};
}

struct SweepPoint {
  double value = 0.0;
  BatchResult batch;
};

/// One batch per value on the same seeds. With an output directory each batch
/// goes to <out>/<param>_<value>/ and the merged curves to <out>/sweep_<param>.csv.
inline std::vector<SweepPoint> run_sweep(const RunConfig& base, SweepParam param, const std::vector<double>& values) {
  if (values.empty()) throw InvalidConfig("sweep needs at least one value");
  std::vector<SweepPoint> points;
  for (double v : values) {
    RunConfig cfg = base;
    switch (param) {
      case SweepParam::HY: cfg.mprl.h_y = v; break;
      case SweepParam::RBar: cfg.mprl.r_bar = v; break;
      case SweepParam::RUnderbar: cfg.mprl.r_underbar = v; break;
    }
    if (base.out) cfg.out = *base.out / (std::string(to_string(param)) + "_" + format_double(v));
    points.push_back({v, run_batch(cfg)});
  }
  if (base.out) {
    auto os = detail::open_csv(*base.out / ("sweep_" + std::string(to_string(param)) + ".csv"));
    os << "param,value,episode,mean,min,max\n";
    for (const auto& p : points) {
      for (const auto& st : p.batch.per_episode) {
        os << to_string(param) << ',' << format_double(p.value) << ',' << st.episode << ','
           << format_double(st.mean) << ',' << format_double(st.min) << ',' << format_double(st.max) << '\n';
      }
    }
  }
  return points;
}

/// Comma-separated list parser used by the CLI and config files.
template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    T v{};
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
      throw InvalidConfig("bad list element '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidConfig("empty list");
  return out;
}

/// key=value lines; '#' starts a comment. Later keys win.
inline std::map<std::string, std::string> read_key_values(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    kv[key] = value;
  }
  return kv;
}

namespace detail {

template <typename T>
T parse_scalar(const std::string& key, const std::string& text) {
  T v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw InvalidConfig("bad value for " + key + ": '" + text + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw InvalidConfig("bad value for " + key + ": '" + text + "'");
}

}  // namespace detail

/// Applies one key=value setting to cfg.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_scalar;
  if (key == "agent") cfg.agent = parse_agent_kind(value);
  else if (key == "episodes") cfg.episodes = parse_scalar<int>(key, value);
  else if (key == "seeds") cfg.seeds = parse_list<std::uint64_t>(value);
  else if (key == "rbar") cfg.mprl.r_bar = parse_scalar<double>(key, value);
  else if (key == "runderbar") cfg.mprl.r_underbar = parse_scalar<double>(key, value);
  else if (key == "hy") cfg.mprl.h_y = parse_scalar<double>(key, value);
  else if (key == "alpha") cfg.mprl.qcfg.alpha = parse_scalar<double>(key, value);
  else if (key == "gamma") cfg.mprl.qcfg.gamma = parse_scalar<double>(key, value);
  else if (key == "epsilon") cfg.mprl.qcfg.epsilon = parse_scalar<double>(key, value);
  else if (key == "out") cfg.out = value;
  else if (key == "dump_frames") cfg.dump_frames = detail::parse_bool(key, value);
  else if (key == "write_steps") cfg.write_steps = detail::parse_bool(key, value);
  else if (key == "threads") cfg.threads = parse_scalar<int>(key, value);
  else if (key == "steps") cfg.pendulum_steps = parse_scalar<std::int64_t>(key, value);
  else if (key == "max_steps") cfg.pong_max_steps = parse_scalar<std::int64_t>(key, value);
  else if (key == "cadence") {
    if (value == "event") cfg.mprl.cadence = EnvRewardCadence::OnEvent;
    else if (value == "step") cfg.mprl.cadence = EnvRewardCadence::EveryStep;
    else throw InvalidConfig("bad value for cadence: '" + value + "' (expected event or step)");
  } else if (key == "tie_break") {
    if (value == "smallest") cfg.mprl.qcfg.tie_break = TieBreak::SmallestId;
    else if (value == "first") cfg.mprl.qcfg.tie_break = TieBreak::FirstListed;
    else throw InvalidConfig("bad value for tie_break: '" + value + "' (expected smallest or first)");
  } else {
    throw InvalidConfig("unknown config key '" + key + "'");
  }
}

inline void apply_settings(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) apply_setting(cfg, k, v);
}

}  // namespace mprl::harness
