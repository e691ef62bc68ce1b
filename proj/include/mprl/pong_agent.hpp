#pragma once

// Pong player built on the handover loop: pixels in, paddle action out.
// MPC defends when the ball is approaching and its predicted arrival is more
// than H_y rows away from the paddle; the Q-learner plays everything else.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mprl/ballmodel.hpp"
#include "mprl/hybrid.hpp"
#include "mprl/mpc.hpp"
#include "mprl/pong.hpp"
#include "mprl/qlearn.hpp"
#include "mprl/vision.hpp"

namespace mprl::pong {

/// (ball x, ball y, v_x, v_y, paddle y) in agent-frame pixels.
using QState = DiscreteState<5>;
using QTable5 = QTable<5>;

/// Paddle actions with "stay" listed first: under FirstListed tie-breaking an
/// unvisited state holds the paddle still instead of running it into a wall.
inline ActionSet pong_actions() { return ActionSet{0, -1, +1}; }

/// Pong defaults: greedy, alpha = gamma = 0.7, ties to the first listed action.
inline MprlConfig pong_default_config() {
  MprlConfig cfg;
  cfg.qcfg.tie_break = TieBreak::FirstListed;
  return cfg;
}

/// Raster centroid to the agent frame (x measured from the agent's side).
inline Centroid to_agent_frame(Centroid raster) { return {(kSize - 1) - raster.x, raster.y}; }

/// Agent-frame abscissa of the ball centroid when it touches the agent paddle.
inline double agent_frame_plane(const PongParams& p) { return (kSize - 1) - p.agent_plane(); }

/// Predicted interception (T, y) when the track shows the ball approaching.
inline std::optional<Arrival> predict_defense(const BallTrack& track, const PongParams& p = {},
                                              int t_max = kDefaultHorizonCap) {
  if (!track.valid()) return std::nullopt;
  const auto vel = estimate_velocity(track);
  if (!(vel.v_x < 0.0)) return std::nullopt;
  try {
    return predict_arrival(track.p_t(), vel, agent_frame_plane(p), p.y_min(), p.y_max(), t_max);
  } catch (const NoImpact&) {
    return std::nullopt;
  } catch (const HorizonExceeded&) {
    return std::nullopt;
  }
}

struct ModelCheck {
  bool available = false;
  std::optional<Arrival> arrival;
};

/// Valid track, v_x < 0, a prediction exists and |y_arrival - paddle_y| > H_y.
inline ModelCheck model_available(const BallTrack& track, double paddle_y, const MprlConfig& cfg,
                                  const PongParams& p = {}, int t_max = kDefaultHorizonCap) {
  auto arrival = predict_defense(track, p, t_max);
  if (!arrival || !(std::abs(arrival->y - paddle_y) > cfg.h_y)) return {};
  return {true, arrival};
}

inline QState encode_state(const std::optional<Centroid>& ball, const std::optional<VelocityEstimate>& vel,
                           double paddle_y) {
  const int py = static_cast<int>(std::floor(paddle_y));
  if (!ball) return {-1, -1, 0, 0, py};
  const int vx = vel ? round_half_away(vel->v_x) : 0;
  const int vy = vel ? round_half_away(vel->v_y) : 0;
  return {static_cast<int>(std::floor(ball->x)), static_cast<int>(std::floor(ball->y)), vx, vy, py};
}

/// A Q-learner decision awaiting its environment reward.
struct QlTransition {
  QState state{};
  ActionId action = 0;
  std::optional<QState> next;  ///< empty: the point ended the rally before a successor was seen
};

/// Temporal-difference update with the game reward on a remembered Q-learner transition.
/// Returns false (no update) when no point was scored.
inline bool learn_from_env_reward(QTable5& table, const QlTransition& t, int env_reward,
                                  const QConfig& cfg) {
  if (env_reward == 0) return false;
  if (t.next) {
    q_update(table, t.state, t.action, env_reward, *t.next, cfg);
  } else {
    q_update_terminal(table, t.state, t.action, env_reward, cfg);
  }
  return true;
}

class PongAgent {
 public:
  PongAgent(AgentKind kind, MprlConfig cfg, QTable5& table, std::uint64_t seed, PongParams params = {})
      : learner_(kind, cfg, table, seed), params_(params) {}

  [[nodiscard]] AgentKind kind() const noexcept { return learner_.kind(); }
  [[nodiscard]] const BallTrack& track() const noexcept { return track_; }

  void begin_episode() {
    learner_.begin_episode();
    track_.reset();
    prior_.reset();
    pending_.reset();
  }

  /// One handover step from the current frame.
  StepRecord<5> act(const Frame& frame, std::int64_t k) {
    const double paddle_y = vision::find_paddle(frame);
    std::optional<Centroid> ball;
    try {
      const Centroid raster = vision::find_ball(frame, prior_);
      prior_ = raster;
      ball = to_agent_frame(raster);
      track_.push(*ball);
    } catch (const BallNotFound&) {
      prior_.reset();
      track_.reset();
    }
    std::optional<VelocityEstimate> vel;
    if (track_.valid()) vel = estimate_velocity(track_);
    const QState s = encode_state(ball, vel, paddle_y);

    if (pending_ && !pending_->next) {
      pending_->next = s;
      if (learner_.config().cadence == EnvRewardCadence::EveryStep) {
        q_update(learner_.table(), pending_->state, pending_->action, 0.0, s, learner_.config().qcfg);
        pending_.reset();
      }
    }

    std::optional<ActionId> u;
    const std::optional<Arrival> arrival = predict_defense(track_, params_);
    if (arrival) {
      const bool engage = kind() == AgentKind::MpcOnly ||
                          std::abs(arrival->y - paddle_y) > learner_.config().h_y;
      if (engage) u = solve_pong_paddle(paddle_y, arrival->y, arrival->steps);
    }

    StepRecord<5> rec = learner_.decide(k, s, u);
    if (rec.controller == Controller::Ql && kind() != AgentKind::MpcOnly) {
      pending_ = QlTransition{s, rec.applied, std::nullopt};
    }
    return rec;
  }

  /// Environment feedback for the step just taken.
  void observe(int env_reward) {
    if (env_reward == 0) return;
    if (pending_ && kind() != AgentKind::MpcOnly) {
      learn_from_env_reward(learner_.table(), *pending_, env_reward, learner_.config().qcfg);
      pending_.reset();
    }
    // re-serve: the ball jumps to the centre
    track_.reset();
    prior_.reset();
  }

 private:
  HybridLearner<5> learner_;
  PongParams params_;
  BallTrack track_;
  std::optional<Centroid> prior_;
  std::optional<QlTransition> pending_;
};

struct PongStepRow {
  StepRecord<5> record;
  int score_agent = 0;
  int score_opponent = 0;
};

struct PongEpisodeLog {
  std::vector<PongStepRow> rows;
  int score_agent = 0;
  int score_opponent = 0;
  std::int64_t steps = 0;
  std::int64_t mpc_steps = 0;
  std::int64_t ql_steps = 0;
  std::int64_t agreements = 0;
  bool truncated = false;

  [[nodiscard]] int game_reward() const { return score_agent - score_opponent; }
};

struct EpisodeOptions {
  int episode_index = 0;
  std::int64_t max_steps = 200000;  ///< guard against endless rallies
  std::optional<std::filesystem::path> frame_dir;
  bool keep_rows = true;
};

inline PongEpisodeLog run_episode(PongAgent& agent, std::uint64_t env_seed, const PongParams& params = {},
                                  const EpisodeOptions& opt = {}) {
  PongEpisodeLog log;
  PongState state = reset(env_seed, params);
  agent.begin_episode();
  while (!episode_over(state)) {
    if (log.steps >= opt.max_steps) {
      log.truncated = true;
      break;
    }
    const Frame frame = render(state, params);
    if (opt.frame_dir) write_pgm(*opt.frame_dir / frame_filename(opt.episode_index, log.steps), frame);
    StepRecord<5> rec = agent.act(frame, log.steps);
    StepResult res = step(state, rec.applied, params);
    agent.observe(res.reward);
    rec.env_reward = res.reward;
    state = std::move(res.state);

    ++log.steps;
    if (rec.controller == Controller::Mpc) {
      ++log.mpc_steps;
      if (rec.ql_action && rec.ql_action == rec.mpc_action) ++log.agreements;
    } else {
      ++log.ql_steps;
    }
    if (opt.keep_rows) log.rows.push_back({rec, state.score_agent, state.score_opponent});
  }
  log.score_agent = state.score_agent;
  log.score_opponent = state.score_opponent;
  return log;
}

}  // namespace mprl::pong
