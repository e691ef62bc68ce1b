#pragma once

// Deterministic, seedable Pong rendered straight to an 80x80 single-channel
// frame. Raster coordinates: x is the column (agent paddle on the right),
// y is the row (grows downward). Ball and paddle positions are sprite
// centroids; with the default geometry they stay on half-integers.

#include <array>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>

#include "mprl/ballmodel.hpp"
#include "mprl/errors.hpp"
#include "mprl/qlearn.hpp"

namespace mprl::pong {

inline constexpr int kSize = 80;
inline constexpr int kWinningScore = 21;

inline constexpr std::uint8_t kBackground = 144;
inline constexpr std::uint8_t kOpponentPaddle = 213;
inline constexpr std::uint8_t kAgentPaddle = 92;
inline constexpr std::uint8_t kBall = 236;

class Frame {
 public:
  Frame() { pixels_.fill(0); }
  explicit Frame(std::uint8_t fill) { pixels_.fill(fill); }

  [[nodiscard]] std::uint8_t at(int row, int col) const { return pixels_[index(row, col)]; }
  std::uint8_t& at(int row, int col) { return pixels_[index(row, col)]; }

  [[nodiscard]] const std::array<std::uint8_t, kSize * kSize>& data() const noexcept { return pixels_; }

  [[nodiscard]] int count(std::uint8_t value) const {
    return static_cast<int>(std::count(pixels_.begin(), pixels_.end(), value));
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  static std::size_t index(int row, int col) { return static_cast<std::size_t>(row) * kSize + col; }
  std::array<std::uint8_t, kSize * kSize> pixels_;
};

struct PongParams {
  int agent_column = 70;
  int opponent_column = 9;
  double paddle_half = 3.5;     ///< 8-pixel bar
  double ball_half = 0.5;       ///< 2x2 sprite
  double paddle_speed = 1.0;
  /// Paddle hits the ball iff |ball_y - paddle_y| <= contact_radius.
  double contact_radius = 4.0;
  double max_vy = 3.0;
  int opponent_lag = 2;
  /// Opponent lines up this many rows off-centre to angle its return away from the agent.
  double opponent_aim = 2.0;
  /// Probability that a paddle hit also nudges v_y by one row (random sign); 0 is noiseless.
  double spin_probability = 0.1;
  /// Opponent lines up on the ball's folded arrival row instead of its current row.
  bool opponent_predicts = true;
  /// Every this many paddle hits in one rally |v_x| grows by one, up to max_vx (0 disables).
  int speedup_hits = 4;
  double max_vx = 3.0;

  [[nodiscard]] double y_min() const { return ball_half; }
  [[nodiscard]] double y_max() const { return kSize - 1 - ball_half; }
  [[nodiscard]] double paddle_min() const { return paddle_half; }
  [[nodiscard]] double paddle_max() const { return kSize - 1 - paddle_half; }
  /// Ball centroid column at which it touches the agent paddle.
  [[nodiscard]] double agent_plane() const { return agent_column - 1 - ball_half; }
  [[nodiscard]] double opponent_plane() const { return opponent_column + 1 + ball_half; }
  [[nodiscard]] double centre() const { return (kSize - 1) / 2.0; }
};

struct PongState {
  Centroid ball;
  double vx = 0.0;
  double vy = 0.0;
  double agent_y = 0.0;
  double opponent_y = 0.0;
  int score_agent = 0;
  int score_opponent = 0;
  std::int64_t step_index = 0;
  int opponent_timer = 0;  ///< consecutive steps the ball has spent in the opponent half
  int rally_hits = 0;      ///< paddle hits since the last serve
  std::mt19937_64 rng;

  friend bool operator==(const PongState&, const PongState&) = default;
};

enum class GameEvent { None, AgentScored, OpponentScored, AgentBounce, OpponentBounce, WallBounce };

inline const char* to_string(GameEvent e) {
  switch (e) {
    case GameEvent::None: return "none";
    case GameEvent::AgentScored: return "agent_scored";
    case GameEvent::OpponentScored: return "opponent_scored";
    case GameEvent::AgentBounce: return "agent_bounce";
    case GameEvent::OpponentBounce: return "opponent_bounce";
    case GameEvent::WallBounce: return "wall_bounce";
  }
  return "?";
}

struct StepResult {
  PongState state;
  GameEvent event = GameEvent::None;
  int reward = 0;
};

/// Ball to the centre, paddles centred, serve velocity from {+-1,+-2} x {-1,0,+1}.
inline void serve(PongState& s, const PongParams& p) {
  std::uniform_int_distribution<int> pick_vx(0, 3);
  std::uniform_int_distribution<int> pick_vy(-1, 1);
  static constexpr std::array<int, 4> kVx{-2, -1, 1, 2};
  s.vx = kVx[pick_vx(s.rng)];
  s.vy = pick_vy(s.rng);
  s.ball = {p.centre(), p.centre()};
  s.agent_y = p.centre();
  s.opponent_y = p.centre();
  s.opponent_timer = 0;
  s.rally_hits = 0;
}

inline PongState reset(std::uint64_t seed, const PongParams& p = {}) {
  PongState s;
  s.rng.seed(seed);
  serve(s, p);
  return s;
}

inline bool episode_over(const PongState& s) {
  return s.score_agent >= kWinningScore || s.score_opponent >= kWinningScore;
}

/// Tracks the ball (offset by the aiming margin) once it has been in the
/// opponent's half for `opponent_lag` steps; still otherwise. Moves only when
/// the target is more than one row away.
inline ActionId opponent_policy(const PongState& s, const PongParams& p = {}) {
  const bool in_half = s.ball.x < p.centre();
  if (!in_half || s.opponent_timer < p.opponent_lag) return 0;
  // hit off-centre so the deflection sends the ball away from the agent paddle
  double aim_y = s.ball.y;
  if (p.opponent_predicts && s.vx < 0.0) {
    const double t = std::ceil((s.ball.x - p.opponent_plane()) / -s.vx);
    aim_y = fold_into(s.ball.y + t * s.vy, p.y_min(), p.y_max());
  }
  const double away = s.agent_y > aim_y ? -1.0 : 1.0;
  const double target = aim_y - away * p.opponent_aim;
  const double diff = target - s.opponent_y;
  if (diff > 1.0) return +1;
  if (diff < -1.0) return -1;
  return 0;
}

namespace detail {

inline double deflect(double vy, double offset, const PongParams& p) {
  const double v = vy + round_half_away(offset / 2.0);
  return std::clamp(v, -p.max_vy, p.max_vy);
}

inline void count_hit(PongState& s, const PongParams& p) {
  ++s.rally_hits;
  if (p.speedup_hits <= 0 || s.rally_hits % p.speedup_hits != 0) return;
  const double speed = std::min(std::abs(s.vx) + 1.0, p.max_vx);
  s.vx = s.vx < 0.0 ? -speed : speed;
}

inline void spin(PongState& s, const PongParams& p) {
  if (p.spin_probability <= 0.0) return;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(s.rng) >= p.spin_probability) return;
  std::uniform_int_distribution<int> sign(0, 1);
  s.vy = std::clamp(s.vy + (sign(s.rng) ? 1.0 : -1.0), -p.max_vy, p.max_vy);
}

}  // namespace detail

inline StepResult step(const PongState& state, ActionId agent_action, const PongParams& p = {}) {
  if (episode_over(state)) throw StepAfterTerminal();
  StepResult out{state, GameEvent::None, 0};
  PongState& s = out.state;

  const ActionId opp = opponent_policy(state, p);
  s.agent_y = std::clamp(s.agent_y + p.paddle_speed * agent_action, p.paddle_min(), p.paddle_max());
  s.opponent_y = std::clamp(s.opponent_y + p.paddle_speed * opp, p.paddle_min(), p.paddle_max());

  s.ball.x += s.vx;
  s.ball.y += s.vy;
  if (s.ball.y < p.y_min()) {
    s.ball.y = 2.0 * p.y_min() - s.ball.y;
    s.vy = -s.vy;
    out.event = GameEvent::WallBounce;
  } else if (s.ball.y > p.y_max()) {
    s.ball.y = 2.0 * p.y_max() - s.ball.y;
    s.vy = -s.vy;
    out.event = GameEvent::WallBounce;
  }

  if (s.vx > 0.0 && s.ball.x >= p.agent_plane()) {
    const double offset = s.ball.y - s.agent_y;
    if (std::abs(offset) <= p.contact_radius) {
      s.ball.x = 2.0 * p.agent_plane() - s.ball.x;
      s.vx = -s.vx;
      s.vy = detail::deflect(s.vy, offset, p);
      detail::spin(s, p);
      detail::count_hit(s, p);
      out.event = GameEvent::AgentBounce;
    } else {
      ++s.score_opponent;
      out.event = GameEvent::OpponentScored;
      out.reward = -1;
      serve(s, p);
    }
  } else if (s.vx < 0.0 && s.ball.x <= p.opponent_plane()) {
    const double offset = s.ball.y - s.opponent_y;
    if (std::abs(offset) <= p.contact_radius) {
      s.ball.x = 2.0 * p.opponent_plane() - s.ball.x;
      s.vx = -s.vx;
      s.vy = detail::deflect(s.vy, offset, p);
      detail::spin(s, p);
      detail::count_hit(s, p);
      out.event = GameEvent::OpponentBounce;
    } else {
      ++s.score_agent;
      out.event = GameEvent::AgentScored;
      out.reward = +1;
      serve(s, p);
    }
  }

  s.opponent_timer = s.ball.x < p.centre() ? s.opponent_timer + 1 : 0;
  ++s.step_index;
  return out;
}

namespace detail {

inline void fill_rect(Frame& f, int row0, int rows, int col0, int cols, std::uint8_t v) {
  for (int r = std::max(row0, 0); r < std::min(row0 + rows, kSize); ++r) {
    for (int c = std::max(col0, 0); c < std::min(col0 + cols, kSize); ++c) f.at(r, c) = v;
  }
}

}  // namespace detail

/// Background 144, opponent bar 213, agent bar 92, ball 236 (2x2), clipped to the frame.
/// Half-integer centroids are reproduced exactly by the rasterised sprite.
inline Frame render(const PongState& s, const PongParams& p = {}) {
  Frame f(kBackground);
  const int bar = static_cast<int>(2 * p.paddle_half + 1);
  const int bar_lift = static_cast<int>(p.paddle_half - 0.5);
  detail::fill_rect(f, static_cast<int>(std::floor(s.opponent_y)) - bar_lift, bar, p.opponent_column, 1,
                    kOpponentPaddle);
  detail::fill_rect(f, static_cast<int>(std::floor(s.agent_y)) - bar_lift, bar, p.agent_column, 1,
                    kAgentPaddle);
  detail::fill_rect(f, static_cast<int>(std::floor(s.ball.y)), 2, static_cast<int>(std::floor(s.ball.x)), 2,
                    kBall);
  return f;
}

/// Binary PGM (P5), 80x80, maxval 255.
inline void write_pgm(std::ostream& os, const Frame& f) {
  os << "P5\n" << kSize << ' ' << kSize << "\n255\n";
  os.write(reinterpret_cast<const char*>(f.data().data()), static_cast<std::streamsize>(f.data().size()));
}

inline void write_pgm(const std::filesystem::path& path, const Frame& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_pgm(os, f);
}

inline std::string frame_filename(int episode, std::int64_t step) {
  return "ep" + std::to_string(episode) + "_step" + std::to_string(step) + ".pgm";
}

}  // namespace mprl::pong
