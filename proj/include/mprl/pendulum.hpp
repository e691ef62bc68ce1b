#pragma once

// Inverted pendulum on a cart. theta is in degrees with 180 = upright;
// theta < 180 means the pole leans toward negative cart x. The action pushes
// the cart with a fixed force (-1 left, 0 none, +1 right).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "mprl/errors.hpp"
#include "mprl/hybrid.hpp"
#include "mprl/qlearn.hpp"

namespace mprl::pendulum {

inline constexpr double kSafeLow = 135.0;
inline constexpr double kSafeHigh = 225.0;
inline constexpr double kBandLow = 175.0;
inline constexpr double kBandHigh = 185.0;

struct PendulumState {
  double theta = 180.0;      ///< degrees, [0, 360)
  double theta_dot = 0.0;    ///< degrees / second
  double cart_x = 0.0;       ///< metres
  double cart_v = 0.0;       ///< metres / second

  friend bool operator==(const PendulumState&, const PendulumState&) = default;
};

struct PendulumParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double gravity = 9.8;
  double dt = 0.02;
  int substeps = 10;
  /// Push applied to the cart per unit action, newtons.
  double force_magnitude = 50.0;
  /// Viscous friction at the pivot, 1/s (0 is frictionless).
  double pivot_damping = 0.5;
  double track_limit = 100.0;
  /// Fixed pivot: the cart never moves.
  bool pinned_cart = false;

  void validate() const {
    if (!(cart_mass > 0 && pole_mass > 0 && half_length > 0 && gravity > 0 && force_magnitude > 0 &&
          track_limit > 0))
      throw InvalidConfig("pendulum parameters must be positive");
    if (!(pivot_damping >= 0)) throw InvalidConfig("pivot_damping must be non-negative");
    if (!(dt > 0 && dt <= 0.02)) throw InvalidConfig("dt must lie in (0, 0.02]");
    if (substeps < 1) throw InvalidConfig("substeps must be >= 1");
  }
};

inline double normalize_degrees(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d -= 360.0;
  return d;
}

namespace detail {

inline constexpr double kDeg = std::numbers::pi / 180.0;

/// Pole angular acceleration (rad/s^2) and cart acceleration for lean phi (rad from upright).
inline std::pair<double, double> accelerations(double phi, double phi_dot, double force,
                                               const PendulumParams& p) {
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double friction = p.pivot_damping * phi_dot;
  if (p.pinned_cart) return {3.0 * p.gravity * s / (4.0 * p.half_length) - friction, 0.0};
  const double total = p.cart_mass + p.pole_mass;
  const double tmp = (force + p.pole_mass * p.half_length * phi_dot * phi_dot * s) / total;
  const double phi_acc =
      (p.gravity * s - c * tmp) / (p.half_length * (4.0 / 3.0 - p.pole_mass * c * c / total)) - friction;
  const double x_acc = tmp - p.pole_mass * p.half_length * phi_acc * c / total;
  return {phi_acc, x_acc};
}

}  // namespace detail

/// Semi-implicit Euler over `substeps` sub-intervals of dt.
inline PendulumState pendulum_step(const PendulumState& state, ActionId action, const PendulumParams& p = {}) {
  const double force = p.force_magnitude * action;
  double phi = (state.theta - 180.0) * detail::kDeg;
  double phi_dot = state.theta_dot * detail::kDeg;
  double x = state.cart_x;
  double v = state.cart_v;
  const double h = p.dt / p.substeps;
  for (int i = 0; i < p.substeps; ++i) {
    const auto [phi_acc, x_acc] = detail::accelerations(phi, phi_dot, force, p);
    phi_dot += h * phi_acc;
    phi += h * phi_dot;
    v += h * x_acc;
    x += h * v;
  }
  if (x > p.track_limit || x < -p.track_limit) {
    x = std::clamp(x, -p.track_limit, p.track_limit);
    v = 0.0;
  }
  return {normalize_degrees(180.0 + phi / detail::kDeg), phi_dot / detail::kDeg, x, v};
}

/// Kinetic plus potential energy of the pole about a fixed pivot (J).
inline double pinned_pole_energy(const PendulumState& s, const PendulumParams& p = {}) {
  const double w = s.theta_dot * detail::kDeg;
  const double inertia = 4.0 / 3.0 * p.pole_mass * p.half_length * p.half_length;
  const double height = -std::cos(s.theta * detail::kDeg) * p.half_length;
  return 0.5 * inertia * w * w + p.pole_mass * p.gravity * height;
}

inline bool pendulum_model_available(const PendulumState& s) {
  return s.theta <= kSafeLow || s.theta >= kSafeHigh;
}

inline bool is_violation(const PendulumState& s) { return s.theta < kSafeLow || s.theta > kSafeHigh; }

/// theta <= 135: push left; theta >= 225: push right.
inline ActionId safety_controller(const PendulumState& s) {
  if (s.theta <= kSafeLow) return -1;
  if (s.theta >= kSafeHigh) return +1;
  throw ContractViolation("safety controller consulted inside the safe region");
}

inline int pendulum_reward(const PendulumState& s) {
  return (s.theta >= kBandLow && s.theta <= kBandHigh) ? +1 : -1;
}

using PendulumQState = DiscreteState<2>;

inline constexpr int kThetaBins = 30;     ///< 3 degrees each over [135, 225]
inline constexpr int kThetaDotBins = 15;  ///< over [-90, 90] deg/s
inline constexpr double kThetaDotLimit = 90.0;

inline PendulumQState discretize_pendulum(const PendulumState& s) {
  const double tb = std::floor((s.theta - kSafeLow) / 3.0);
  const double wb = std::floor((s.theta_dot + kThetaDotLimit) / (2.0 * kThetaDotLimit / kThetaDotBins));
  return {static_cast<int>(std::clamp(tb, 0.0, kThetaBins - 1.0)),
          static_cast<int>(std::clamp(wb, 0.0, kThetaDotBins - 1.0))};
}

/// Start near upright: theta ~ U[175,185], theta_dot ~ U[-5,5].
inline PendulumState initial_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> th(175.0, 185.0);
  std::uniform_real_distribution<double> w(-5.0, 5.0);
  PendulumState s;
  s.theta = th(rng);
  s.theta_dot = w(rng);
  return s;
}

struct PendulumStepRow {
  std::int64_t step = 0;
  double theta = 0.0;
  double theta_dot = 0.0;
  Controller controller = Controller::Ql;
  ActionId action = 0;
  int reward = 0;
  bool violation = false;
};

struct PendulumEpisodeLog {
  std::vector<PendulumStepRow> rows;
  std::int64_t steps = 0;
  std::int64_t violations = 0;
  std::int64_t safety_steps = 0;
  double total_reward = 0.0;

  [[nodiscard]] double mean_reward() const { return steps ? total_reward / steps : 0.0; }
};

/// Handover loop for the pole: the safety rule acts outside the safe region,
/// the Q-learner inside. Q-learner decisions are updated every step with the
/// band reward of the state they led to.
class PendulumAgent {
 public:
  PendulumAgent(AgentKind kind, MprlConfig cfg, QTable<2>& table, std::uint64_t seed)
      : learner_(kind, cfg, table, seed) {}

  [[nodiscard]] AgentKind kind() const noexcept { return learner_.kind(); }

  void begin_episode() { learner_.begin_episode(); }

  StepRecord<2> act(const PendulumState& s, std::int64_t k) {
    std::optional<ActionId> u;
    if (pendulum_model_available(s)) u = safety_controller(s);
    return learner_.decide(k, discretize_pendulum(s), u);
  }

  void learn(const StepRecord<2>& rec, const PendulumState& next, int reward) {
    if (rec.controller != Controller::Ql || kind() == AgentKind::MpcOnly) return;
    q_update(learner_.table(), rec.state, rec.applied, reward, discretize_pendulum(next), learner_.config().qcfg);
  }

 private:
  HybridLearner<2> learner_;
};

struct PendulumEpisodeOptions {
  std::int64_t steps = 2000;
  bool keep_rows = true;
};

inline PendulumEpisodeLog run_pendulum_episode(PendulumAgent& agent, std::uint64_t env_seed,
                                               const PendulumParams& params = {},
                                               const PendulumEpisodeOptions& opt = {}) {
  params.validate();
  PendulumEpisodeLog log;
  std::mt19937_64 rng(env_seed);
  PendulumState state = initial_state(rng);
  agent.begin_episode();
  for (std::int64_t k = 0; k < opt.steps; ++k) {
    const StepRecord<2> rec = agent.act(state, k);
    const PendulumState next = pendulum_step(state, rec.applied, params);
    const int r = pendulum_reward(next);
    agent.learn(rec, next, r);
    state = next;

    const bool violated = is_violation(state);
    ++log.steps;
    log.total_reward += r;
    if (violated) ++log.violations;
    if (rec.controller == Controller::Mpc) ++log.safety_steps;
    if (opt.keep_rows) log.rows.push_back({k, state.theta, state.theta_dot, rec.controller, rec.applied, r, violated});
  }
  return log;
}

}  // namespace mprl::pendulum
