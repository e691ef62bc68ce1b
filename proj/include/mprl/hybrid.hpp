#pragma once

// The MPC/Q-learning handover loop shared by every testbed.
//
// Each step the caller reports the discrete state and, when a model is
// available, the MPC action u_k. The learner then either applies u_k (and,
// if the previous step was MPC-controlled too, rewards Q(s_{k-1}, u_{k-1})
// with r_bar when the Q-learner agreed with MPC, r_underbar otherwise) or
// applies the Q-learner's own action.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "mprl/errors.hpp"
#include "mprl/qlearn.hpp"

namespace mprl {

enum class AgentKind { Mprl, QOnly, MpcOnly };
enum class Controller { Mpc, Ql };

inline const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Mprl: return "mprl";
    case AgentKind::QOnly: return "q";
    case AgentKind::MpcOnly: return "mpc";
  }
  return "?";
}

inline AgentKind parse_agent_kind(const std::string& s) {
  if (s == "mprl") return AgentKind::Mprl;
  if (s == "q" || s == "q_only") return AgentKind::QOnly;
  if (s == "mpc" || s == "mpc_only") return AgentKind::MpcOnly;
  throw InvalidConfig("unknown agent '" + s + "' (expected mprl, q or mpc)");
}

inline const char* to_string(Controller c) { return c == Controller::Mpc ? "MPC" : "QL"; }

/// When the environment reward reaches the Q-table.
enum class EnvRewardCadence {
  OnEvent,    ///< only when the environment pays a non-zero reward
  EveryStep,  ///< every Q-learner step, zero reward included
};

struct MprlConfig {
  double r_bar = 0.1;
  double r_underbar = 0.0;
  double h_y = 5.0;
  QConfig qcfg;
  EnvRewardCadence cadence = EnvRewardCadence::OnEvent;

  void validate() const {
    if (!(r_bar > 0.0)) throw InvalidConfig("r_bar must be positive");
    if (!(r_underbar <= 0.0)) throw InvalidConfig("r_underbar must be non-positive");
    if (!(h_y > 0.0)) throw InvalidConfig("H_y must be positive");
    qcfg.validate();
  }
};

template <std::size_t N>
struct StepRecord {
  std::int64_t step_index = 0;
  DiscreteState<N> state{};
  std::optional<ActionId> mpc_action;
  std::optional<ActionId> ql_action;
  ActionId applied = 0;
  Controller controller = Controller::Ql;
  std::optional<double> shaped_reward;
  double env_reward = 0.0;
};

template <std::size_t N>
class HybridLearner {
 public:
  using State = DiscreteState<N>;

  HybridLearner(AgentKind kind, MprlConfig cfg, QTable<N>& table, std::uint64_t seed)
      : kind_(kind), cfg_(cfg), table_(&table), rng_(seed) {
    cfg_.validate();
  }

  [[nodiscard]] AgentKind kind() const noexcept { return kind_; }
  [[nodiscard]] const MprlConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] QTable<N>& table() noexcept { return *table_; }

  /// Drops the k-1 context (episode boundary).
  void begin_episode() noexcept { previous_.reset(); }

  /// One pass of the handover loop. `mpc_action` is set iff the model is available.
  StepRecord<N> decide(std::int64_t k, const State& s, std::optional<ActionId> mpc_action,
                       ActionId idle_action = 0) {
    StepRecord<N> rec;
    rec.step_index = k;
    rec.state = s;
    const bool model = mpc_action.has_value() && kind_ != AgentKind::QOnly;

    if (model) {
      rec.controller = Controller::Mpc;
      rec.mpc_action = mpc_action;
      if (kind_ == AgentKind::Mprl) {
        if (previous_ && previous_->controller == Controller::Mpc) {
          const bool agreed = previous_->ql_action == previous_->mpc_action;
          const double r = agreed ? cfg_.r_bar : cfg_.r_underbar;
          q_update(*table_, previous_->state, *previous_->mpc_action, r, s, cfg_.qcfg);
          rec.shaped_reward = r;
        }
        rec.ql_action = policy(s);
      }
      rec.applied = *mpc_action;
    } else {
      rec.controller = Controller::Ql;
      if (kind_ == AgentKind::MpcOnly) {
        rec.applied = idle_action;
      } else {
        rec.ql_action = policy(s);
        rec.applied = *rec.ql_action;
      }
    }
    previous_ = rec;
    ++decisions_;
    return rec;
  }

  /// Q-learner's action for s under the configured (epsilon-)greedy policy.
  ActionId policy(const State& s) {
    return epsilon_greedy_action(*table_, s, table_->actions(), cfg_.qcfg, rng_, decisions_);
  }

 private:
  AgentKind kind_;
  MprlConfig cfg_;
  QTable<N>* table_;
  std::mt19937_64 rng_;
  std::optional<StepRecord<N>> previous_;
  std::uint64_t decisions_ = 0;
};

}  // namespace mprl
