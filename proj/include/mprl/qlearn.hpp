#pragma once

// Tabular Q-learning: sparse default-zero value storage, the one-step
// temporal-difference update and greedy / epsilon-greedy selection.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mprl/errors.hpp"

namespace mprl {

using ActionId = int;

/// Ordered, duplicate-free list of admissible actions.
class ActionSet {
 public:
  ActionSet() = default;
  ActionSet(std::initializer_list<ActionId> ids) : ids_(ids) { dedupe(); }
  explicit ActionSet(std::vector<ActionId> ids) : ids_(std::move(ids)) { dedupe(); }

  [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] bool contains(ActionId a) const noexcept {
    return std::find(ids_.begin(), ids_.end(), a) != ids_.end();
  }
  [[nodiscard]] ActionId operator[](std::size_t i) const { return ids_.at(i); }
  [[nodiscard]] auto begin() const noexcept { return ids_.begin(); }
  [[nodiscard]] auto end() const noexcept { return ids_.end(); }

  friend bool operator==(const ActionSet&, const ActionSet&) = default;

 private:
  void dedupe() {
    std::vector<ActionId> out;
    for (ActionId a : ids_) {
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
    ids_ = std::move(out);
  }

  std::vector<ActionId> ids_;
};

/// {-1, 0, +1}: paddle up/stay/down, cart left/stay/right.
inline ActionSet ternary_actions() { return ActionSet{-1, 0, +1}; }

template <std::size_t N>
using DiscreteState = std::array<int, N>;

/// Rounds to the nearest integer, halves away from zero (2.5 -> 3, -2.5 -> -3).
inline int round_half_away(double v) { return static_cast<int>(std::round(v)); }

enum class TieBreak {
  SmallestId,   ///< among maximisers, the numerically smallest action id
  FirstListed,  ///< among maximisers, the first in action-set order
};

struct QConfig {
  double alpha = 0.7;
  double gamma = 0.7;
  double epsilon = 0.0;
  TieBreak tie_break = TieBreak::SmallestId;
  /// Optional decay hook: epsilon_at(k) = max(epsilon_min, epsilon * decay^k).
  double epsilon_decay = 1.0;
  double epsilon_min = 0.0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidConfig("alpha must lie in [0,1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidConfig("gamma must lie in [0,1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidConfig("epsilon must lie in [0,1]");
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
      throw InvalidConfig("epsilon_decay must lie in (0,1]");
  }

  [[nodiscard]] double epsilon_at(std::uint64_t k) const {
    if (epsilon_decay == 1.0) return epsilon;
    return std::max(epsilon_min, epsilon * std::pow(epsilon_decay, static_cast<double>(k)));
  }
};

/// Sparse Q(s, a). Entries that were never written read as exactly 0.
template <std::size_t N>
class QTable {
 public:
  using State = DiscreteState<N>;

  struct Key {
    State state;
    ActionId action;
    friend bool operator==(const Key&, const Key&) = default;
    friend auto operator<=>(const Key&, const Key&) = default;
  };

  explicit QTable(ActionSet actions = ternary_actions()) : actions_(std::move(actions)) {
    if (actions_.empty()) throw EmptyActionSet();
  }

  [[nodiscard]] const ActionSet& actions() const noexcept { return actions_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  [[nodiscard]] double value(const State& s, ActionId a) const {
    auto it = values_.find(Key{s, a});
    return it == values_.end() ? 0.0 : it->second;
  }

  void set(const State& s, ActionId a, double v) { values_[Key{s, a}] = v; }

  [[nodiscard]] bool contains(const State& s, ActionId a) const {
    return values_.find(Key{s, a}) != values_.end();
  }

  /// max over the table's action set; an unseen row gives 0.
  [[nodiscard]] double max_value(const State& s) const {
    double best = -std::numeric_limits<double>::infinity();
    for (ActionId a : actions_) best = std::max(best, value(s, a));
    return best;
  }

  /// Entries sorted by (state, action), the snapshot order.
  [[nodiscard]] std::vector<std::pair<Key, double>> sorted_entries() const {
    std::vector<std::pair<Key, double>> out(values_.begin(), values_.end());
    std::sort(out.begin(), out.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    return out;
  }

  friend bool operator==(const QTable& l, const QTable& r) {
    return l.actions_ == r.actions_ && l.values_ == r.values_;
  }

  /// One line per entry: `s1,...,sn;a;value`, sorted by key.
  void save(std::ostream& os) const {
    char buf[64];
    for (const auto& [key, v] : sorted_entries()) {
      for (std::size_t i = 0; i < N; ++i) {
        if (i) os << ',';
        os << key.state[i];
      }
      auto res = std::to_chars(buf, buf + sizeof(buf), v);
      os << ';' << key.action << ';' << std::string_view(buf, res.ptr - buf) << '\n';
    }
  }

  static QTable load(std::istream& is, ActionSet actions = ternary_actions()) {
    QTable table(std::move(actions));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto bad = [&] { return InvalidConfig("malformed Q snapshot line " + std::to_string(lineno)); };
      auto semi1 = line.find(';');
      auto semi2 = line.find(';', semi1 == std::string::npos ? semi1 : semi1 + 1);
      if (semi1 == std::string::npos || semi2 == std::string::npos) throw bad();
      State s{};
      std::size_t pos = 0;
      for (std::size_t i = 0; i < N; ++i) {
        auto stop = (i + 1 < N) ? line.find(',', pos) : semi1;
        if (stop == std::string::npos || stop > semi1) throw bad();
        if (std::from_chars(line.data() + pos, line.data() + stop, s[i]).ec != std::errc{}) throw bad();
        pos = stop + 1;
      }
      if (pos != semi1 + 1) throw bad();
      ActionId a{};
      double v{};
      if (std::from_chars(line.data() + semi1 + 1, line.data() + semi2, a).ec != std::errc{}) throw bad();
      if (std::from_chars(line.data() + semi2 + 1, line.data() + line.size(), v).ec != std::errc{})
        throw bad();
      table.set(s, a, v);
    }
    return table;
  }

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::size_t h = std::hash<int>{}(k.action);
      for (int c : k.state) h ^= std::hash<int>{}(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };

  ActionSet actions_;
  std::unordered_map<Key, double, KeyHash> values_;
};

/// Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')). Returns the new value.
template <std::size_t N>
double q_update(QTable<N>& table, const DiscreteState<N>& s, ActionId a, double r,
                const DiscreteState<N>& s_next, const QConfig& cfg) {
  const double target = r + cfg.gamma * table.max_value(s_next);
  const double updated = (1.0 - cfg.alpha) * table.value(s, a) + cfg.alpha * target;
  table.set(s, a, updated);
  return updated;
}

/// Update for a transition that ends the episode segment: no bootstrap term.
template <std::size_t N>
double q_update_terminal(QTable<N>& table, const DiscreteState<N>& s, ActionId a, double r,
                         const QConfig& cfg) {
  const double updated = (1.0 - cfg.alpha) * table.value(s, a) + cfg.alpha * r;
  table.set(s, a, updated);
  return updated;
}

template <std::size_t N>
ActionId greedy_action(const QTable<N>& table, const DiscreteState<N>& s, const ActionSet& actions,
                       TieBreak tie = TieBreak::SmallestId) {
  if (actions.empty()) throw EmptyActionSet();
  ActionId best = actions[0];
  double best_v = table.value(s, best);
  for (std::size_t i = 1; i < actions.size(); ++i) {
    const ActionId a = actions[i];
    const double v = table.value(s, a);
    if (v > best_v || (v == best_v && tie == TieBreak::SmallestId && a < best)) {
      best = a;
      best_v = v;
    }
  }
  return best;
}

/// Greedy with probability 1 - epsilon, otherwise uniform over the whole action set.
template <std::size_t N, std::uniform_random_bit_generator Rng>
ActionId epsilon_greedy_action(const QTable<N>& table, const DiscreteState<N>& s,
                               const ActionSet& actions, const QConfig& cfg, Rng& rng,
                               std::uint64_t step = 0) {
  if (actions.empty()) throw EmptyActionSet();
  const double eps = cfg.epsilon_at(step);
  if (eps <= 0.0) return greedy_action(table, s, actions, cfg.tie_break);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < eps) {
    std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
    return actions[pick(rng)];
  }
  return greedy_action(table, s, actions, cfg.tie_break);
}

}  // namespace mprl
