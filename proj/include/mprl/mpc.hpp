#pragma once

// Certainty-equivalent receding-horizon control over finite action sets.
//
//   argmin_{u_0..u_{T-1} in A}  sum_t J(x_t, u_t, t) + J_T(x_T)
//   s.t. x_{t+1} = A x_t + D + C u_t,  x_t in box
//
// Additive zero-mean noise only shifts a quadratic cost by a constant, so the
// problem is solved on the mean dynamics. Only u_0 is returned; callers
// re-solve every step from the fresh state.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mprl/errors.hpp"
#include "mprl/qlearn.hpp"

namespace mprl {

struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  Eigen::VectorXd D;
  Eigen::VectorXd noise_variance;

  [[nodiscard]] Eigen::Index state_dim() const { return A.rows(); }
  [[nodiscard]] Eigen::Index input_dim() const { return C.cols(); }

  void validate() const {
    const auto n = A.rows();
    if (n == 0 || A.cols() != n) throw InvalidConfig("A must be square and non-empty");
    if (C.rows() != n) throw InvalidConfig("C must have as many rows as A");
    if (D.size() != n) throw InvalidConfig("D must match the state dimension");
    if (noise_variance.size() != 0 && noise_variance.size() != n)
      throw InvalidConfig("noise variance must match the state dimension");
    if (noise_variance.size() != 0 && (noise_variance.array() < 0.0).any())
      throw InvalidConfig("noise variance must be non-negative");
  }

  [[nodiscard]] Eigen::VectorXd next(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return A * x + D + C * u;
  }
};

struct StateBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  [[nodiscard]] bool contains(const Eigen::VectorXd& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
};

struct HorizonCost {
  /// J_t(x_t, u_t); may be empty.
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, int)> stage;
  /// J_T(x_T); may be empty.
  std::function<double(const Eigen::VectorXd&)> terminal;
};

inline constexpr std::size_t kDefaultEnumerationCap = 531441;  // 3^12

struct HorizonProblem {
  LinearModel model;
  int horizon = 1;
  std::vector<Eigen::VectorXd> action_set;
  std::optional<StateBox> state_box;
  HorizonCost cost;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
};

struct MpcSolution {
  Eigen::VectorXd u0;
  std::size_t u0_index = 0;  ///< position of u0 in the action set
  double cost = 0.0;
};

namespace detail {

class Enumerator {
 public:
  explicit Enumerator(const HorizonProblem& p) : p_(p), sequence_(p.horizon, 0) {}

  void run(const Eigen::VectorXd& x0) { descend(x0, 0, 0.0); }

  [[nodiscard]] bool found() const { return found_; }
  [[nodiscard]] double best_cost() const { return best_cost_; }
  [[nodiscard]] std::size_t best_first() const { return best_first_; }

 private:
  void descend(const Eigen::VectorXd& x, int t, double acc) {
    if (t == p_.horizon) {
      const double total = acc + (p_.cost.terminal ? p_.cost.terminal(x) : 0.0);
      // strict improvement keeps the lexicographically first minimiser
      if (!found_ || total < best_cost_) {
        found_ = true;
        best_cost_ = total;
        best_first_ = sequence_[0];
      }
      return;
    }
    for (std::size_t i = 0; i < p_.action_set.size(); ++i) {
      const auto& u = p_.action_set[i];
      Eigen::VectorXd nx = p_.model.next(x, u);
      if (p_.state_box && !p_.state_box->contains(nx)) continue;
      sequence_[t] = i;
      const double stage = p_.cost.stage ? p_.cost.stage(x, u, t) : 0.0;
      descend(nx, t + 1, acc + stage);
    }
  }

  const HorizonProblem& p_;
  std::vector<std::size_t> sequence_;
  bool found_ = false;
  double best_cost_ = std::numeric_limits<double>::infinity();
  std::size_t best_first_ = 0;
};

}  // namespace detail

/// Exhaustive search over every action sequence of length T.
/// Ties go to the lexicographically first sequence in action-set order.
inline MpcSolution solve_enumerative(const HorizonProblem& prob, const Eigen::VectorXd& x0) {
  prob.model.validate();
  if (prob.horizon < 1) throw InvalidConfig("horizon must be at least 1");
  if (prob.action_set.empty()) throw EmptyActionSet();
  if (x0.size() != prob.model.state_dim()) throw InvalidConfig("x0 has the wrong dimension");
  for (const auto& u : prob.action_set) {
    if (u.size() != prob.model.input_dim()) throw InvalidConfig("action has the wrong dimension");
  }

  double sequences = std::pow(static_cast<double>(prob.action_set.size()), prob.horizon);
  if (sequences > static_cast<double>(prob.enumeration_cap)) {
    throw CapExceeded("|A|^T = " + std::to_string(static_cast<long double>(sequences)) +
                      " exceeds the enumeration cap of " + std::to_string(prob.enumeration_cap));
  }
  if (prob.state_box && !prob.state_box->contains(x0)) throw Infeasible();

  detail::Enumerator search(prob);
  search.run(x0);
  if (!search.found()) throw Infeasible();
  return {prob.action_set[search.best_first()], search.best_first(), search.best_cost()};
}

/// The paddle-interception instance as a generic horizon problem:
/// state [y_ball_at_arrival, y_paddle], paddle integrates u, terminal cost
/// (y_ball - y_paddle)^2. Actions listed in the order {-1, 0, +1}.
inline HorizonProblem pong_paddle_problem(int horizon) {
  HorizonProblem p;
  p.model.A = Eigen::MatrixXd::Identity(2, 2);
  p.model.C = Eigen::MatrixXd(2, 1);
  p.model.C << 0.0, 1.0;
  p.model.D = Eigen::VectorXd::Zero(2);
  p.model.noise_variance = Eigen::VectorXd::Zero(2);
  p.horizon = horizon;
  for (int a : {-1, 0, +1}) p.action_set.push_back(Eigen::VectorXd::Constant(1, a));
  p.cost.terminal = [](const Eigen::VectorXd& x) {
    const double gap = x[0] - x[1];
    return gap * gap;
  };
  return p;
}

/// Closed form for the paddle problem: the terminal paddle position ranges
/// over [y - T, y + T], so stepping toward the arrival point is always optimal.
inline ActionId solve_pong_paddle(double y_paddle, double y_arrival, int horizon) {
  if (horizon < 1) throw InvalidConfig("horizon must be at least 1");
  const double gap = y_arrival - y_paddle;
  return (gap > 0.0) - (gap < 0.0);
}

/// Terminal cost reached by applying solve_pong_paddle at every remaining step.
inline double pong_paddle_policy_cost(double y_paddle, double y_arrival, int horizon) {
  double y = y_paddle;
  for (int t = horizon; t >= 1; --t) y += solve_pong_paddle(y, y_arrival, t);
  return (y_arrival - y) * (y_arrival - y);
}

}  // namespace mprl
