#include <gtest/gtest.h>

#include <random>

#include "mprl/mpc.hpp"

using namespace mprl;

namespace {

HorizonProblem scalar_problem(int horizon) {
  HorizonProblem p;
  p.model.A = Eigen::MatrixXd::Identity(1, 1);
  p.model.C = Eigen::MatrixXd::Identity(1, 1);
  p.model.D = Eigen::VectorXd::Zero(1);
  p.horizon = horizon;
  for (int a : {-1, 0, 1}) p.action_set.push_back(Eigen::VectorXd::Constant(1, a));
  p.cost.terminal = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
  return p;
}

// Minimum of (gap - sum u)^2 over all 3^T sequences, listed by brute force.
double enumerate_paddle_cost(int gap, int horizon) {
  double best = 1e300;
  int total = 1;
  for (int i = 0; i < horizon; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    int c = code, sum = 0;
    for (int i = 0; i < horizon; ++i) {
      sum += c % 3 - 1;
      c /= 3;
    }
    best = std::min(best, double((gap - sum) * (gap - sum)));
  }
  return best;
}

}  // namespace

TEST(Enumerative, ScalarOneStep) {
  auto sol = solve_enumerative(scalar_problem(1), Eigen::VectorXd::Constant(1, 3.0));
  EXPECT_EQ(sol.u0[0], -1.0);
  EXPECT_EQ(sol.cost, 4.0);
}

TEST(Enumerative, ZeroCostPicksFirstListed) {
  auto p = scalar_problem(3);
  p.cost.terminal = nullptr;
  auto sol = solve_enumerative(p, Eigen::VectorXd::Constant(1, 0.0));
  EXPECT_EQ(sol.u0_index, 0u);
  EXPECT_EQ(sol.cost, 0.0);
}

TEST(Enumerative, StageCostCounts) {
  auto p = scalar_problem(2);
  p.cost.stage = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, int) { return 10.0 * u[0] * u[0]; };
  // moving costs 10 per step, being off by one costs 1: staying put is optimal
  auto sol = solve_enumerative(p, Eigen::VectorXd::Constant(1, 1.0));
  EXPECT_EQ(sol.u0[0], 0.0);
  EXPECT_EQ(sol.cost, 1.0);
}

TEST(Enumerative, CapExceeded) {
  auto p = scalar_problem(13);
  EXPECT_THROW(solve_enumerative(p, Eigen::VectorXd::Zero(1)), CapExceeded);
  p.horizon = 12;
  EXPECT_NO_THROW(solve_enumerative(p, Eigen::VectorXd::Zero(1)));
}

TEST(Enumerative, StateBoxPrunesAndCanBeInfeasible) {
  auto p = scalar_problem(2);
  p.state_box = StateBox{Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 10.0)};
  auto sol = solve_enumerative(p, Eigen::VectorXd::Constant(1, 0.0));
  EXPECT_EQ(sol.u0[0], 0.0);  // -1 would leave the box
  EXPECT_EQ(sol.cost, 0.0);

  p.state_box = StateBox{Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Constant(1, 5.0)};
  p.action_set = {Eigen::VectorXd::Constant(1, 1.0)};
  EXPECT_THROW(solve_enumerative(p, Eigen::VectorXd::Constant(1, 5.0)), Infeasible);
  EXPECT_THROW(solve_enumerative(p, Eigen::VectorXd::Constant(1, 7.0)), Infeasible);
}

TEST(Enumerative, ValidatesShapes) {
  auto p = scalar_problem(1);
  EXPECT_THROW(solve_enumerative(p, Eigen::VectorXd::Zero(2)), InvalidConfig);
  p.action_set.clear();
  EXPECT_THROW(solve_enumerative(p, Eigen::VectorXd::Zero(1)), EmptyActionSet);
  p = scalar_problem(0);
  EXPECT_THROW(solve_enumerative(p, Eigen::VectorXd::Zero(1)), InvalidConfig);
  p = scalar_problem(1);
  p.model.noise_variance = Eigen::VectorXd::Constant(1, -1.0);
  EXPECT_THROW(solve_enumerative(p, Eigen::VectorXd::Zero(1)), InvalidConfig);
}

TEST(Enumerative, MonotoneInHorizon) {
  for (int gap = -6; gap <= 6; ++gap) {
    double prev = 1e300;
    for (int t = 1; t <= 7; ++t) {
      Eigen::VectorXd x0(2);
      x0 << gap, 0.0;
      const double c = solve_enumerative(pong_paddle_problem(t), x0).cost;
      EXPECT_LE(c, prev);
      prev = c;
    }
  }
}

TEST(PongPaddle, ZeroGapStays) { EXPECT_EQ(solve_pong_paddle(40, 40, 4), 0); }

TEST(PongPaddle, OutOfReach) {
  EXPECT_EQ(solve_pong_paddle(40, 50, 3), +1);
  EXPECT_EQ(pong_paddle_policy_cost(40, 50, 3), 49.0);
  EXPECT_EQ(enumerate_paddle_cost(10, 3), 49.0);
}

TEST(PongPaddle, WithinReachInterceptsExactly) {
  EXPECT_EQ(solve_pong_paddle(40, 39, 5), -1);
  EXPECT_EQ(pong_paddle_policy_cost(40, 39, 5), 0.0);
}

TEST(PongPaddle, InvalidHorizon) { EXPECT_THROW(solve_pong_paddle(0, 1, 0), InvalidConfig); }

TEST(PongPaddle, PolicyCostEqualsEnumerativeExhaustively) {
  for (int t = 1; t <= 8; ++t) {
    for (int gap = -12; gap <= 12; ++gap) {
      Eigen::VectorXd x0(2);
      x0 << 30.0 + gap, 30.0;
      const double enumerated = solve_enumerative(pong_paddle_problem(t), x0).cost;
      EXPECT_EQ(pong_paddle_policy_cost(30.0, 30.0 + gap, t), enumerated) << "gap " << gap << " T " << t;
      EXPECT_EQ(enumerated, enumerate_paddle_cost(gap, t));
    }
  }
}

TEST(PongPaddle, AgreesWithEnumerativeOnRandomStates) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pos(4, 75), horizon(1, 9);
  for (int i = 0; i < 1000; ++i) {
    const double yp = pos(rng), ya = pos(rng);
    const int t = horizon(rng);
    Eigen::VectorXd x0(2);
    x0 << ya, yp;
    EXPECT_EQ(pong_paddle_policy_cost(yp, ya, t), solve_enumerative(pong_paddle_problem(t), x0).cost);
  }
}

TEST(PongPaddle, InterceptionWheneverReachable) {
  for (int t = 1; t <= 20; ++t) {
    for (int gap = -t; gap <= t; ++gap) EXPECT_EQ(pong_paddle_policy_cost(0, gap, t), 0.0);
  }
}

TEST(PongPaddle, Deterministic) {
  for (int i = 0; i < 50; ++i) EXPECT_EQ(solve_pong_paddle(12.5, 33.5, 7), solve_pong_paddle(12.5, 33.5, 7));
}
