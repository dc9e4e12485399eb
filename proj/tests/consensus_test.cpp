#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pushsum/consensus.hpp"
#include "support/expect_errc.hpp"
#include "support/generators.hpp"

using namespace pushsum;
using testing_support::two_cycle;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index k = 0;
  for (double x : v) y(k++, 0) = x;
  return y;
}

FailureSchedule drop_at(const DirectedGraph& g, Edge dropped, std::size_t t_drop, std::size_t T) {
  ScheduleTable table;
  for (const Edge& e : g.edges()) {
    std::vector<std::uint8_t> row(T, 1);
    if (e == dropped) row[t_drop - 1] = 0;
    table.emplace(e, row);
  }
  return scripted_schedule(g, T, table);
}

}  // namespace

TEST(PushSum, ConstantInputsStayFixed) {
  const auto g = testing_support::bidirectional_ring(5);
  const auto trace = run_push_sum(g, Eigen::MatrixXd::Constant(5, 1, 2.5), 40);
  for (std::size_t t = 0; t <= 40; ++t) {
    for (NodeId i = 0; i < 5; ++i) EXPECT_NEAR((*trace.ratio(i, t))(0), 2.5, 1e-12);
  }
}

TEST(PushSum, TwoCycleConvergesToHalf) {
  const auto trace = run_push_sum(two_cycle(), column({0.0, 1.0}), 50);
  EXPECT_LT(consensus_error(trace, 50), 1e-8);
}

TEST(PushSum, WeightsSumToN) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 1, 8);
    const auto g = testing_support::random_strongly_connected(rng, n);
    const auto trace = run_push_sum(g, testing_support::random_inputs(rng, n, 2), 100);
    EXPECT_EQ(trace.node_count(), n);
    for (const auto& w : trace.weights) EXPECT_NEAR(w.sum(), static_cast<double>(n), 1e-9 * n);
  }
}

TEST(RobustPushSum, ReliableScheduleMatchesPushSum) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 1, 7);
    const auto g = testing_support::random_strongly_connected(rng, n);
    const auto y = testing_support::random_inputs(rng, n, 2);
    const auto a = run_push_sum(g, y, 60);
    const auto b = run_robust_push_sum(g, y, all_reliable(g, 60), 60);
    for (std::size_t t = 0; t <= 60; ++t) {
      EXPECT_LE((a.values[t] - b.values[t].topRows(n)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((a.weights[t] - b.weights[t].head(n)).cwiseAbs().maxCoeff(), 1e-12);
      if (g.edge_count() > 0) {
        EXPECT_LE(b.values[t].bottomRows(g.edge_count()).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(RobustPushSum, DroppedMassParksInTheBuffer) {
  const auto g = two_cycle();
  const auto trace = run_robust_push_sum(g, column({0.0, 1.0}), drop_at(g, {1, 0}, 1, 2), 1);
  const auto buf = static_cast<Eigen::Index>(augment(g).virtual_node({1, 0}));
  EXPECT_DOUBLE_EQ(trace.values[1](buf, 0), 0.5);
  EXPECT_DOUBLE_EQ(trace.weights[1](buf), 0.5);
}

TEST(RobustPushSum, ConstantInputsUnderLoss) {
  const auto g = testing_support::bidirectional_ring(4);
  const auto s = bernoulli_b_bounded(g, 0.6, 3, 80, 5);
  const auto trace = run_robust_push_sum(g, Eigen::MatrixXd::Constant(4, 1, 3.0), s, 80);
  for (std::size_t t = 0; t <= 80; ++t) {
    EXPECT_NEAR(trace.values[t].sum(), 12.0, 1e-9 * 12.0);
    for (NodeId i = 0; i < 4; ++i) {
      if (auto r = trace.ratio(i, t)) {
        EXPECT_NEAR((*r)(0), 3.0, 1e-12);
      }
    }
  }
}

TEST(RobustPushSum, ShortScheduleIsRejected) {
  const auto g = two_cycle();
  EXPECT_ERRC(run_robust_push_sum(g, column({0, 1}), all_reliable(g, 3), 4), Errc::ScheduleTooShort);
  EXPECT_ERRC(run_convergent_robust_push_sum(g, column({0, 1}), all_reliable(g, 3), 4),
              Errc::ScheduleTooShort);
  EXPECT_ERRC(run_convergent_robust_push_sum(g, column({0, 1}),
                                             all_reliable(testing_support::ring(3), 5), 4),
              Errc::InvalidArgument);
}

TEST(ConvergentRobustPushSum, OneRoundOnTheTwoCycle) {
  const auto g = two_cycle();
  const auto trace = run_convergent_robust_push_sum(g, column({0.0, 1.0}), all_reliable(g, 1), 1);
  for (Eigen::Index v = 0; v < 4; ++v) {
    EXPECT_DOUBLE_EQ(trace.values[1](v, 0), 0.25);
    EXPECT_DOUBLE_EQ(trace.weights[1](v), 0.5);
  }
  EXPECT_DOUBLE_EQ((*trace.ratio(0, 1))(0), 0.5);
  EXPECT_DOUBLE_EQ((*trace.ratio(1, 1))(0), 0.5);
  EXPECT_EQ(consensus_error(trace, 1), 0.0);
}

TEST(ConvergentRobustPushSum, ConstantInputs) {
  const auto g = testing_support::bidirectional_ring(5);
  const auto s = periodic_adversarial(g, 3, 60);
  const auto trace = run_convergent_robust_push_sum(g, Eigen::MatrixXd::Constant(5, 1, 0.7), s, 60);
  for (std::size_t t = 1; t <= 60; ++t) {
    for (NodeId i = 0; i < 5; ++i) {
      ASSERT_TRUE(trace.ratio(i, t).has_value());
      EXPECT_NEAR((*trace.ratio(i, t))(0), 0.7, 1e-12);
    }
    EXPECT_NEAR(consensus_error(trace, t), 0.0, 1e-12);
  }
}

TEST(ConvergentRobustPushSum, SingleAgent) {
  const auto g = build_graph(1, {});
  const auto trace = run_convergent_robust_push_sum(g, column({5.0}), all_reliable(g, 20), 20);
  for (std::size_t t = 0; t <= 20; ++t) {
    EXPECT_EQ(trace.values[t](0, 0), 5.0);
    EXPECT_EQ(trace.weights[t](0), 1.0);
  }
}

TEST(ConvergentRobustPushSum, StateInvariantsUnderLoss) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 2, 6);
    const auto g = testing_support::random_strongly_connected(rng, n);
    const auto s = bernoulli_b_bounded(g, 0.7, 3, 80, rng());
    PushSumNetwork net(g, testing_support::random_inputs(rng, n));
    std::vector<double> prev_w(n, 1.0);
    std::vector<double> prev_sigma(n, 0.0);
    for (std::size_t t = 1; t <= 80; ++t) {
      net.step_convergent(s, t);
      for (NodeId i = 0; i < n; ++i) {
        const AgentState& a = net.agents()[i];
        const double split = static_cast<double>(g.out_degree(i)) + 1.0;
        EXPECT_GT(a.w, 0.0);
        EXPECT_GE(a.w, prev_w[i] / (split * split) * (1 - 1e-12));
        EXPECT_GE(a.sigma_tilde, prev_sigma[i]);
        const auto in = g.in_neighbors(i);
        for (std::size_t slot = 0; slot < in.size(); ++slot) {
          EXPECT_LE(a.rho_tilde[slot], net.agents()[in[slot]].sigma_tilde);
        }
        prev_w[i] = a.w;
        prev_sigma[i] = a.sigma_tilde;
      }
    }
  }
}

TEST(MassConservation, AugmentedTotalsUnderLoss) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 1, 7);
    const auto g = testing_support::random_strongly_connected(rng, n);
    const std::size_t B = testing_support::uniform_index(rng, 1, 4);
    const auto s = bernoulli_b_bounded(g, 0.8, B, 150, rng());
    const auto y = testing_support::random_inputs(rng, n, 2, -1.0, 2.0);
    for (const auto& trace :
         {run_robust_push_sum(g, y, s, 150), run_convergent_robust_push_sum(g, y, s, 150)}) {
      const auto dev = mass_deviation(trace);
      EXPECT_LE(dev.value, 1e-9);
      EXPECT_LE(dev.weight, 1e-9);
    }
  }
}

TEST(ConsensusBound, TwoCycleConstants) {
  const auto g = two_cycle();
  const auto c = contraction_constants(g, 1);
  EXPECT_EQ(c.block, 3u);
  EXPECT_DOUBLE_EQ(c.beta, 0.25);
  EXPECT_DOUBLE_EQ(c.gamma(), 63.0 / 64.0);
  EXPECT_NEAR(consensus_error_bound(g, 1, column({1.0, 3.0}), 3), 126.0, 1e-12);
  EXPECT_NEAR(consensus_error_bound(g, 1, column({1.0, 3.0}), 2), 128.0, 1e-12);
  EXPECT_EQ(consensus_error_bound(g, 1, column({0.0, 0.0}), 7), 0.0);
}

TEST(ConsensusBound, Errors) {
  const auto g = two_cycle();
  EXPECT_ERRC(consensus_error_bound(g, 1, column({-1.0, 3.0}), 3), Errc::NegativeInput);
  EXPECT_ERRC(consensus_error_bound(g, 1, column({1.0, 3.0}), 0), Errc::InvalidArgument);
  const auto trace = run_push_sum(g, column({0, 1}), 2);
  EXPECT_ERRC(consensus_error(trace, 3), Errc::IterationOutOfRange);
}

TEST(ConsensusBound, HoldsOnRandomLossySchedules) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 2, 5);
    const auto g = testing_support::random_strongly_connected(rng, n);
    const std::size_t B = testing_support::uniform_index(rng, 1, 3);
    const auto s = bernoulli_b_bounded(g, 0.5, B, 300, rng());
    const auto y = testing_support::random_inputs(rng, n);
    const auto trace = run_convergent_robust_push_sum(g, y, s, 300);
    for (std::size_t t = 1; t <= 300; ++t) {
      ASSERT_LE(consensus_error(trace, t), consensus_error_bound(g, B, y, t));
    }
  }
}

TEST(Determinism, IdenticalInputsGiveIdenticalTraces) {
  const auto g = testing_support::bidirectional_ring(4);
  const auto s = bernoulli_b_bounded(g, 0.5, 2, 50, 77);
  std::mt19937_64 rng(1);
  const auto y = testing_support::random_inputs(rng, 4, 3);
  std::ostringstream a, b;
  write_trace_csv(a, run_convergent_robust_push_sum(g, y, s, 50));
  write_trace_csv(b, run_convergent_robust_push_sum(g, y, s, 50));
  EXPECT_EQ(a.str(), b.str());
}

TEST(TraceCsv, HeaderAndFirstRows) {
  const auto g = two_cycle();
  std::ostringstream out;
  write_trace_csv(out, run_convergent_robust_push_sum(g, column({0.0, 1.0}), all_reliable(g, 1), 1));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,node_id,kind,z1,w,ratio1");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1,real,0,1,0");
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "0,3,virtual,0,0,");
  for (int k = 0; k < 2; ++k) std::getline(in, line);
  EXPECT_EQ(line, "1,1,real,0.25,0.5,0.5");
}
