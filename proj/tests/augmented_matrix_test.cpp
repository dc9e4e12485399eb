#include <gtest/gtest.h>

#include <random>

#include "pushsum/augmented_matrix.hpp"
#include "support/expect_errc.hpp"
#include "support/generators.hpp"

using namespace pushsum;
using testing_support::two_cycle;

namespace {

Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) r(k++) = x;
  return r;
}

Eigen::MatrixXd random_stochastic(std::mt19937_64& rng, Eigen::Index m, double sparsity) {
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      A(i, j) = testing_support::uniform01(rng) < sparsity ? 0.0 : testing_support::uniform01(rng);
    }
    if (A.row(i).sum() == 0.0) A(i, i) = 1.0;
    A.row(i) /= A.row(i).sum();
  }
  return A;
}

}  // namespace

TEST(IterationMatrix, TwoCycleAllReliable) {
  const auto ag = augment(two_cycle());
  const auto M = build_iteration_matrix(ag, all_reliable(ag.base(), 1), 1).values;
  EXPECT_TRUE(M.row(0).isApprox(row({0.25, 0.25, 0.25, 0.25})));
  EXPECT_TRUE(M.row(2).isApprox(row({0.0, 0.5, 0.0, 0.5})));
}

TEST(IterationMatrix, TwoCycleWithDroppedLink) {
  const auto ag = augment(two_cycle());
  const auto s = scripted_schedule(ag.base(), 2, {{{0, 1}, {0, 1}}, {{1, 0}, {1, 1}}});
  const auto M = build_iteration_matrix(ag, s, 1).values;
  EXPECT_TRUE(M.row(0).isApprox(row({0.25, 0.0, 0.75, 0.0})));
  EXPECT_EQ(M(2, 2), 1.0);
  EXPECT_EQ(M(2, 1), 0.0);
}

TEST(IterationMatrix, OutOfRange) {
  const auto ag = augment(two_cycle());
  const auto s = all_reliable(ag.base(), 2);
  EXPECT_ERRC(build_iteration_matrix(ag, s, 0), Errc::IterationOutOfRange);
  EXPECT_ERRC(build_iteration_matrix(ag, s, 3), Errc::IterationOutOfRange);
  EXPECT_ERRC(matrix_product(ag, s, 4, 2), Errc::IterationOutOfRange);
}

TEST(IterationMatrixProperty, RowStochasticWithUnitInterval) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 1, 7);
    const auto ag = augment(testing_support::random_strongly_connected(rng, n));
    const auto s = bernoulli_b_bounded(ag.base(), 0.6, 3, 20, rng());
    for (std::size_t t = 1; t <= 20; ++t) {
      const auto M = build_iteration_matrix(ag, s, t).values;
      EXPECT_LE((M.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
      EXPECT_GE(M.minCoeff(), 0.0);
      EXPECT_LE(M.maxCoeff(), 1.0);
    }
  }
}

TEST(MatrixProduct, Conventions) {
  const auto ag = augment(testing_support::ring(3));
  const auto s = bernoulli_b_bounded(ag.base(), 0.5, 2, 6, 4);
  EXPECT_TRUE(matrix_product(ag, s, 4, 3).values.isIdentity());
  EXPECT_EQ(matrix_product(ag, s, 5, 5).values, build_iteration_matrix(ag, s, 5).values);
}

TEST(MatrixProduct, TwoCycleThreeRoundsBoundedBelow) {
  const auto ag = augment(two_cycle());
  const auto psi = matrix_product(ag, all_reliable(ag.base(), 3), 1, 3).values;
  EXPECT_GE(psi.minCoeff(), 1.0 / 64.0);
}

TEST(EvolveByMatrices, TwoCycleOneRound) {
  const auto ag = augment(two_cycle());
  Eigen::MatrixXd y(2, 1);
  y << 0.0, 1.0;
  const auto trace = evolve_by_matrices(ag, all_reliable(ag.base(), 1), y, 1);
  for (Eigen::Index v = 0; v < 4; ++v) EXPECT_NEAR(trace.values[1](v, 0), 0.25, 1e-15);
}

TEST(EvolveByMatrices, ConstantInputsKeepTotal) {
  const auto ag = augment(testing_support::bidirectional_ring(4));
  const auto s = periodic_adversarial(ag.base(), 2, 30);
  const auto trace = evolve_by_matrices(ag, s, Eigen::MatrixXd::Constant(4, 1, 1.5), 30);
  for (const auto& v : trace.values) EXPECT_NEAR(v.sum(), 6.0, 1e-12);
}

TEST(EvolveByMatrices, AgreesWithTheStateMachine) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 1, 6);
    const auto g = testing_support::random_strongly_connected(rng, n);
    const std::size_t B = testing_support::uniform_index(rng, 1, 3);
    const auto s = testing_support::random_b_bounded(rng, g, B, 80);
    const auto y = testing_support::random_inputs(rng, n, 2);
    const auto sim = run_convergent_robust_push_sum(g, y, s, 80);
    const auto mat = evolve_by_matrices(augment(g), s, y, 80);
    for (std::size_t t = 0; t <= 80; ++t) {
      ASSERT_LE((sim.values[t] - mat.values[t]).cwiseAbs().maxCoeff(), 1e-9);
      ASSERT_LE((sim.weights[t] - mat.weights[t]).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Coefficients, Examples) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_EQ(delta_coefficient(I), 1.0);
  EXPECT_EQ(lambda_coefficient(I), 1.0);
  Eigen::MatrixXd same(3, 3);
  same << 0.2, 0.3, 0.5, 0.2, 0.3, 0.5, 0.2, 0.3, 0.5;
  EXPECT_EQ(delta_coefficient(same), 0.0);
  EXPECT_NEAR(lambda_coefficient(same), 0.0, 1e-15);
  Eigen::MatrixXd two(2, 2);
  two << 0.5, 0.5, 0.25, 0.75;
  EXPECT_DOUBLE_EQ(delta_coefficient(two), 0.25);
  EXPECT_DOUBLE_EQ(lambda_coefficient(two), 0.25);
}

TEST(Coefficients, RejectNonStochastic) {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  EXPECT_ERRC(delta_coefficient(bad), Errc::NotRowStochastic);
  EXPECT_ERRC(lambda_coefficient(bad), Errc::NotRowStochastic);
  Eigen::MatrixXd negative(2, 2);
  negative << 1.5, -0.5, 0.5, 0.5;
  EXPECT_ERRC(delta_coefficient(negative), Errc::NotRowStochastic);
  EXPECT_ERRC(delta_coefficient(Eigen::MatrixXd(2, 3)), Errc::NotRowStochastic);
}

TEST(CoefficientsProperty, RangeAndZeroIffIdenticalRows) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = static_cast<Eigen::Index>(testing_support::uniform_index(rng, 2, 7));
    const auto A = random_stochastic(rng, m, testing_support::uniform01(rng));
    const double d = delta_coefficient(A);
    const double l = lambda_coefficient(A);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
    EXPECT_LE(d, l + 1e-12);
    Eigen::MatrixXd identical = A.row(0).replicate(m, 1);
    EXPECT_EQ(delta_coefficient(identical), 0.0);
    EXPECT_NEAR(lambda_coefficient(identical), 0.0, 1e-12);
    const bool rows_equal = (A.rowwise() - A.row(0)).cwiseAbs().maxCoeff() == 0.0;
    if (!rows_equal) {
      EXPECT_GT(d, 0.0);
    }
  }
}

TEST(EntryLowerBound, TwoCycle) {
  const auto ag = augment(two_cycle());
  const auto rep = certify_entry_lower_bound(ag, all_reliable(ag.base(), 3), 1, 3, 1);
  EXPECT_TRUE(rep.pass);
  EXPECT_DOUBLE_EQ(rep.bound, 1.0 / 64.0);
  EXPECT_GE(rep.min_entry, 1.0 / 64.0);
}

TEST(EntryLowerBound, ShortWindow) {
  const auto ag = augment(two_cycle());
  EXPECT_ERRC(certify_entry_lower_bound(ag, all_reliable(ag.base(), 3), 1, 2, 1),
              Errc::WindowTooShort);
}

TEST(Contraction, SingleMatrixWindow) {
  const auto ag = augment(testing_support::bidirectional_ring(3));
  const auto s = bernoulli_b_bounded(ag.base(), 0.5, 2, 5, 8);
  const auto rep = certify_contraction(ag, s, 2, 2, 2);
  EXPECT_TRUE(rep.pass_hajnal);
  EXPECT_LE(rep.delta, rep.lambda_product);
  EXPECT_EQ(rep.gamma_bound, 1.0);
}

TEST(Contraction, PeriodicTwoCycleThreeBlocks) {
  const auto ag = augment(two_cycle());
  const auto s = periodic_adversarial(ag.base(), 2, 15);
  const auto rep = certify_contraction(ag, s, 1, 15, 2);
  const double gamma = 1.0 - std::pow(0.25, 5);
  EXPECT_NEAR(rep.gamma_bound, gamma * gamma * gamma, 1e-15);
  EXPECT_TRUE(rep.pass());
}

TEST(Contraction, DeltaNonIncreasingAsTheWindowGrowsBackward) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 2, 5);
    const auto ag = augment(testing_support::random_strongly_connected(rng, n));
    const auto s = bernoulli_b_bounded(ag.base(), 0.5, 2, 40, rng());
    const std::size_t t = 40;
    double prev = 1.0;
    for (std::size_t r = t; r >= 1; --r) {
      const double d = delta_coefficient(matrix_product(ag, s, r, t).values);
      EXPECT_LE(d, prev + 1e-12);
      prev = d;
    }
  }
}

TEST(Contraction, DeltaCanGrowWhenTheWindowGrowsForward) {
  // Right-multiplying by M[t+1] may widen a column of Psi, so delta is not
  // monotone in t for fixed r. Instance found by search; the product bound
  // still holds at every step.
  std::mt19937_64 rng(13);
  bool grew = false;
  for (int trial = 0; trial < 10 && !grew; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 2, 5);
    const auto ag = augment(testing_support::random_strongly_connected(rng, n));
    const auto s = bernoulli_b_bounded(ag.base(), 0.5, 2, 40, rng());
    double prev = 1.0;
    for (std::size_t t = 1; t <= 40; ++t) {
      const auto rep = certify_contraction(ag, s, 1, t, 2);
      EXPECT_TRUE(rep.pass_hajnal);
      grew = grew || rep.delta > prev * (1.0 + 1e-6);
      prev = rep.delta;
    }
  }
  EXPECT_TRUE(grew);
}

TEST(Audit, JsonShape) {
  const auto ag = augment(two_cycle());
  const auto audit = audit_window(ag, all_reliable(ag.base(), 3), 1, 3, 1);
  EXPECT_TRUE(audit.pass());
  const auto j = audit_to_json(audit);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"window", "delta", "lambda_product", "gamma_bound",
                                            "min_entry", "beta_bound", "max_row_sum_error",
                                            "pass_flags"}));
  EXPECT_EQ(j["window"], nlohmann::ordered_json({1, 3}));
  EXPECT_TRUE(j["pass_flags"]["entry_lower_bound"].get<bool>());
  const auto short_audit = audit_to_json(audit_window(ag, all_reliable(ag.base(), 3), 1, 2, 1));
  EXPECT_TRUE(short_audit["min_entry"].is_null());
}
