#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "pushsum/consensus.hpp"
#include "pushsum/contraction.hpp"
#include "pushsum/error.hpp"
#include "pushsum/failure_schedule.hpp"
#include "pushsum/graph.hpp"

namespace pushsum {

/// Tolerance on row sums / negative entries accepted by the ergodicity
/// coefficients. Loose enough for long products.
inline constexpr double kRowStochasticTolerance = 1e-8;

/// m x m matrix of one round of convergent robust push-sum over the
/// augmented graph, indexed M(source, destination): the row vector of node
/// values evolves as z[t] = z[t-1] M[t].
struct IterationMatrix {
  Eigen::MatrixXd values;
  std::size_t t = 0;
};

/// Psi(r, t) = M[r] M[r+1] ... M[t]; the identity when r = t + 1.
struct MatrixProduct {
  Eigen::MatrixXd values;
  std::size_t r = 1;
  std::size_t t = 0;
};

inline IterationMatrix build_iteration_matrix(const AugmentedGraph& ag, const FailureSchedule& s,
                                              std::size_t t) {
  if (t < 1 || t > s.horizon()) {
    throw Error(Errc::IterationOutOfRange, "M[" + std::to_string(t) + "] outside [1, " +
                                               std::to_string(s.horizon()) + "]");
  }
  const DirectedGraph& g = ag.base();
  if (!s.matches(g)) {
    throw Error(Errc::InvalidArgument, "schedule was built for a different edge set");
  }
  const auto m = static_cast<Eigen::Index>(ag.node_count());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  auto split = [&](NodeId v) { return static_cast<double>(g.out_degree(v)) + 1.0; };
  auto idx = [](std::size_t v) { return static_cast<Eigen::Index>(v); };

  for (NodeId i = 0; i < g.size(); ++i) M(idx(i), idx(i)) = 1.0 / (split(i) * split(i));

  const auto edges = g.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const NodeId j = edges[k].src;
    const NodeId i = edges[k].dst;
    const NodeId buf = ag.virtual_node(edges[k]);
    const double up = s.reliable(k, t) ? 1.0 : 0.0;

    M(idx(j), idx(i)) = up / (split(i) * split(j));
    M(idx(buf), idx(i)) = up / split(i);
    M(idx(j), idx(buf)) = 1.0 / (split(j) * split(j)) + (1.0 - up) / split(j);
    M(idx(buf), idx(buf)) = 1.0 - up;
    for (NodeId src : g.in_neighbors(j)) {
      const std::size_t kj = *g.edge_index({src, j});
      const double up_kj = s.reliable(kj, t) ? 1.0 : 0.0;
      M(idx(src), idx(buf)) = up_kj / (split(src) * split(j));
      M(idx(ag.virtual_node({src, j})), idx(buf)) = up_kj / split(j);
    }
  }
  return {std::move(M), t};
}

inline MatrixProduct matrix_product(const AugmentedGraph& ag, const FailureSchedule& s,
                                    std::size_t r, std::size_t t) {
  if (r < 1 || r > t + 1) {
    throw Error(Errc::IterationOutOfRange, "product window [" + std::to_string(r) + ", " +
                                               std::to_string(t) + "] is invalid");
  }
  if (r <= t && t > s.horizon()) {
    throw Error(Errc::IterationOutOfRange, "product window ends past the schedule horizon");
  }
  const auto m = static_cast<Eigen::Index>(ag.node_count());
  Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(m, m);
  for (std::size_t k = r; k <= t; ++k) psi = psi * build_iteration_matrix(ag, s, k).values;
  return {std::move(psi), r, t};
}

/// Node values and weights of convergent robust push-sum obtained purely from
/// matrix products: z[t] = z[0] Psi(1, t), with inputs on the real agents,
/// zero on buffers, and unit weight on real agents only.
inline ConsensusTrace evolve_by_matrices(const AugmentedGraph& ag, const FailureSchedule& s,
                                         const Eigen::MatrixXd& y, std::size_t T) {
  const DirectedGraph& g = ag.base();
  if (static_cast<std::size_t>(y.rows()) != g.size()) {
    throw Error(Errc::DimensionMismatch, "inputs must have one row per agent");
  }
  if (s.horizon() < T) throw Error(Errc::ScheduleTooShort, "schedule shorter than T");
  const auto m = static_cast<Eigen::Index>(ag.node_count());
  const auto n = static_cast<Eigen::Index>(g.size());

  Eigen::MatrixXd z0 = Eigen::MatrixXd::Zero(m, y.cols());
  z0.topRows(n) = y;
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(m);
  w0.head(n).setOnes();

  ConsensusTrace trace{Protocol::ConvergentRobustPushSum, g.size(), y, {}, {}};
  trace.values.push_back(z0);
  trace.weights.push_back(w0);
  Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(m, m);
  for (std::size_t t = 1; t <= T; ++t) {
    psi = psi * build_iteration_matrix(ag, s, t).values;
    trace.values.push_back(psi.transpose() * z0);
    trace.weights.push_back(psi.transpose() * w0);
  }
  return trace;
}

namespace detail {

inline void require_row_stochastic(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw Error(Errc::NotRowStochastic, "matrix must be square and non-empty");
  }
  if (A.minCoeff() < -kRowStochasticTolerance) {
    throw Error(Errc::NotRowStochastic, "matrix has a negative entry");
  }
  const Eigen::VectorXd sums = A.rowwise().sum();
  if ((sums.array() - 1.0).abs().maxCoeff() > kRowStochasticTolerance) {
    throw Error(Errc::NotRowStochastic, "row sums deviate from 1");
  }
}

}  // namespace detail

/// delta(A) = max_j max_{i1,i2} |A(i1,j) - A(i2,j)|
inline double delta_coefficient(const Eigen::MatrixXd& A) {
  detail::require_row_stochastic(A);
  return (A.colwise().maxCoeff() - A.colwise().minCoeff()).maxCoeff();
}

/// lambda(A) = 1 - min_{i1,i2} sum_j min(A(i1,j), A(i2,j))
inline double lambda_coefficient(const Eigen::MatrixXd& A) {
  detail::require_row_stochastic(A);
  double overlap = 1.0;
  for (Eigen::Index a = 0; a < A.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < A.rows(); ++b) {
      overlap = std::min(overlap, A.row(a).cwiseMin(A.row(b)).sum());
    }
  }
  return std::clamp(1.0 - overlap, 0.0, 1.0);
}

struct EntryBoundReport {
  std::size_t r = 1;
  std::size_t t = 0;
  double min_entry = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Checks that every entry of Psi(r, t) is at least beta^(nB+1). Requires a
/// window of at least nB+1 rounds.
inline EntryBoundReport certify_entry_lower_bound(const AugmentedGraph& ag,
                                                  const FailureSchedule& s, std::size_t r,
                                                  std::size_t t, std::size_t window,
                                                  double slack = 0.0) {
  const auto c = contraction_constants(ag.base(), window);
  if (t + 1 < r + c.block) {
    throw Error(Errc::WindowTooShort, "window [" + std::to_string(r) + ", " + std::to_string(t) +
                                          "] is shorter than nB+1 = " + std::to_string(c.block));
  }
  EntryBoundReport rep{r, t, matrix_product(ag, s, r, t).values.minCoeff(), c.beta_block, false};
  rep.pass = rep.min_entry >= rep.bound - slack;
  return rep;
}

struct ContractionReport {
  std::size_t r = 1;
  std::size_t t = 0;
  double delta = 0.0;
  double lambda_product = 1.0;
  double gamma_bound = 1.0;
  bool pass_hajnal = false;
  bool pass_block = false;
  bool pass() const { return pass_hajnal && pass_block; }
};

/// delta(Psi(r,t)) against the product of lambda(M[k]) and against
/// gamma^floor((t-r+1)/(nB+1)).
inline ContractionReport certify_contraction(const AugmentedGraph& ag, const FailureSchedule& s,
                                             std::size_t r, std::size_t t, std::size_t window,
                                             double slack = 0.0) {
  if (r < 1 || r > t) throw Error(Errc::IterationOutOfRange, "window needs 1 <= r <= t");
  const auto c = contraction_constants(ag.base(), window);
  const auto m = static_cast<Eigen::Index>(ag.node_count());
  Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(m, m);
  double lambda_product = 1.0;
  for (std::size_t k = r; k <= t; ++k) {
    const Eigen::MatrixXd M = build_iteration_matrix(ag, s, k).values;
    lambda_product *= lambda_coefficient(M);
    psi = psi * M;
  }
  ContractionReport rep;
  rep.r = r;
  rep.t = t;
  rep.delta = delta_coefficient(psi);
  rep.lambda_product = lambda_product;
  rep.gamma_bound = c.gamma_pow(std::floor(static_cast<double>(t - r + 1) /
                                           static_cast<double>(c.block)));
  rep.pass_hajnal = rep.delta <= rep.lambda_product + slack;
  rep.pass_block = rep.delta <= rep.gamma_bound + slack;
  return rep;
}

/// Combined audit of one window. The entry bound is only evaluated when the
/// window spans at least nB+1 rounds.
struct MatrixAudit {
  ContractionReport contraction;
  std::optional<EntryBoundReport> entry;
  double max_row_sum_error = 0.0;

  bool pass(double row_tolerance = 1e-12) const {
    return contraction.pass() && (!entry || entry->pass) && max_row_sum_error <= row_tolerance;
  }
};

inline MatrixAudit audit_window(const AugmentedGraph& ag, const FailureSchedule& s, std::size_t r,
                                std::size_t t, std::size_t window, double entry_slack = 0.0,
                                double contraction_slack = 0.0) {
  MatrixAudit audit;
  audit.contraction = certify_contraction(ag, s, r, t, window, contraction_slack);
  const auto c = contraction_constants(ag.base(), window);
  if (t + 1 >= r + c.block) {
    audit.entry = certify_entry_lower_bound(ag, s, r, t, window, entry_slack);
  }
  for (std::size_t k = r; k <= t; ++k) {
    const Eigen::VectorXd sums = build_iteration_matrix(ag, s, k).values.rowwise().sum();
    audit.max_row_sum_error =
        std::max(audit.max_row_sum_error, (sums.array() - 1.0).abs().maxCoeff());
  }
  return audit;
}

/// {window, delta, lambda_product, gamma_bound, min_entry, beta_bound,
///  pass_flags}; min_entry / beta_bound are null for short windows.
inline nlohmann::ordered_json audit_to_json(const MatrixAudit& a) {
  nlohmann::ordered_json j;
  j["window"] = {a.contraction.r, a.contraction.t};
  j["delta"] = a.contraction.delta;
  j["lambda_product"] = a.contraction.lambda_product;
  j["gamma_bound"] = a.contraction.gamma_bound;
  j["min_entry"] = a.entry ? nlohmann::ordered_json(a.entry->min_entry) : nullptr;
  j["beta_bound"] = a.entry ? nlohmann::ordered_json(a.entry->bound) : nullptr;
  j["max_row_sum_error"] = a.max_row_sum_error;
  nlohmann::ordered_json flags;
  flags["entry_lower_bound"] = a.entry ? nlohmann::ordered_json(a.entry->pass) : nullptr;
  flags["hajnal_product"] = a.contraction.pass_hajnal;
  flags["block_contraction"] = a.contraction.pass_block;
  flags["row_stochastic"] = a.max_row_sum_error <= 1e-12;
  j["pass_flags"] = std::move(flags);
  return j;
}

}  // namespace pushsum
