#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pushsum/contraction.hpp"
#include "pushsum/error.hpp"
#include "pushsum/failure_schedule.hpp"
#include "pushsum/graph.hpp"
#include "pushsum/io.hpp"

namespace pushsum {

enum class Protocol { PushSum, RobustPushSum, ConvergentRobustPushSum };

constexpr std::string_view to_string(Protocol p) noexcept {
  switch (p) {
    case Protocol::PushSum: return "push_sum";
    case Protocol::RobustPushSum: return "robust_push_sum";
    case Protocol::ConvergentRobustPushSum: return "convergent_robust_push_sum";
  }
  return "unknown";
}

/// Local variables of one agent. rho / rho_tilde hold the cumulative mass
/// delivered over each incoming link, in the order of
/// DirectedGraph::in_neighbors(i).
struct AgentState {
  Eigen::VectorXd z;
  double w = 1.0;
  Eigen::VectorXd sigma;
  double sigma_tilde = 0.0;
  std::vector<Eigen::VectorXd> rho;
  std::vector<double> rho_tilde;
};

/// Synchronous-round simulation of the push-sum family on a fixed digraph.
///
/// Message delivery is read from a FailureSchedule: a sender writes its
/// cumulative (sigma, sigma_tilde) once per round and each outgoing link
/// independently consults its indicator. Senders never learn the outcome.
class PushSumNetwork {
 public:
  /// inputs: n x d, row i is agent i's private value.
  PushSumNetwork(DirectedGraph g, const Eigen::MatrixXd& inputs)
      : g_(std::move(g)), dim_(static_cast<std::size_t>(inputs.cols())) {
    if (static_cast<std::size_t>(inputs.rows()) != g_.size()) {
      throw Error(Errc::DimensionMismatch, "expected " + std::to_string(g_.size()) +
                                               " input rows, got " +
                                               std::to_string(inputs.rows()));
    }
    if (dim_ == 0) throw Error(Errc::DimensionMismatch, "inputs need at least one column");
    const auto d = static_cast<Eigen::Index>(dim_);
    agents_.resize(g_.size());
    in_edges_.resize(g_.size());
    slot_of_edge_.resize(g_.edge_count());
    for (NodeId i = 0; i < g_.size(); ++i) {
      AgentState& a = agents_[i];
      a.z = inputs.row(static_cast<Eigen::Index>(i)).transpose();
      a.sigma = Eigen::VectorXd::Zero(d);
      const auto in = g_.in_neighbors(i);
      a.rho.assign(in.size(), Eigen::VectorXd::Zero(d));
      a.rho_tilde.assign(in.size(), 0.0);
      for (std::size_t s = 0; s < in.size(); ++s) {
        const std::size_t k = *g_.edge_index({in[s], i});
        in_edges_[i].push_back(k);
        slot_of_edge_[k] = s;
      }
    }
  }

  const DirectedGraph& graph() const noexcept { return g_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::span<const AgentState> agents() const noexcept { return agents_; }
  AgentState& agent(NodeId i) { return agents_.at(i); }

  /// One round of plain push-sum over reliable links.
  void step_push_sum() {
    std::vector<Eigen::VectorXd> z_share(g_.size());
    std::vector<double> w_share(g_.size());
    for (NodeId j = 0; j < g_.size(); ++j) {
      const double split = static_cast<double>(g_.out_degree(j)) + 1.0;
      z_share[j] = agents_[j].z / split;
      w_share[j] = agents_[j].w / split;
    }
    for (NodeId i = 0; i < g_.size(); ++i) {
      Eigen::VectorXd z = z_share[i];
      double w = w_share[i];
      for (NodeId j : g_.in_neighbors(i)) {
        z += z_share[j];
        w += w_share[j];
      }
      agents_[i].z = std::move(z);
      agents_[i].w = w;
    }
  }

  /// One round of robust push-sum: a single sigma/rho update. The agent's
  /// own share enters as z_i[t-1] / (d_i + 1).
  void step_robust(const FailureSchedule& s, std::size_t t) {
    std::vector<Eigen::VectorXd> kept(g_.size());
    std::vector<double> kept_w(g_.size());
    for (NodeId i = 0; i < g_.size(); ++i) {
      AgentState& a = agents_[i];
      const double split = static_cast<double>(g_.out_degree(i)) + 1.0;
      kept[i] = a.z / split;
      kept_w[i] = a.w / split;
      a.sigma += kept[i];
      a.sigma_tilde += kept_w[i];
    }
    for (NodeId i = 0; i < g_.size(); ++i) {
      auto [dz, dw] = receive(s, t, i);
      agents_[i].z = kept[i] + dz;
      agents_[i].w = kept_w[i] + dw;
    }
  }

  /// One round of convergent robust push-sum: the robust update followed by
  /// a second split that pushes fresh mass into every outgoing buffer.
  void step_convergent(const FailureSchedule& s, std::size_t t) {
    std::vector<Eigen::VectorXd> kept(g_.size());
    std::vector<double> kept_w(g_.size());
    for (NodeId i = 0; i < g_.size(); ++i) {
      AgentState& a = agents_[i];
      const double split = static_cast<double>(g_.out_degree(i)) + 1.0;
      kept[i] = a.z / split;
      kept_w[i] = a.w / split;
      a.sigma += kept[i];  // sigma^+
      a.sigma_tilde += kept_w[i];
    }
    for (NodeId i = 0; i < g_.size(); ++i) {
      auto [dz, dw] = receive(s, t, i);
      AgentState& a = agents_[i];
      const double split = static_cast<double>(g_.out_degree(i)) + 1.0;
      const Eigen::VectorXd z_plus = kept[i] + dz;
      const double w_plus = kept_w[i] + dw;
      a.z = z_plus / split;
      a.w = w_plus / split;
    }
    // Second sigma update must follow every receive: receivers read sigma^+.
    for (NodeId i = 0; i < g_.size(); ++i) {
      AgentState& a = agents_[i];
      a.sigma += a.z;
      a.sigma_tilde += a.w;
    }
  }

  /// Values of all m augmented nodes (rows). Buffer node of link (j, i)
  /// holds sigma_j - rho_ji.
  Eigen::MatrixXd augmented_values() const {
    const auto m = static_cast<Eigen::Index>(g_.size() + g_.edge_count());
    Eigen::MatrixXd out(m, static_cast<Eigen::Index>(dim_));
    for (NodeId i = 0; i < g_.size(); ++i) {
      out.row(static_cast<Eigen::Index>(i)) = agents_[i].z.transpose();
    }
    for (std::size_t k = 0; k < g_.edge_count(); ++k) {
      const Edge e = g_.edges()[k];
      out.row(static_cast<Eigen::Index>(g_.size() + k)) =
          (agents_[e.src].sigma - agents_[e.dst].rho[slot_of_edge_[k]]).transpose();
    }
    return out;
  }

  Eigen::VectorXd augmented_weights() const {
    const auto m = static_cast<Eigen::Index>(g_.size() + g_.edge_count());
    Eigen::VectorXd out(m);
    for (NodeId i = 0; i < g_.size(); ++i) out(static_cast<Eigen::Index>(i)) = agents_[i].w;
    for (std::size_t k = 0; k < g_.edge_count(); ++k) {
      const Edge e = g_.edges()[k];
      out(static_cast<Eigen::Index>(g_.size() + k)) =
          agents_[e.src].sigma_tilde - agents_[e.dst].rho_tilde[slot_of_edge_[k]];
    }
    return out;
  }

 private:
  // Updates rho for agent i's incoming links and returns the delivered
  // increments summed over those links.
  std::pair<Eigen::VectorXd, double> receive(const FailureSchedule& s, std::size_t t, NodeId i) {
    AgentState& a = agents_[i];
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    double dw = 0.0;
    const auto in = g_.in_neighbors(i);
    for (std::size_t slot = 0; slot < in.size(); ++slot) {
      if (!s.reliable(in_edges_[i][slot], t)) continue;
      const AgentState& sender = agents_[in[slot]];
      dz += sender.sigma - a.rho[slot];
      dw += sender.sigma_tilde - a.rho_tilde[slot];
      a.rho[slot] = sender.sigma;
      a.rho_tilde[slot] = sender.sigma_tilde;
    }
    return {std::move(dz), dw};
  }

  DirectedGraph g_;
  std::size_t dim_;
  std::vector<AgentState> agents_;
  std::vector<std::vector<std::size_t>> in_edges_;  // edge index per incoming slot
  std::vector<std::size_t> slot_of_edge_;           // incoming slot at the receiver
};

/// Snapshots of every node's (z, w) for t = 0..T. Traces of push-sum hold the
/// n real agents only; robust variants add one row per buffer node, ordered
/// as in AugmentedGraph.
struct ConsensusTrace {
  Protocol protocol = Protocol::PushSum;
  std::size_t real_count = 0;
  Eigen::MatrixXd inputs;
  std::vector<Eigen::MatrixXd> values;
  std::vector<Eigen::VectorXd> weights;

  std::size_t iterations() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  std::size_t node_count() const noexcept {
    return values.empty() ? real_count : static_cast<std::size_t>(values.front().rows());
  }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(inputs.cols()); }

  /// z/w at node i and iteration t; nullopt when the weight is zero.
  std::optional<Eigen::VectorXd> ratio(NodeId i, std::size_t t) const {
    const double w = weights.at(t)(static_cast<Eigen::Index>(i));
    if (w == 0.0) return std::nullopt;
    return Eigen::VectorXd(values.at(t).row(static_cast<Eigen::Index>(i)).transpose() / w);
  }

  Eigen::VectorXd average() const { return inputs.colwise().mean().transpose(); }
};

namespace detail {

inline void check_schedule(const DirectedGraph& g, const FailureSchedule& s, std::size_t T) {
  if (!s.matches(g)) {
    throw Error(Errc::InvalidArgument, "schedule was built for a different edge set");
  }
  if (s.horizon() < T) {
    throw Error(Errc::ScheduleTooShort, "schedule covers " + std::to_string(s.horizon()) +
                                            " iterations, run needs " + std::to_string(T));
  }
}

inline void record(ConsensusTrace& trace, const PushSumNetwork& net, bool augmented) {
  if (augmented) {
    trace.values.push_back(net.augmented_values());
    trace.weights.push_back(net.augmented_weights());
    return;
  }
  const auto n = static_cast<Eigen::Index>(net.graph().size());
  trace.values.push_back(net.augmented_values().topRows(n));
  trace.weights.push_back(net.augmented_weights().head(n));
}

}  // namespace detail

inline ConsensusTrace run_push_sum(const DirectedGraph& g, const Eigen::MatrixXd& y,
                                   std::size_t T) {
  PushSumNetwork net(g, y);
  ConsensusTrace trace{Protocol::PushSum, g.size(), y, {}, {}};
  detail::record(trace, net, false);
  for (std::size_t t = 1; t <= T; ++t) {
    net.step_push_sum();
    detail::record(trace, net, false);
  }
  return trace;
}

inline ConsensusTrace run_robust_push_sum(const DirectedGraph& g, const Eigen::MatrixXd& y,
                                          const FailureSchedule& s, std::size_t T) {
  detail::check_schedule(g, s, T);
  PushSumNetwork net(g, y);
  ConsensusTrace trace{Protocol::RobustPushSum, g.size(), y, {}, {}};
  detail::record(trace, net, true);
  for (std::size_t t = 1; t <= T; ++t) {
    net.step_robust(s, t);
    detail::record(trace, net, true);
  }
  return trace;
}

inline ConsensusTrace run_convergent_robust_push_sum(const DirectedGraph& g,
                                                     const Eigen::MatrixXd& y,
                                                     const FailureSchedule& s, std::size_t T) {
  detail::check_schedule(g, s, T);
  PushSumNetwork net(g, y);
  ConsensusTrace trace{Protocol::ConvergentRobustPushSum, g.size(), y, {}, {}};
  detail::record(trace, net, true);
  for (std::size_t t = 1; t <= T; ++t) {
    net.step_convergent(s, t);
    detail::record(trace, net, true);
  }
  return trace;
}

/// Upper bound on max_i |z_i[t]/w_i[t] - mean(y)| for convergent robust
/// push-sum on a B-bounded schedule:
///   |sum_k y_k| / (n beta^(nB+1)) * gamma^floor(t / (nB+1)).
/// Only meaningful for nonnegative inputs.
inline double consensus_error_bound(const DirectedGraph& g, std::size_t window,
                                    const Eigen::MatrixXd& y, std::size_t t) {
  if (t < 1) throw Error(Errc::InvalidArgument, "bound is stated for t >= 1");
  if ((y.array() < 0.0).any()) {
    throw Error(Errc::NegativeInput, "bound assumes nonnegative inputs");
  }
  const auto c = contraction_constants(g, window);
  const double mass = y.colwise().sum().norm();
  if (mass == 0.0) return 0.0;
  const double blocks = std::floor(static_cast<double>(t) / static_cast<double>(c.block));
  return mass / (static_cast<double>(g.size()) * c.beta_block) * c.gamma_pow(blocks);
}

/// max over real agents of |z_i[t]/w_i[t] - mean(y)|.
inline double consensus_error(const ConsensusTrace& trace, std::size_t t) {
  if (t > trace.iterations()) {
    throw Error(Errc::IterationOutOfRange, "trace ends at t=" +
                                               std::to_string(trace.iterations()));
  }
  const Eigen::VectorXd avg = trace.average();
  double worst = 0.0;
  for (NodeId i = 0; i < trace.real_count; ++i) {
    auto r = trace.ratio(i, t);
    if (!r) {
      throw Error(Errc::ZeroWeight, "agent " + std::to_string(i + 1) + " has zero weight at t=" +
                                        std::to_string(t));
    }
    worst = std::max(worst, (*r - avg).norm());
  }
  return worst;
}

/// Largest deviation, over all recorded iterations, of the node totals from
/// their conserved values (sum of inputs for z, n for w). Relative to the
/// conserved magnitude, floored at 1. For push-sum traces the totals cover
/// the real agents only.
struct MassDeviation {
  double value = 0.0;
  double weight = 0.0;
};

inline MassDeviation mass_deviation(const ConsensusTrace& trace) {
  const Eigen::VectorXd value_total = trace.inputs.colwise().sum().transpose();
  const double weight_total = static_cast<double>(trace.real_count);
  const double value_scale = std::max(1.0, value_total.norm());
  const double weight_scale = std::max(1.0, weight_total);
  MassDeviation dev;
  for (std::size_t t = 0; t < trace.values.size(); ++t) {
    const Eigen::VectorXd v = trace.values[t].colwise().sum().transpose();
    dev.value = std::max(dev.value, (v - value_total).norm() / value_scale);
    dev.weight =
        std::max(dev.weight, std::abs(trace.weights[t].sum() - weight_total) / weight_scale);
  }
  return dev;
}

/// CSV: t,node_id,kind,z1..zd,w,ratio1..ratiod. node_id is one-based in the
/// augmented numbering; ratio cells are empty when w = 0.
inline void write_trace_csv(std::ostream& out, const ConsensusTrace& trace) {
  const std::size_t d = trace.dimension();
  out << "t,node_id,kind";
  for (std::size_t c = 1; c <= d; ++c) out << ",z" << c;
  out << ",w";
  for (std::size_t c = 1; c <= d; ++c) out << ",ratio" << c;
  out << '\n';
  for (std::size_t t = 0; t < trace.values.size(); ++t) {
    for (std::size_t i = 0; i < trace.node_count(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      out << t << ',' << i + 1 << ',' << (i < trace.real_count ? "real" : "virtual");
      for (std::size_t c = 0; c < d; ++c) {
        out << ',' << format_double(trace.values[t](row, static_cast<Eigen::Index>(c)));
      }
      const double w = trace.weights[t](row);
      out << ',' << format_double(w);
      const auto r = trace.ratio(i, t);
      for (std::size_t c = 0; c < d; ++c) {
        out << ',';
        if (r) out << format_double((*r)(static_cast<Eigen::Index>(c)));
      }
      out << '\n';
    }
  }
}

}  // namespace pushsum
