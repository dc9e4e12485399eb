#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "pushsum/consensus.hpp"
#include "pushsum/contraction.hpp"
#include "pushsum/error.hpp"
#include "pushsum/failure_schedule.hpp"
#include "pushsum/graph.hpp"

namespace pushsum {

// ---------------------------------------------------------------------------
// Objectives

/// h(x) = <c, x>
struct LinearObjective {
  Eigen::VectorXd c;

  double value(const Eigen::VectorXd& x) const { return c.dot(x); }
  Eigen::VectorXd subgradient(const Eigen::VectorXd&) const { return c; }
  double lipschitz() const { return c.norm(); }
};

/// h(x) = sum_k |x_k - a_k|. At a kink the coordinate subgradient is 0.
struct AbsDistanceObjective {
  Eigen::VectorXd a;

  double value(const Eigen::VectorXd& x) const { return (x - a).cwiseAbs().sum(); }
  Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const {
    return (x - a).unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  }
  double lipschitz() const { return std::sqrt(static_cast<double>(a.size())); }
};

/// h(x) = |x - a|_2; subgradient 0 at x = a.
struct L2DistanceObjective {
  Eigen::VectorXd a;

  double value(const Eigen::VectorXd& x) const { return (x - a).norm(); }
  Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd diff = x - a;
    const double r = diff.norm();
    if (r == 0.0) return Eigen::VectorXd::Zero(a.size());
    return diff / r;
  }
  double lipschitz() const { return 1.0; }
};

using Component = std::variant<LinearObjective, AbsDistanceObjective, L2DistanceObjective>;

inline double evaluate(const Component& h, const Eigen::VectorXd& x) {
  return std::visit([&](const auto& f) { return f.value(x); }, h);
}
inline Eigen::VectorXd subgradient(const Component& h, const Eigen::VectorXd& x) {
  return std::visit([&](const auto& f) -> Eigen::VectorXd { return f.subgradient(x); }, h);
}
inline double lipschitz(const Component& h) {
  return std::visit([](const auto& f) { return f.lipschitz(); }, h);
}
inline std::size_t dimension(const Component& h) {
  return std::visit(
      [](const auto& f) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, LinearObjective>) {
          return static_cast<std::size_t>(f.c.size());
        } else {
          return static_cast<std::size_t>(f.a.size());
        }
      },
      h);
}

// ---------------------------------------------------------------------------
// Feasible set

/// Compact convex feasible set: an axis-aligned box or a ball centered at 0.
class FeasibleSet {
 public:
  enum class Kind { Box, Ball };

  static FeasibleSet box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    if (lo.size() == 0 || lo.size() != hi.size()) {
      throw Error(Errc::DimensionMismatch, "box bounds must be non-empty and of equal length");
    }
    if ((lo.array() > hi.array()).any()) throw Error(Errc::InvalidArgument, "box has lo > hi");
    FeasibleSet s;
    s.kind_ = Kind::Box;
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    return s;
  }

  static FeasibleSet ball(std::size_t dim, double radius) {
    if (dim == 0) throw Error(Errc::DimensionMismatch, "ball needs dimension >= 1");
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
      throw Error(Errc::InvalidArgument, "ball radius must be finite and nonnegative");
    }
    FeasibleSet s;
    s.kind_ = Kind::Ball;
    s.radius_ = radius;
    s.lo_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), -radius);
    s.hi_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), radius);
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(lo_.size()); }
  /// Bounding box (the set itself for Kind::Box).
  const Eigen::VectorXd& lower() const noexcept { return lo_; }
  const Eigen::VectorXd& upper() const noexcept { return hi_; }
  double radius() const noexcept { return radius_; }

  /// Euclidean projection.
  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    if (kind_ == Kind::Box) return x.cwiseMax(lo_).cwiseMin(hi_);
    const double r = x.norm();
    if (r <= radius_) return x;
    return x * (radius_ / r);
  }

  bool contains(const Eigen::VectorXd& x, double tol = 1e-12) const {
    if (kind_ == Kind::Box) {
      return ((x - lo_).array() >= -tol).all() && ((hi_ - x).array() >= -tol).all();
    }
    return x.norm() <= radius_ + tol;
  }

  /// max |x|^2 over the set.
  double max_sq_norm() const {
    if (kind_ == Kind::Ball) return radius_ * radius_;
    return lo_.cwiseAbs().cwiseMax(hi_.cwiseAbs()).squaredNorm();
  }

  double diameter() const {
    if (kind_ == Kind::Ball) return 2.0 * radius_;
    return (hi_ - lo_).norm();
  }

  /// Distance from the proximal center 0 to the set.
  double distance_to_origin() const {
    return project(Eigen::VectorXd::Zero(lo_.size())).norm();
  }

 private:
  FeasibleSet() = default;

  Kind kind_ = Kind::Box;
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
  double radius_ = 0.0;
};

// ---------------------------------------------------------------------------
// Problem

/// min over the feasible set of h(x) = (1/n) sum_i h_i(x), with h_i held by
/// agent i.
struct OptProblem {
  std::vector<Component> components;
  FeasibleSet feasible = FeasibleSet::ball(1, 1.0);
  std::optional<double> lipschitz_override;
  /// Upper bound on psi(x*) = |x*|^2 / 2; defaults to the value at the point
  /// of the set farthest from 0.
  std::optional<double> radius_sq_override;
  std::optional<Eigen::VectorXd> known_optimum;

  std::size_t dimension() const noexcept { return feasible.dimension(); }
  std::size_t agent_count() const noexcept { return components.size(); }

  double lipschitz() const {
    if (lipschitz_override) return *lipschitz_override;
    double L = 0.0;
    for (const auto& h : components) L = std::max(L, pushsum::lipschitz(h));
    return L;
  }

  double radius_sq() const {
    if (radius_sq_override) return *radius_sq_override;
    return 0.5 * feasible.max_sq_norm();
  }

  double objective(const Eigen::VectorXd& x) const {
    double sum = 0.0;
    for (const auto& h : components) sum += evaluate(h, x);
    return sum / static_cast<double>(components.size());
  }

  Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (const auto& h : components) g += pushsum::subgradient(h, x);
    return g / static_cast<double>(components.size());
  }
};

inline OptProblem make_problem(std::vector<Component> components, FeasibleSet feasible) {
  if (components.empty()) throw Error(Errc::InvalidArgument, "problem needs components");
  for (const auto& h : components) {
    if (dimension(h) != feasible.dimension()) {
      throw Error(Errc::DimensionMismatch, "component dimension differs from the feasible set");
    }
  }
  OptProblem p;
  p.components = std::move(components);
  p.feasible = std::move(feasible);
  return p;
}

/// Step sizes alpha[0] = A, alpha[t] = A / sqrt(t).
class StepSizeSchedule {
 public:
  explicit StepSizeSchedule(double A) : A_(A) {
    if (!(A > 0.0) || !std::isfinite(A)) {
      throw Error(Errc::InvalidArgument, "step-size constant A must be positive");
    }
  }
  double constant() const noexcept { return A_; }
  double operator()(std::size_t t) const {
    return t == 0 ? A_ : A_ / std::sqrt(static_cast<double>(t));
  }

 private:
  double A_;
};

/// argmin_{x in X} <z, x> + |x|^2 / (2 alpha), i.e. the projection of
/// -alpha z onto X.
inline Eigen::VectorXd proximal_projection(const Eigen::VectorXd& z, double alpha,
                                           const FeasibleSet& set) {
  if (!(alpha > 0.0)) throw Error(Errc::InvalidArgument, "alpha must be positive");
  return set.project(-alpha * z);
}

// ---------------------------------------------------------------------------
// Centralized baseline

struct DualAveragingTrajectory {
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> z;
};

inline DualAveragingTrajectory run_centralized_dual_averaging(const OptProblem& p,
                                                              const StepSizeSchedule& alpha,
                                                              std::size_t T) {
  const auto d = static_cast<Eigen::Index>(p.dimension());
  DualAveragingTrajectory out;
  out.x.push_back(Eigen::VectorXd::Zero(d));
  out.z.push_back(Eigen::VectorXd::Zero(d));
  for (std::size_t t = 0; t < T; ++t) {
    Eigen::VectorXd z = out.z.back() + p.subgradient(out.x.back());
    out.x.push_back(proximal_projection(z, alpha(t), p.feasible));
    out.z.push_back(std::move(z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Robust push-sum dual averaging

/// Per-iteration record of a distributed run, t = 0..T.
struct OptTrace {
  std::size_t real_count = 0;
  std::vector<Eigen::MatrixXd> x;             // n x d estimates
  std::vector<Eigen::MatrixXd> values;        // m x d node values, after the subgradient step
  std::vector<Eigen::VectorXd> weights;       // m node weights
  std::vector<Eigen::MatrixXd> subgradients;  // [r] n x d, g_i[r] for r = 0..T-1
  std::vector<Eigen::VectorXd> dual_average;  // (1/n) sum_{r<t} sum_i g_i[r]
  std::vector<Eigen::VectorXd> reference;     // projection of dual_average[t] with alpha[t-1]

  std::size_t iterations() const noexcept { return x.empty() ? 0 : x.size() - 1; }
  std::size_t node_count() const noexcept {
    return values.empty() ? real_count : static_cast<std::size_t>(values.front().rows());
  }

  Eigen::VectorXd ratio(NodeId i, std::size_t t) const {
    const double w = weights.at(t)(static_cast<Eigen::Index>(i));
    if (w == 0.0) {
      throw Error(Errc::ZeroWeight, "node " + std::to_string(i + 1) + " has zero weight");
    }
    return values.at(t).row(static_cast<Eigen::Index>(i)).transpose() / w;
  }
};

/// Distributed dual averaging with convergent robust push-sum as the mixing
/// step. Buffer nodes contribute zero subgradients.
inline OptTrace run_rpsda(const DirectedGraph& g, const OptProblem& p, const FailureSchedule& s,
                          const StepSizeSchedule& alpha, std::size_t T) {
  if (p.agent_count() != g.size()) {
    throw Error(Errc::DimensionMismatch, "problem has " + std::to_string(p.agent_count()) +
                                             " components for " + std::to_string(g.size()) +
                                             " agents");
  }
  detail::check_schedule(g, s, T);
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto d = static_cast<Eigen::Index>(p.dimension());

  PushSumNetwork net(g, Eigen::MatrixXd::Zero(n, d));
  OptTrace trace;
  trace.real_count = g.size();
  trace.x.push_back(Eigen::MatrixXd::Zero(n, d));
  trace.values.push_back(net.augmented_values());
  trace.weights.push_back(net.augmented_weights());
  trace.dual_average.push_back(Eigen::VectorXd::Zero(d));
  trace.reference.push_back(Eigen::VectorXd::Zero(d));

  Eigen::VectorXd subgradient_total = Eigen::VectorXd::Zero(d);
  for (std::size_t t = 1; t <= T; ++t) {
    net.step_convergent(s, t);
    const Eigen::MatrixXd& x_prev = trace.x.back();
    Eigen::MatrixXd grads(n, d);
    Eigen::MatrixXd x_next(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd gi =
          pushsum::subgradient(p.components[static_cast<std::size_t>(i)], x_prev.row(i).transpose());
      grads.row(i) = gi.transpose();
      AgentState& a = net.agent(static_cast<NodeId>(i));
      a.z += gi;
      x_next.row(i) = proximal_projection(a.z / a.w, alpha(t - 1), p.feasible).transpose();
    }
    subgradient_total += grads.colwise().sum().transpose();
    Eigen::VectorXd zbar = subgradient_total / static_cast<double>(n);

    trace.reference.push_back(proximal_projection(zbar, alpha(t - 1), p.feasible));
    trace.dual_average.push_back(std::move(zbar));
    trace.subgradients.push_back(std::move(grads));
    trace.x.push_back(std::move(x_next));
    trace.values.push_back(net.augmented_values());
    trace.weights.push_back(net.augmented_weights());
  }
  return trace;
}

/// (1/T) sum_{t=1}^{T} x_j[t]
inline Eigen::VectorXd running_average(const OptTrace& trace, NodeId j, std::size_t T) {
  if (T < 1 || T > trace.iterations()) {
    throw Error(Errc::IterationOutOfRange, "running average needs 1 <= T <= horizon");
  }
  if (j >= trace.real_count) throw Error(Errc::InvalidArgument, "no such agent");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(trace.x.front().cols());
  for (std::size_t t = 1; t <= T; ++t) sum += trace.x[t].row(static_cast<Eigen::Index>(j)).transpose();
  return sum / static_cast<double>(T);
}

/// Bound on h(xhat_j[T]) - h(x*) for alpha[t] = A / sqrt(t), T >= nB+1:
///   2 L^2 A (2 sqrt(T) + 1) / T + R^2 / (A sqrt(T))
///   + 3 L^2 A C (2 sqrt(T) + 1) / T,
/// with C the mixing constant of the graph and window.
inline double optimality_gap_bound(const OptProblem& p, const DirectedGraph& g,
                                   std::size_t window, const StepSizeSchedule& alpha,
                                   std::size_t T) {
  const auto c = contraction_constants(g, window);
  if (T < c.block) {
    throw Error(Errc::HorizonTooShort, "bound holds for T >= nB+1 = " + std::to_string(c.block));
  }
  const double L = p.lipschitz();
  const double A = alpha.constant();
  const double Tf = static_cast<double>(T);
  const double step_sum = 2.0 * std::sqrt(Tf) + 1.0;
  const double local = 2.0 * L * L * A * step_sum / Tf;
  const double prox = p.radius_sq() / (A * std::sqrt(Tf));
  if (L == 0.0) return local + prox;
  return local + prox + 3.0 * L * L * A * c.mixing_constant() * step_sum / Tf;
}

/// L / (beta^(nB+1) (1 - gamma^(1/(nB+1))) gamma^(nB/(nB+1)))
inline double mixing_error_bound(const DirectedGraph& g, std::size_t window, double L) {
  if (L == 0.0) return 0.0;
  return L * contraction_constants(g, window).mixing_constant();
}

/// max over real agents of |zbar[t] - z_i[t] / w_i[t]|.
inline double measured_mixing_error(const OptTrace& trace, std::size_t t) {
  if (t > trace.iterations()) throw Error(Errc::IterationOutOfRange, "t past end of trace");
  double worst = 0.0;
  for (NodeId i = 0; i < trace.real_count; ++i) {
    worst = std::max(worst, (trace.dual_average[t] - trace.ratio(i, t)).norm());
  }
  return worst;
}

struct MixingReport {
  double worst_measured = 0.0;
  std::size_t worst_t = 0;
  double bound = 0.0;
  bool pass = false;
};

/// Measured mixing error against its bound for every t in [nB+1, T].
inline MixingReport certify_mixing_error(const OptTrace& trace, const DirectedGraph& g,
                                         std::size_t window, double L, double slack = 0.0) {
  const auto c = contraction_constants(g, window);
  if (trace.iterations() < c.block) {
    throw Error(Errc::HorizonTooShort, "trace shorter than nB+1 = " + std::to_string(c.block));
  }
  MixingReport rep;
  rep.bound = mixing_error_bound(g, window, L);
  for (std::size_t t = c.block; t <= trace.iterations(); ++t) {
    const double e = measured_mixing_error(trace, t);
    if (e >= rep.worst_measured) {
      rep.worst_measured = e;
      rep.worst_t = t;
    }
  }
  rep.pass = rep.worst_measured <= rep.bound + slack;
  return rep;
}

/// Sampled check of the problem assumptions: midpoint convexity of every
/// component and |subgradient| <= L at feasible points.
struct ProblemCheck {
  bool convex = true;
  bool bounded_subgradients = true;
  bool ok() const { return convex && bounded_subgradients; }
};

inline ProblemCheck spot_check_problem(const OptProblem& p, std::uint64_t seed,
                                       std::size_t samples = 64) {
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd lo = p.feasible.lower();
  const Eigen::VectorXd span = p.feasible.upper() - lo;
  auto draw = [&] {
    Eigen::VectorXd x(lo.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = lo(k) + span(k) * detail::unit_draw(rng);
    return p.feasible.project(x);
  };
  const double L = p.lipschitz();
  ProblemCheck check;
  for (std::size_t s = 0; s < samples; ++s) {
    const Eigen::VectorXd a = draw();
    const Eigen::VectorXd b = draw();
    const Eigen::VectorXd mid = 0.5 * (a + b);
    for (const auto& h : p.components) {
      const double lhs = evaluate(h, mid);
      const double rhs = 0.5 * (evaluate(h, a) + evaluate(h, b));
      if (lhs > rhs + 1e-12 * (1.0 + std::abs(rhs))) check.convex = false;
      if (subgradient(h, a).norm() > L * (1.0 + 1e-12)) check.bounded_subgradients = false;
    }
  }
  return check;
}

// ---------------------------------------------------------------------------
// Reference optimum

struct ReferenceSolution {
  Eigen::VectorXd x;
  double value = 0.0;
  /// Final grid resolution; the value is within about L * grid_step of the
  /// optimum.
  double grid_step = 0.0;
};

namespace detail {

// Golden-section search of a unimodal f on [a, b].
template <typename F>
double golden_section(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

}  // namespace detail

/// Brute-force optimum for d <= 2: a grid over the bounding box (points
/// projected onto the set) zoomed around the incumbent until the spacing
/// reaches 1e-4 * diameter, then golden-section sweeps along each
/// coordinate. For d > 2 the problem must carry a known optimum.
inline ReferenceSolution solve_reference(const OptProblem& p) {
  const std::size_t d = p.dimension();
  if (d > 2) {
    if (!p.known_optimum) {
      throw Error(Errc::DimensionTooLarge, "grid oracle supports d <= 2 without a known optimum");
    }
    return {*p.known_optimum, p.objective(*p.known_optimum), 0.0};
  }
  const FeasibleSet& X = p.feasible;
  const double target_step = 1e-4 * std::max(X.diameter(), 1e-300);
  auto h = [&](const Eigen::VectorXd& x) { return p.objective(X.project(x)); };

  constexpr int kCells = 64;
  Eigen::VectorXd lo = X.lower();
  Eigen::VectorXd hi = X.upper();
  Eigen::VectorXd best = X.project(0.5 * (lo + hi));
  double best_val = h(best);
  double step = 0.0;
  for (;;) {
    const Eigen::VectorXd cell = (hi - lo) / kCells;
    step = cell.maxCoeff();
    Eigen::VectorXd pt(static_cast<Eigen::Index>(d));
    const int n1 = d == 2 ? kCells : 0;
    for (int a = 0; a <= kCells; ++a) {
      for (int b = 0; b <= n1; ++b) {
        pt(0) = lo(0) + a * cell(0);
        if (d == 2) pt(1) = lo(1) + b * cell(1);
        const double v = h(pt);
        if (v < best_val) {
          best_val = v;
          best = X.project(pt);
        }
      }
    }
    if (step <= target_step) break;
    lo = (best - 2.0 * cell).cwiseMax(X.lower());
    hi = (best + 2.0 * cell).cwiseMin(X.upper());
    if ((hi - lo).maxCoeff() <= 0.0) break;
  }

  // Coordinate polish inside the feasible segment through the incumbent.
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (std::size_t k = 0; k < d; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      double a = X.lower()(kk);
      double b = X.upper()(kk);
      if (X.kind() == FeasibleSet::Kind::Ball) {
        const double rest = best.squaredNorm() - best(kk) * best(kk);
        const double half = std::sqrt(std::max(0.0, X.radius() * X.radius() - rest));
        a = -half;
        b = half;
      }
      Eigen::VectorXd probe = best;
      auto line = [&](double v) {
        probe(kk) = v;
        return p.objective(probe);
      };
      const double v = detail::golden_section(line, a, b, 1e-3 * target_step);
      probe(kk) = v;
      const double val = p.objective(probe);
      if (val < best_val) {
        best_val = val;
        best = probe;
      }
    }
  }
  return {best, best_val, step};
}

// ---------------------------------------------------------------------------
// JSON problem description:
// {d, set: {kind: box|ball, params}, components: [{kind, params}], L?, R2?,
//  optimum?}

namespace detail {

inline Eigen::VectorXd vector_param(const nlohmann::json& j, std::size_t d,
                                    const std::string& name) {
  if (j.is_number()) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), j.get<double>());
  if (!j.is_array() || j.size() != d) {
    throw Error(Errc::ConfigInvalid, "'" + name + "' must be a number or an array of length d");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    if (!j[k].is_number()) throw Error(Errc::ConfigInvalid, "'" + name + "' must be numeric");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

}  // namespace detail

inline OptProblem problem_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::ConfigInvalid, "problem must be a JSON object");
  if (!j.contains("d") || !j.at("d").is_number_integer() || j.at("d").get<long long>() < 1) {
    throw Error(Errc::ConfigInvalid, "problem needs a positive integer 'd'");
  }
  const auto d = static_cast<std::size_t>(j.at("d").get<long long>());
  if (!j.contains("set") || !j.at("set").is_object()) {
    throw Error(Errc::ConfigInvalid, "problem needs a 'set' object");
  }
  const auto& set = j.at("set");
  const std::string set_kind = set.value("kind", "");
  const nlohmann::json params = set.value("params", nlohmann::json::object());
  std::optional<FeasibleSet> X;
  if (set_kind == "box") {
    if (!params.contains("lo") || !params.contains("hi")) {
      throw Error(Errc::ConfigInvalid, "box set needs params.lo and params.hi");
    }
    X = FeasibleSet::box(detail::vector_param(params.at("lo"), d, "lo"),
                         detail::vector_param(params.at("hi"), d, "hi"));
  } else if (set_kind == "ball") {
    if (!params.contains("radius") || !params.at("radius").is_number()) {
      throw Error(Errc::ConfigInvalid, "ball set needs numeric params.radius");
    }
    X = FeasibleSet::ball(d, params.at("radius").get<double>());
  } else {
    throw Error(Errc::ConfigInvalid, "set kind must be 'box' or 'ball'");
  }

  if (!j.contains("components") || !j.at("components").is_array()) {
    throw Error(Errc::ConfigInvalid, "problem needs a 'components' array");
  }
  std::vector<Component> comps;
  for (const auto& c : j.at("components")) {
    const std::string kind = c.value("kind", "");
    const nlohmann::json cp = c.value("params", nlohmann::json::object());
    if (kind == "linear") {
      if (!cp.contains("c")) throw Error(Errc::ConfigInvalid, "linear component needs params.c");
      comps.emplace_back(LinearObjective{detail::vector_param(cp.at("c"), d, "c")});
    } else if (kind == "abs_distance" || kind == "l2_distance") {
      if (!cp.contains("a")) throw Error(Errc::ConfigInvalid, kind + " component needs params.a");
      Eigen::VectorXd a = detail::vector_param(cp.at("a"), d, "a");
      if (kind == "abs_distance") {
        comps.emplace_back(AbsDistanceObjective{std::move(a)});
      } else {
        comps.emplace_back(L2DistanceObjective{std::move(a)});
      }
    } else {
      throw Error(Errc::ConfigInvalid, "unknown component kind '" + kind + "'");
    }
  }
  OptProblem p = make_problem(std::move(comps), std::move(*X));
  if (j.contains("L") && !j.at("L").is_null()) p.lipschitz_override = j.at("L").get<double>();
  if (j.contains("R2") && !j.at("R2").is_null()) p.radius_sq_override = j.at("R2").get<double>();
  if (j.contains("optimum") && !j.at("optimum").is_null()) {
    p.known_optimum = detail::vector_param(j.at("optimum"), d, "optimum");
  }
  return p;
}

inline nlohmann::json problem_to_json(const OptProblem& p) {
  nlohmann::json j;
  j["d"] = p.dimension();
  if (p.feasible.kind() == FeasibleSet::Kind::Box) {
    j["set"] = {{"kind", "box"},
                {"params",
                 {{"lo", detail::vector_json(p.feasible.lower())},
                  {"hi", detail::vector_json(p.feasible.upper())}}}};
  } else {
    j["set"] = {{"kind", "ball"}, {"params", {{"radius", p.feasible.radius()}}}};
  }
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& h : p.components) {
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, LinearObjective>) {
            comps.push_back({{"kind", "linear"}, {"params", {{"c", detail::vector_json(f.c)}}}});
          } else if constexpr (std::is_same_v<T, AbsDistanceObjective>) {
            comps.push_back(
                {{"kind", "abs_distance"}, {"params", {{"a", detail::vector_json(f.a)}}}});
          } else {
            comps.push_back(
                {{"kind", "l2_distance"}, {"params", {{"a", detail::vector_json(f.a)}}}});
          }
        },
        h);
  }
  j["components"] = std::move(comps);
  if (p.lipschitz_override) j["L"] = *p.lipschitz_override;
  if (p.radius_sq_override) j["R2"] = *p.radius_sq_override;
  if (p.known_optimum) j["optimum"] = detail::vector_json(*p.known_optimum);
  return j;
}

}  // namespace pushsum
