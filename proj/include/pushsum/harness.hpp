#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "pushsum/augmented_matrix.hpp"
#include "pushsum/consensus.hpp"
#include "pushsum/dual_averaging.hpp"
#include "pushsum/error.hpp"
#include "pushsum/failure_schedule.hpp"
#include "pushsum/graph.hpp"
#include "pushsum/io.hpp"

namespace pushsum {

struct ScheduleSpec {
  std::string kind = "reliable";  // reliable | bernoulli | periodic | scripted
  double p_drop = 0.0;
  std::size_t window = 1;
  std::optional<std::uint64_t> seed;
  std::string file;  // CSV, for kind == scripted

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

struct Tolerances {
  double mass = 1e-9;
  double row_sum = 1e-12;
  double entry = 1e-12;
  double contraction = 1e-10;
  double dual_identity = 1e-9;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// Everything needed to reproduce one run. Graph, inputs and problem are
/// kept as their JSON descriptions and parsed by validate().
struct ExperimentConfig {
  std::string mode;  // consensus | optimize | matrix-audit | verify-schedule
  nlohmann::json graph;
  std::string graph_file;
  ScheduleSpec schedule;
  std::string algorithm = "convergent";  // push_sum | robust | convergent
  nlohmann::json inputs;
  nlohmann::json problem;
  std::size_t T = 0;
  double A = 1.0;
  std::optional<std::pair<std::size_t, std::size_t>> window;
  std::string trace_file = "trace.csv";
  std::string summary_file = "summary.json";
  Tolerances tolerances;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline void config_error(const std::string& what) { throw Error(Errc::ConfigInvalid, what); }

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(std::string("field '") + key + "' has the wrong type");
  }
  return fallback;
}

inline std::size_t get_count(const nlohmann::json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    config_error(std::string("field '") + key + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) detail::config_error("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.mode = detail::get_or<std::string>(j, "mode", "");
  if (j.contains("graph")) cfg.graph = j.at("graph");
  cfg.graph_file = detail::get_or<std::string>(j, "graph_file", "");
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (!s.is_object()) detail::config_error("'schedule' must be an object");
    cfg.schedule.kind = detail::get_or<std::string>(s, "kind", "reliable");
    cfg.schedule.p_drop = detail::get_or<double>(s, "p_drop", 0.0);
    cfg.schedule.window = detail::get_count(s, "B", 1);
    if (s.contains("seed") && !s.at("seed").is_null()) {
      if (!s.at("seed").is_number_unsigned()) detail::config_error("'seed' must be a u64");
      cfg.schedule.seed = s.at("seed").get<std::uint64_t>();
    }
    cfg.schedule.file = detail::get_or<std::string>(s, "file", "");
  }
  cfg.algorithm = detail::get_or<std::string>(j, "algorithm", "convergent");
  if (j.contains("inputs")) cfg.inputs = j.at("inputs");
  if (j.contains("problem")) cfg.problem = j.at("problem");
  cfg.T = detail::get_count(j, "T", 0);
  cfg.A = detail::get_or<double>(j, "A", 1.0);
  if (j.contains("window") && !j.at("window").is_null()) {
    const auto& w = j.at("window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number_unsigned() ||
        !w[1].is_number_unsigned()) {
      detail::config_error("'window' must be [r, t]");
    }
    cfg.window = std::pair{w[0].get<std::size_t>(), w[1].get<std::size_t>()};
  }
  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    cfg.trace_file = detail::get_or<std::string>(o, "trace", cfg.trace_file);
    cfg.summary_file = detail::get_or<std::string>(o, "summary", cfg.summary_file);
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    cfg.tolerances.mass = detail::get_or<double>(t, "mass", cfg.tolerances.mass);
    cfg.tolerances.row_sum = detail::get_or<double>(t, "row_sum", cfg.tolerances.row_sum);
    cfg.tolerances.entry = detail::get_or<double>(t, "entry", cfg.tolerances.entry);
    cfg.tolerances.contraction =
        detail::get_or<double>(t, "contraction", cfg.tolerances.contraction);
    cfg.tolerances.dual_identity =
        detail::get_or<double>(t, "dual_identity", cfg.tolerances.dual_identity);
  }
  return cfg;
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["mode"] = cfg.mode;
  if (!cfg.graph.is_null()) j["graph"] = cfg.graph;
  if (!cfg.graph_file.empty()) j["graph_file"] = cfg.graph_file;
  nlohmann::ordered_json s;
  s["kind"] = cfg.schedule.kind;
  s["p_drop"] = cfg.schedule.p_drop;
  s["B"] = cfg.schedule.window;
  s["seed"] = cfg.schedule.seed ? nlohmann::ordered_json(*cfg.schedule.seed) : nullptr;
  if (!cfg.schedule.file.empty()) s["file"] = cfg.schedule.file;
  j["schedule"] = std::move(s);
  j["algorithm"] = cfg.algorithm;
  if (!cfg.inputs.is_null()) j["inputs"] = cfg.inputs;
  if (!cfg.problem.is_null()) j["problem"] = cfg.problem;
  j["T"] = cfg.T;
  j["A"] = cfg.A;
  j["window"] = cfg.window ? nlohmann::ordered_json({cfg.window->first, cfg.window->second})
                           : nlohmann::ordered_json(nullptr);
  j["outputs"] = {{"trace", cfg.trace_file}, {"summary", cfg.summary_file}};
  j["tolerances"] = {{"mass", cfg.tolerances.mass},
                     {"row_sum", cfg.tolerances.row_sum},
                     {"entry", cfg.tolerances.entry},
                     {"contraction", cfg.tolerances.contraction},
                     {"dual_identity", cfg.tolerances.dual_identity}};
  return j;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline std::string emit_config(const ExperimentConfig& cfg) { return dump_json(config_to_json(cfg)); }

inline DirectedGraph load_graph(const ExperimentConfig& cfg) {
  if (!cfg.graph.is_null()) return graph_from_json(cfg.graph);
  if (!cfg.graph_file.empty()) {
    try {
      return graph_from_json(nlohmann::json::parse(read_file(cfg.graph_file)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::ConfigInvalid, "graph file is not valid JSON: " + std::string(e.what()));
    }
  }
  throw Error(Errc::ConfigInvalid, "config needs 'graph' or 'graph_file'");
}

inline FailureSchedule load_schedule(const ScheduleSpec& spec, const DirectedGraph& g,
                                     std::size_t horizon) {
  if (spec.kind == "reliable") return all_reliable(g, horizon);
  if (spec.kind == "bernoulli") {
    return bernoulli_b_bounded(g, spec.p_drop, spec.window, horizon, spec.seed.value_or(0));
  }
  if (spec.kind == "periodic") return periodic_adversarial(g, spec.window, horizon);
  if (spec.kind == "scripted") {
    if (spec.file.empty()) throw Error(Errc::ConfigInvalid, "scripted schedule needs 'file'");
    std::istringstream in(read_file(spec.file));
    return read_schedule_csv(in, g);
  }
  throw Error(Errc::ConfigInvalid, "unknown schedule kind '" + spec.kind + "'");
}

inline Eigen::MatrixXd inputs_from_json(const nlohmann::json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) {
    throw Error(Errc::ConfigInvalid, "'inputs' must list one value per agent");
  }
  std::size_t d = 1;
  if (n > 0 && j[0].is_array()) d = j[0].size();
  if (d == 0) throw Error(Errc::ConfigInvalid, "inputs need at least one coordinate");
  Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = j[i];
    if (row.is_number() && d == 1) {
      y(static_cast<Eigen::Index>(i), 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || row.size() != d) {
      throw Error(Errc::ConfigInvalid, "every input must have the same dimension");
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (!row[k].is_number()) throw Error(Errc::ConfigInvalid, "inputs must be numeric");
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
  }
  return y;
}

/// Checks every field the selected mode uses, parsing graph, schedule,
/// inputs and problem without running anything.
inline void validate(const ExperimentConfig& cfg) {
  if (cfg.mode != "consensus" && cfg.mode != "optimize" && cfg.mode != "matrix-audit" &&
      cfg.mode != "verify-schedule") {
    throw Error(Errc::ConfigInvalid, "mode must be consensus, optimize, matrix-audit or "
                                     "verify-schedule");
  }
  const DirectedGraph g = load_graph(cfg);
  const auto& s = cfg.schedule;
  if (s.kind != "reliable" && s.kind != "bernoulli" && s.kind != "periodic" &&
      s.kind != "scripted") {
    throw Error(Errc::ConfigInvalid, "unknown schedule kind '" + s.kind + "'");
  }
  if (s.window < 1) throw Error(Errc::ConfigInvalid, "schedule B must be at least 1");
  if (!(s.p_drop >= 0.0 && s.p_drop < 1.0)) {
    throw Error(Errc::ConfigInvalid, "schedule p_drop must lie in [0, 1)");
  }
  if (cfg.mode == "consensus") {
    if (cfg.algorithm != "push_sum" && cfg.algorithm != "robust" && cfg.algorithm != "convergent") {
      throw Error(Errc::ConfigInvalid, "algorithm must be push_sum, robust or convergent");
    }
    if (cfg.algorithm == "push_sum" && s.kind != "reliable") {
      throw Error(Errc::ConfigInvalid, "push_sum runs only on a reliable schedule");
    }
    inputs_from_json(cfg.inputs, g.size());
  }
  if (cfg.mode == "optimize") {
    const OptProblem p = problem_from_json(cfg.problem);
    if (p.agent_count() != g.size()) {
      throw Error(Errc::ConfigInvalid, "problem needs one component per agent");
    }
    StepSizeSchedule{cfg.A};
  }
  if (cfg.mode == "matrix-audit" && cfg.window) {
    if (cfg.window->first < 1 || cfg.window->first > cfg.window->second) {
      throw Error(Errc::ConfigInvalid, "audit window needs 1 <= r <= t");
    }
  }
}

struct RunArtifact {
  ExperimentConfig config;
  std::optional<std::uint64_t> seed;
  std::string trace_csv;  // empty when the mode produces no trace
  nlohmann::ordered_json summary;
  double wall_clock_seconds = 0.0;
  bool pass = true;
};

namespace detail {

inline nlohmann::ordered_json certification(const std::string& name, const std::string& checks,
                                            double measured, double bound, bool pass) {
  nlohmann::ordered_json c;
  c["name"] = name;
  c["checks"] = checks;
  c["measured"] = measured;
  c["bound"] = bound;
  c["pass"] = pass;
  return c;
}

inline nlohmann::ordered_json ordered_vector(const Eigen::VectorXd& v) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

inline std::size_t schedule_window(const ExperimentConfig& cfg, const FailureSchedule& s) {
  return cfg.schedule.kind == "reliable" ? 1 : s.window();
}

inline void run_consensus(const ExperimentConfig& cfg, RunArtifact& art,
                          nlohmann::ordered_json& results,
                          nlohmann::ordered_json& certs) {
  const DirectedGraph g = load_graph(cfg);
  const Eigen::MatrixXd y = inputs_from_json(cfg.inputs, g.size());
  const FailureSchedule s = load_schedule(cfg.schedule, g, cfg.T);
  ConsensusTrace trace;
  if (cfg.algorithm == "push_sum") {
    trace = run_push_sum(g, y, cfg.T);
  } else if (cfg.algorithm == "robust") {
    trace = run_robust_push_sum(g, y, s, cfg.T);
  } else {
    trace = run_convergent_robust_push_sum(g, y, s, cfg.T);
  }
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  art.trace_csv = csv.str();

  results["protocol"] = std::string(to_string(trace.protocol));
  results["n"] = g.size();
  results["m"] = trace.node_count();
  results["d"] = trace.dimension();
  results["average"] = ordered_vector(trace.average());
  if (cfg.T == 0) return;

  try {
    results["final_error"] = consensus_error(trace, cfg.T);
  } catch (const Error& e) {
    if (e.code() != Errc::ZeroWeight) throw;
    results["final_error"] = nullptr;
  }

  const MassDeviation dev = mass_deviation(trace);
  const double worst = std::max(dev.value, dev.weight);
  certs.push_back(certification("mass_conservation",
                                "value and weight totals over all nodes stay at sum(y) and n",
                                worst, cfg.tolerances.mass, worst <= cfg.tolerances.mass));

  if (trace.protocol != Protocol::ConvergentRobustPushSum) return;
  const std::size_t B = schedule_window(cfg, s);
  const bool bounded = verify_b_bounded(s, B);
  certs.push_back(certification("schedule_b_bounded",
                                "every link is up at least once in any B consecutive rounds",
                                static_cast<double>(s.worst_gap().value_or(0)),
                                static_cast<double>(B), bounded));
  if ((y.array() < 0.0).any()) {
    results["consensus_error_bound"] = "skipped: negative inputs";
    return;
  }
  // Report the round with the least slack.
  double best_slack = std::numeric_limits<double>::infinity();
  double at_measured = 0.0;
  double at_bound = 0.0;
  std::size_t at_t = 1;
  bool ok = true;
  for (std::size_t t = 1; t <= cfg.T; ++t) {
    const double err = consensus_error(trace, t);
    const double bound = consensus_error_bound(g, B, y, t);
    ok = ok && err <= bound;
    if (bound - err < best_slack) {
      best_slack = bound - err;
      at_measured = err;
      at_bound = bound;
      at_t = t;
    }
  }
  auto c = certification("consensus_error_bound",
                         "ratio error <= |sum y| / (n beta^(nB+1)) gamma^floor(t/(nB+1)) "
                         "for every t",
                         at_measured, at_bound, ok && bounded);
  c["at_t"] = at_t;
  certs.push_back(std::move(c));
}

inline void run_matrix_audit(const ExperimentConfig& cfg, nlohmann::ordered_json& results,
                             nlohmann::ordered_json& certs) {
  const DirectedGraph g = load_graph(cfg);
  const AugmentedGraph ag = augment(g);
  const std::size_t B = cfg.schedule.kind == "reliable" ? 1 : cfg.schedule.window;
  const auto c = contraction_constants(g, B);
  const auto [r, t] = cfg.window.value_or(std::pair<std::size_t, std::size_t>{1, c.block});
  const FailureSchedule s = load_schedule(cfg.schedule, g, std::max(t, cfg.T));
  const std::size_t window = schedule_window(cfg, s);
  const MatrixAudit audit =
      audit_window(ag, s, r, t, window, cfg.tolerances.entry, cfg.tolerances.contraction);
  results["audit"] = audit_to_json(audit);
  results["m"] = ag.node_count();
  results["block"] = contraction_constants(g, window).block;

  certs.push_back(certification("row_stochastic", "every M[k] in the window has unit row sums",
                                audit.max_row_sum_error, cfg.tolerances.row_sum,
                                audit.max_row_sum_error <= cfg.tolerances.row_sum));
  if (audit.entry) {
    certs.push_back(certification("entry_lower_bound",
                                  "every entry of Psi(r,t) >= beta^(nB+1) when t-r+1 >= nB+1",
                                  audit.entry->min_entry, audit.entry->bound, audit.entry->pass));
  }
  certs.push_back(certification("hajnal_product",
                                "delta(Psi(r,t)) <= product of lambda(M[k])",
                                audit.contraction.delta, audit.contraction.lambda_product,
                                audit.contraction.pass_hajnal));
  certs.push_back(certification("block_contraction",
                                "delta(Psi(r,t)) <= gamma^floor((t-r+1)/(nB+1))",
                                audit.contraction.delta, audit.contraction.gamma_bound,
                                audit.contraction.pass_block));
}

inline void write_opt_trace_csv(std::ostream& out, const OptTrace& trace) {
  const auto d = trace.x.front().cols();
  out << "t,node_id,kind";
  for (Eigen::Index c = 1; c <= d; ++c) out << ",z" << c;
  out << ",w";
  for (Eigen::Index c = 1; c <= d; ++c) out << ",x" << c;
  out << '\n';
  for (std::size_t t = 0; t < trace.values.size(); ++t) {
    for (std::size_t i = 0; i < trace.node_count(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const bool real = i < trace.real_count;
      out << t << ',' << i + 1 << ',' << (real ? "real" : "virtual");
      for (Eigen::Index c = 0; c < d; ++c) out << ',' << format_double(trace.values[t](row, c));
      out << ',' << format_double(trace.weights[t](row));
      for (Eigen::Index c = 0; c < d; ++c) {
        out << ',';
        if (real) out << format_double(trace.x[t](row, c));
      }
      out << '\n';
    }
  }
}

inline void run_optimize(const ExperimentConfig& cfg, RunArtifact& art,
                         nlohmann::ordered_json& results, nlohmann::ordered_json& certs) {
  const DirectedGraph g = load_graph(cfg);
  const OptProblem p = problem_from_json(cfg.problem);
  const FailureSchedule s = load_schedule(cfg.schedule, g, cfg.T);
  const StepSizeSchedule alpha(cfg.A);
  const OptTrace trace = run_rpsda(g, p, s, alpha, cfg.T);
  std::ostringstream csv;
  write_opt_trace_csv(csv, trace);
  art.trace_csv = csv.str();

  const std::size_t B = schedule_window(cfg, s);
  const auto c = contraction_constants(g, B);
  const double L = p.lipschitz();
  results["n"] = g.size();
  results["d"] = p.dimension();
  results["L"] = L;
  results["R2"] = p.radius_sq();
  results["block"] = c.block;
  if (cfg.T == 0) return;

  const ReferenceSolution ref = solve_reference(p);
  results["x_star"] = ordered_vector(ref.x);
  results["h_star"] = ref.value;
  results["oracle_budget"] = L * ref.grid_step;

  double infeasible = 0.0;
  double identity_gap = 0.0;
  for (std::size_t t = 0; t <= cfg.T; ++t) {
    for (Eigen::Index i = 0; i < trace.x[t].rows(); ++i) {
      const Eigen::VectorXd xi = trace.x[t].row(i).transpose();
      infeasible = std::max(infeasible, (xi - p.feasible.project(xi)).norm());
    }
    const Eigen::VectorXd avg =
        trace.values[t].colwise().sum().transpose() / static_cast<double>(g.size());
    identity_gap = std::max(identity_gap, (avg - trace.dual_average[t]).norm());
  }
  certs.push_back(certification("feasibility", "every iterate lies in the feasible set",
                                infeasible, 1e-12, infeasible <= 1e-12));
  certs.push_back(certification("dual_identity",
                                "(1/n) sum of z over all nodes equals the averaged subgradient sum",
                                identity_gap, cfg.tolerances.dual_identity,
                                identity_gap <= cfg.tolerances.dual_identity));

  nlohmann::ordered_json gaps = nlohmann::ordered_json::array();
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (NodeId j = 0; j < g.size(); ++j) {
    const double gap = p.objective(running_average(trace, j, cfg.T)) - ref.value;
    gaps.push_back(gap);
    worst_gap = std::max(worst_gap, gap);
  }
  results["gaps"] = std::move(gaps);

  if (cfg.T < c.block) {
    results["optimality_gap_bound"] = "skipped: T < nB+1";
    return;
  }
  const double bound = optimality_gap_bound(p, g, B, alpha, cfg.T);
  const double budget = L * ref.grid_step;
  certs.push_back(certification("optimality_gap_bound",
                                "h(xhat_j[T]) - h(x*) within the O(1/sqrt(T)) bound for all j",
                                worst_gap, bound + budget, worst_gap <= bound + budget));
  const MixingReport mix = certify_mixing_error(trace, g, B, L);
  auto mc = certification("mixing_error_bound",
                          "|zbar[t] - z_i[t]/w_i[t]| <= L C for all t >= nB+1",
                          mix.worst_measured, mix.bound, mix.pass);
  mc["at_t"] = mix.worst_t;
  certs.push_back(std::move(mc));
}

inline void run_verify_schedule(const ExperimentConfig& cfg, RunArtifact& art,
                                nlohmann::ordered_json& results, nlohmann::ordered_json& certs) {
  const DirectedGraph g = load_graph(cfg);
  const FailureSchedule s = load_schedule(cfg.schedule, g, cfg.T);
  std::ostringstream csv;
  write_schedule_csv(csv, s);
  art.trace_csv = csv.str();
  const std::size_t B = schedule_window(cfg, s);
  results["horizon"] = s.horizon();
  results["links"] = s.edges().size();
  results["drop_rate"] = s.drop_rate();
  const auto gap = s.worst_gap();
  results["worst_gap"] = gap ? nlohmann::ordered_json(*gap) : nullptr;
  if (cfg.T == 0) return;
  certs.push_back(certification("schedule_b_bounded",
                                "every link is up at least once in any B consecutive rounds",
                                gap ? static_cast<double>(*gap)
                                    : std::numeric_limits<double>::infinity(),
                                static_cast<double>(B), verify_b_bounded(s, B)));
}

}  // namespace detail

/// Validates the config, runs the selected mode and collects the trace and
/// summary in memory. Only input files named by the config are touched.
inline RunArtifact run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  validate(cfg);
  RunArtifact art;
  art.config = cfg;
  art.seed = cfg.schedule.seed;

  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  nlohmann::ordered_json certs = nlohmann::ordered_json::array();
  if (cfg.mode == "consensus") {
    detail::run_consensus(cfg, art, results, certs);
  } else if (cfg.mode == "optimize") {
    detail::run_optimize(cfg, art, results, certs);
  } else if (cfg.mode == "matrix-audit") {
    detail::run_matrix_audit(cfg, results, certs);
  } else {
    detail::run_verify_schedule(cfg, art, results, certs);
  }

  bool pass = true;
  for (const auto& c : certs) pass = pass && c.at("pass").get<bool>();
  art.pass = pass;

  nlohmann::ordered_json& sum = art.summary;
  sum["mode"] = cfg.mode;
  sum["seed"] = art.seed ? nlohmann::ordered_json(*art.seed) : nullptr;
  sum["iterations"] = cfg.T;
  if (results.contains("final_error")) {
    sum["final_error"] = results["final_error"];
    results.erase("final_error");
  }
  sum["results"] = std::move(results);
  sum["certifications"] = std::move(certs);
  sum["pass"] = pass;
  sum["config"] = config_to_json(cfg);
  art.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return art;
}

/// Deterministic summary document. Wall-clock time is deliberately absent so
/// that identical configs produce identical bytes.
inline std::string emit_summary(const RunArtifact& art) { return dump_json(art.summary); }

/// Writes the trace (if any) and summary under out_dir, creating it.
inline void write_artifact(const RunArtifact& art, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IOFailure, "cannot create '" + out_dir.string() + "': " + ec.message());
  if (!art.trace_csv.empty()) write_file((out_dir / art.config.trace_file).string(), art.trace_csv);
  write_file((out_dir / art.config.summary_file).string(), emit_summary(art));
}

}  // namespace pushsum
