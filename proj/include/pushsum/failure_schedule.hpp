#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pushsum/error.hpp"
#include "pushsum/graph.hpp"

namespace pushsum {

/// Smallest B such that every length-B window of the pattern contains a 1,
/// i.e. the longest run of zeros plus one. nullopt when the pattern is
/// non-empty and never 1.
inline std::optional<std::size_t> smallest_window(std::span<const std::uint8_t> pattern) {
  if (pattern.empty()) return 1;
  std::size_t run = 0;
  std::size_t worst = 0;
  bool any = false;
  for (std::uint8_t bit : pattern) {
    if (bit) {
      any = true;
      run = 0;
    } else {
      worst = std::max(worst, ++run);
    }
  }
  if (!any) return std::nullopt;
  return worst + 1;
}

/// True iff every window of B consecutive entries lying inside the pattern
/// contains a 1. Patterns shorter than B hold no complete window.
inline bool pattern_is_b_bounded(std::span<const std::uint8_t> pattern, std::size_t window) {
  if (window == 0) return false;
  std::size_t run = 0;
  for (std::uint8_t bit : pattern) {
    run = bit ? 0 : run + 1;
    if (run >= window) return false;
  }
  return true;
}

/// Link-reliability indicators for every edge of a graph over iterations
/// 1..T, materialized up front so that the same schedule can be replayed
/// into the protocol state machines and the matrix evolution.
class FailureSchedule {
 public:
  FailureSchedule(std::vector<Edge> edges, std::size_t horizon, std::size_t window,
                  std::vector<std::uint8_t> bits, std::optional<std::uint64_t> seed)
      : edges_(std::move(edges)),
        horizon_(horizon),
        window_(window),
        bits_(std::move(bits)),
        seed_(seed) {}

  std::size_t horizon() const noexcept { return horizon_; }
  /// Reliability window B the schedule was generated for (scripted
  /// schedules: the smallest one it satisfies).
  std::size_t window() const noexcept { return window_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Indicator of the edge with the given lexicographic index at t in [1, T].
  bool reliable(std::size_t edge_index, std::size_t t) const {
    if (t < 1 || t > horizon_ || edge_index >= edges_.size()) {
      throw Error(Errc::IterationOutOfRange,
                  "indicator for t=" + std::to_string(t) + " outside [1, " +
                      std::to_string(horizon_) + "]");
    }
    return bits_[edge_index * horizon_ + (t - 1)] != 0;
  }

  std::span<const std::uint8_t> pattern(std::size_t edge_index) const {
    return std::span<const std::uint8_t>(bits_).subspan(edge_index * horizon_, horizon_);
  }

  /// Worst-case gap over all links (smallest window satisfied); nullopt when
  /// some link is never reliable.
  std::optional<std::size_t> worst_gap() const {
    std::size_t worst = 1;
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      auto w = smallest_window(pattern(k));
      if (!w) return std::nullopt;
      worst = std::max(worst, *w);
    }
    return worst;
  }

  /// Fraction of indicators equal to 0.
  double drop_rate() const {
    if (bits_.empty()) return 0.0;
    std::size_t zeros = 0;
    for (auto b : bits_) zeros += (b == 0);
    return static_cast<double>(zeros) / static_cast<double>(bits_.size());
  }

  bool matches(const DirectedGraph& g) const {
    return std::equal(edges_.begin(), edges_.end(), g.edges().begin(), g.edges().end());
  }

  friend bool operator==(const FailureSchedule&, const FailureSchedule&) = default;

 private:
  std::vector<Edge> edges_;
  std::size_t horizon_;
  std::size_t window_;
  std::vector<std::uint8_t> bits_;  // edge-major: bits_[k * T + (t - 1)]
  std::optional<std::uint64_t> seed_;
};

inline bool verify_b_bounded(const FailureSchedule& s, std::size_t window) {
  for (std::size_t k = 0; k < s.edges().size(); ++k) {
    if (!pattern_is_b_bounded(s.pattern(k), window)) return false;
  }
  return true;
}

/// Per-edge indicator patterns, each of length T.
using ScheduleTable = std::map<Edge, std::vector<std::uint8_t>>;

inline FailureSchedule scripted_schedule(const DirectedGraph& g, std::size_t horizon,
                                         const ScheduleTable& table) {
  std::vector<std::uint8_t> bits;
  bits.reserve(g.edge_count() * horizon);
  for (const Edge& e : g.edges()) {
    auto it = table.find(e);
    if (it == table.end() || it->second.size() != horizon) {
      throw Error(Errc::IncompleteTable, "no complete indicator row for link (" +
                                             std::to_string(e.src + 1) + ", " +
                                             std::to_string(e.dst + 1) + ")");
    }
    for (auto b : it->second) bits.push_back(b ? 1 : 0);
  }
  for (const auto& [e, row] : table) {
    if (!g.edge_index(e)) {
      throw Error(Errc::IncompleteTable, "table names (" + std::to_string(e.src + 1) + ", " +
                                             std::to_string(e.dst + 1) +
                                             ") which is not a link of the graph");
    }
  }
  std::size_t window = 1;
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    auto w = smallest_window(std::span<const std::uint8_t>(bits).subspan(k * horizon, horizon));
    if (!w) {
      const Edge e = g.edges()[k];
      throw Error(Errc::NeverReliableLink, "link (" + std::to_string(e.src + 1) + ", " +
                                               std::to_string(e.dst + 1) +
                                               ") is unreliable over the whole horizon");
    }
    window = std::max(window, *w);
  }
  return FailureSchedule(std::vector<Edge>(g.edges().begin(), g.edges().end()), horizon, window,
                         std::move(bits), std::nullopt);
}

namespace detail {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Each indicator is 0 with probability p_drop, except that a link which has
/// been down for B-1 consecutive iterations is forced up at the next one.
inline FailureSchedule bernoulli_b_bounded(const DirectedGraph& g, double p_drop,
                                           std::size_t window, std::size_t horizon,
                                           std::uint64_t seed) {
  if (!(p_drop >= 0.0 && p_drop < 1.0)) {
    throw Error(Errc::InvalidArgument, "p_drop must lie in [0, 1)");
  }
  if (window < 1) throw Error(Errc::InvalidArgument, "window B must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> bits(g.edge_count() * horizon, 1);
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    std::size_t down = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const bool drop = detail::unit_draw(rng) < p_drop;
      const bool forced = down + 1 >= window;
      const bool up = forced || !drop;
      bits[k * horizon + t] = up ? 1 : 0;
      down = up ? 0 : down + 1;
    }
  }
  return FailureSchedule(std::vector<Edge>(g.edges().begin(), g.edges().end()), horizon, window,
                         std::move(bits), seed);
}

/// Every link is up exactly at iterations t = 0 (mod B).
inline FailureSchedule periodic_adversarial(const DirectedGraph& g, std::size_t window,
                                            std::size_t horizon) {
  if (window < 1) throw Error(Errc::InvalidArgument, "window B must be at least 1");
  std::vector<std::uint8_t> bits(g.edge_count() * horizon, 0);
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    for (std::size_t t = 1; t <= horizon; ++t) {
      bits[k * horizon + (t - 1)] = (t % window == 0) ? 1 : 0;
    }
  }
  return FailureSchedule(std::vector<Edge>(g.edges().begin(), g.edges().end()), horizon, window,
                         std::move(bits), std::nullopt);
}

inline FailureSchedule all_reliable(const DirectedGraph& g, std::size_t horizon) {
  return periodic_adversarial(g, 1, horizon);
}

// CSV with header src,dst,t,indicator; one-based ids, edges in lexicographic
// order, t ascending.

inline void write_schedule_csv(std::ostream& out, const FailureSchedule& s) {
  out << "src,dst,t,indicator\n";
  for (std::size_t k = 0; k < s.edges().size(); ++k) {
    const Edge e = s.edges()[k];
    for (std::size_t t = 1; t <= s.horizon(); ++t) {
      out << e.src + 1 << ',' << e.dst + 1 << ',' << t << ',' << (s.reliable(k, t) ? 1 : 0)
          << '\n';
    }
  }
}

inline FailureSchedule read_schedule_csv(std::istream& in, const DirectedGraph& g) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::IOFailure, "empty schedule CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "src,dst,t,indicator") {
    throw Error(Errc::ConfigInvalid, "schedule CSV header must be 'src,dst,t,indicator'");
  }
  std::map<Edge, std::map<std::size_t, std::uint8_t>> cells;
  std::size_t horizon = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    long long src = 0, dst = 0, t = 0, bit = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> src >> c1 >> dst >> c2 >> t >> c3 >> bit) || c1 != ',' || c2 != ',' ||
        c3 != ',' || src < 1 || dst < 1 || t < 1 || (bit != 0 && bit != 1)) {
      throw Error(Errc::ConfigInvalid, "malformed schedule CSV line " + std::to_string(lineno));
    }
    const Edge e{static_cast<NodeId>(src - 1), static_cast<NodeId>(dst - 1)};
    cells[e][static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(bit);
    horizon = std::max(horizon, static_cast<std::size_t>(t));
  }
  ScheduleTable table;
  for (const auto& [e, byt] : cells) {
    std::vector<std::uint8_t> row(horizon, 0);
    if (byt.size() != horizon) {
      throw Error(Errc::IncompleteTable, "link (" + std::to_string(e.src + 1) + ", " +
                                             std::to_string(e.dst + 1) +
                                             ") misses some iterations");
    }
    for (const auto& [t, b] : byt) row[t - 1] = b;
    table.emplace(e, std::move(row));
  }
  return scripted_schedule(g, horizon, table);
}

}  // namespace pushsum
