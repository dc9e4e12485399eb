#pragma once

#include <cmath>
#include <cstddef>

#include "pushsum/error.hpp"
#include "pushsum/graph.hpp"

namespace pushsum {

/// Constants governing how fast products of iteration matrices forget their
/// initial rows on a graph whose links are up at least once every B rounds.
///
///   beta  = 1 / max_i (d_i + 1)^2      smallest positive entry of any M[t]
///   block = n B + 1                    rounds needed for a positive product
///   gamma = 1 - beta^block             contraction per block
///
/// gamma is kept in log form: beta^block is far below machine epsilon for
/// moderate n B, and 1 - beta^block would round to exactly 1.
struct ContractionConstants {
  std::size_t block = 1;
  double beta = 1.0;
  double beta_block = 1.0;
  double log_gamma = 0.0;

  double gamma() const { return std::exp(log_gamma); }
  double gamma_pow(double exponent) const { return std::exp(exponent * log_gamma); }

  /// 1 / (beta^block (1 - gamma^(1/block)) gamma^((block-1)/block))
  double mixing_constant() const {
    const double k = static_cast<double>(block);
    const double one_minus_root = -std::expm1(log_gamma / k);
    return 1.0 / (beta_block * one_minus_root * gamma_pow((k - 1.0) / k));
  }
};

inline ContractionConstants contraction_constants(const DirectedGraph& g, std::size_t window) {
  if (window < 1) throw Error(Errc::InvalidArgument, "window B must be at least 1");
  ContractionConstants c;
  const double dmax = static_cast<double>(g.max_out_degree()) + 1.0;
  c.block = g.size() * window + 1;
  c.beta = 1.0 / (dmax * dmax);
  c.beta_block = std::pow(c.beta, static_cast<double>(c.block));
  c.log_gamma = std::log1p(-c.beta_block);
  return c;
}

}  // namespace pushsum
