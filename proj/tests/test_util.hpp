#pragma once

#include <cmath>
#include <cstdint>

#include "ptngarch/dgp.hpp"
#include "ptngarch/likelihood.hpp"
#include "ptngarch/network.hpp"
#include "ptngarch/rng.hpp"

namespace ptngarch::testing {

// Stationary-regime parameters used across the suites (α* + ξ + β = 0.9).
inline const ThresholdParams kStationary{1.0, 0.3, 0.2, 0.1, 0.3, 3};
// Benchmark simulation design.
inline const ThresholdParams kBenchmark{0.5, 0.7, 0.6, 0.1, 0.1, 5};

struct RandomCase {
  ThresholdParams truth;
  ThresholdParams probe;  // where derivatives are evaluated
  Network net;
  Panel panel;
};

/// A random (network, panel, evaluation point) triple for oracle checks.
inline RandomCase random_case(std::uint64_t seed) {
  Counter64 rng(seed);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  RandomCase c;
  const auto n = static_cast<std::size_t>(3 + rng.below(8));
  const auto t = static_cast<std::size_t>(30 + rng.below(70));
  c.net = rng.below(2) == 0 ? gen_random(n, 5.0, seed ^ 0x55) : gen_d_neighbourhood(n, 1);
  const long r = 1 + static_cast<long>(rng.below(5));
  c.truth = {u(0.5, 2.0), u(0.0, 0.4), u(0.0, 0.4), u(0.0, 0.2), u(0.0, 0.3), r};
  c.probe = {u(0.3, 2.5), u(0.05, 0.6), u(0.05, 0.6), u(0.02, 0.4), u(0.05, 0.8), r};
  c.panel = simulate(c.truth, c.net, t, 100, seed);
  return c;
}

inline double rel_err(double analytic, double oracle, double floor = 1e-4) {
  return std::abs(analytic - oracle) / std::max(std::abs(oracle), floor);
}

}  // namespace ptngarch::testing
