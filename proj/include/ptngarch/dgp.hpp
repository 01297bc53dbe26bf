#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "ptngarch/error.hpp"
#include "ptngarch/network.hpp"
#include "ptngarch/panel.hpp"
#include "ptngarch/params.hpp"
#include "ptngarch/rng.hpp"

namespace ptngarch {

/// Sufficient condition for a strictly stationary solution with a finite
/// first moment: α* + ξ + β < 1.
struct StationarityReport {
  double alpha_star = 0.0;  // max{α⁽¹⁾, α⁽²⁾, |α⁽¹⁾r − α⁽²⁾(r−1)|}
  double total = 0.0;       // α* + ξ + β
  bool satisfied = false;   // total < 1
};

inline StationarityReport check_stationarity(const ThresholdParams& p) {
  p.validate();
  StationarityReport rep;
  const double r = static_cast<double>(p.r);
  rep.alpha_star = std::max({p.alpha1, p.alpha2, std::abs(p.alpha1 * r - p.alpha2 * (r - 1.0))});
  rep.total = rep.alpha_star + p.xi + p.beta;
  rep.satisfied = rep.total < 1.0;
  return rep;
}

/// The regime-switching own-lag response (α⁽¹⁾1{y≥r} + α⁽²⁾1{y<r})·y.
inline double threshold_response(Count y, double alpha1, double alpha2, long r) {
  return (y >= r ? alpha1 : alpha2) * static_cast<double>(y);
}

/// Exact Poisson variate. Sequential-search inversion below λ = 10;
/// Hörmann's transformed rejection (PTRS) above.
inline Count poisson_sample(double lambda, Counter64& rng) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    std::ostringstream msg;
    msg << "Poisson mean must be finite and nonnegative, got " << lambda;
    throw ValidationError(msg.str());
  }
  if (lambda == 0.0) return 0;

  if (lambda < 10.0) {
    const double u = rng.uniform();
    Count k = 0;
    double p = std::exp(-lambda);
    double cdf = p;
    // The tail beyond k = 200 has mass far below double resolution for λ < 10.
    while (u > cdf && k < 200) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<Count>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<Count>(k);
    }
  }
}

struct SimulationOptions {
  std::size_t burn_in = 500;
  double lambda_cap = 1e9;
  bool keep_lambda = false;
};

struct SimulationResult {
  Panel panel;
  std::vector<double> lambda;  // node-major like Panel, empty unless keep_lambda
};

/// Draws a panel from the threshold network GARCH process. The recursion
/// starts at λ_i = ω/(1−β) with a pre-sample draw and runs burn_in + t_len
/// steps, of which the first burn_in are discarded. Throws NumericalError
/// naming the node and step if an intensity exceeds lambda_cap.
inline SimulationResult simulate_path(const ThresholdParams& p, const Network& net,
                                      std::size_t t_len, std::uint64_t seed,
                                      const SimulationOptions& opts = {}) {
  p.validate_recursive();
  if (t_len < 2) throw ValidationError("simulation length T must be at least 2");
  const std::size_t n = net.size();
  if (n == 0) throw ValidationError("network is empty");

  Counter64 rng(seed);
  std::vector<double> lambda(n, p.omega / (1.0 - p.beta));
  std::vector<Count> y(n), y_prev(n);
  for (std::size_t i = 0; i < n; ++i) y_prev[i] = poisson_sample(lambda[i], rng);

  SimulationResult out;
  out.panel = Panel(n, t_len);
  if (opts.keep_lambda) out.lambda.assign(n * t_len, 0.0);

  // y_prev holds a pre-sample draw; every recorded step goes through the recursion.
  const std::size_t total = opts.burn_in + t_len;
  for (std::size_t step = 0; step < total; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      const double l = p.omega + threshold_response(y_prev[i], p.alpha1, p.alpha2, p.r) +
                       p.xi * net.neighbour_mean(i, y_prev) + p.beta * lambda[i];
      if (!(l <= opts.lambda_cap)) {
        std::ostringstream msg;
        msg << "intensity exploded at node " << i << ", step " << step << " (lambda = " << l
            << " > cap " << opts.lambda_cap << ")";
        throw NumericalError(msg.str());
      }
      lambda[i] = l;
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = poisson_sample(lambda[i], rng);
    if (step >= opts.burn_in) {
      const std::size_t t = step - opts.burn_in;
      for (std::size_t i = 0; i < n; ++i) {
        out.panel(i, t) = y[i];
        if (opts.keep_lambda) out.lambda[i * t_len + t] = lambda[i];
      }
    }
    std::swap(y, y_prev);
  }
  return out;
}

inline Panel simulate(const ThresholdParams& p, const Network& net, std::size_t t_len,
                      std::size_t burn_in, std::uint64_t seed) {
  SimulationOptions opts;
  opts.burn_in = burn_in;
  return simulate_path(p, net, t_len, seed, opts).panel;
}

}  // namespace ptngarch
