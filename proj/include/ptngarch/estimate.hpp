#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ptngarch/error.hpp"
#include "ptngarch/likelihood.hpp"
#include "ptngarch/linalg.hpp"
#include "ptngarch/network.hpp"
#include "ptngarch/optimize.hpp"
#include "ptngarch/panel.hpp"
#include "ptngarch/params.hpp"
#include "ptngarch/rng.hpp"
#include "ptngarch/special.hpp"

namespace ptngarch {

/// Search box and optimizer settings. The box is
/// [delta, coef_max] × [0, coef_max]³ × [0, beta_max].
struct FitOptions {
  long r_min = 1;
  long r_max = 0;  // 0: the 95th percentile of the pooled counts, capped at 100
  double delta = 1e-6;
  double beta_max = 0.999;
  double coef_max = 50.0;
  double tol_grad = 1e-8;
  int max_iter = 500;
  int n_starts = 3;
  /// When set, every start point is jittered by a deterministic factor in
  /// [0.75, 1.25] drawn from this seed (one stream per start).
  std::optional<std::uint64_t> start_seed;
  InitialIntensity initial = InitialIntensity::zero;

  void validate() const {
    if (r_min < 1) throw ValidationError("r_min must be at least 1");
    if (r_max != 0 && r_max < r_min) throw ValidationError("r_max must be >= r_min");
    if (!(delta > 0.0 && delta < coef_max)) throw ValidationError("need 0 < delta < coef_max");
    if (!(beta_max > 0.0 && beta_max < 1.0)) throw ValidationError("need 0 < beta_max < 1");
    if (!(tol_grad > 0.0)) throw ValidationError("tol_grad must be positive");
    if (max_iter < 1) throw ValidationError("max_iter must be positive");
    if (n_starts < 1) throw ValidationError("n_starts must be positive");
  }
};

/// Nearest-rank 95th percentile of all counts, clamped to [1, 100].
inline long default_r_max(const Panel& panel) {
  std::vector<Count> pooled(panel.data().begin(), panel.data().end());
  if (pooled.empty()) return 1;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(pooled.size())));
  const std::size_t idx = std::max<std::size_t>(rank, 1) - 1;
  std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(idx), pooled.end());
  return std::clamp<long>(static_cast<long>(pooled[idx]), 1, 100);
}

struct InnerFit {
  long r = 1;
  Theta theta{};
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  double projected_grad = 0.0;
  int best_start = 0;
  std::array<bool, 5> pinned{};  // coefficient fixed at 0: its regressor is identically zero
};

struct ProfilePoint {
  long r = 1;
  Theta theta{};
  double loglik = 0.0;
  bool converged = false;
};

struct FitResult {
  Theta theta_hat{};
  long r_hat = 1;
  double loglik = 0.0;      // mean over effective_nt
  double loglik_sum = 0.0;  // unscaled
  std::vector<ProfilePoint> profile;
  Mat5 sigma_hat{};
  Vec5 se{};  // NaN when Σ̂ is singular
  std::array<std::pair<double, double>, 5> ci95{};
  std::array<bool, 5> boundary_flags{};
  std::array<bool, 5> pinned{};
  std::size_t effective_nt = 0;
  std::size_t n_nodes = 0;
  std::size_t t_obs = 0;
  bool converged = false;  // the inner fit at r_hat converged
  bool flagged = false;    // no inner fit converged
  bool sigma_singular = false;
  std::string sigma_message;
  std::vector<std::string> node_ids;

  ThresholdParams params() const { return ThresholdParams::from_theta(theta_hat, r_hat); }
};

namespace detail {

inline std::vector<Theta> start_points(double mean_y, const FitOptions& opts) {
  const double m = std::max(mean_y, 10.0 * opts.delta);
  const std::array<Theta, 3> base = {
      Theta{m * (1.0 - 0.2), 0.1, 0.1, 0.05, 0.2},
      Theta{m, 0.01, 0.01, 0.01, 0.01},
      Theta{m * (1.0 - 0.4 - 0.05 - 0.2), 0.4, 0.4, 0.05, 0.2},
  };
  std::vector<Theta> out;
  for (int s = 0; s < opts.n_starts; ++s) {
    Theta t = base[static_cast<std::size_t>(s) % base.size()];
    const int cycle = s / static_cast<int>(base.size());
    if (cycle > 0) {
      for (auto& v : t) v *= 1.0 + 0.25 * cycle;
    }
    if (opts.start_seed) {
      Counter64 rng(derive_seed(*opts.start_seed, {static_cast<std::uint64_t>(s)}));
      for (auto& v : t) v *= 0.75 + 0.5 * rng.uniform();
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace detail

/// Step one of the two-step estimator: maximize L̃(θ, r) over the box for a
/// fixed threshold, keeping the best of opts.n_starts deterministic starts.
inline InnerFit fit_theta_given_r(const LikelihoodProblem& prob, double mean_y, long r,
                                  const FitOptions& opts) {
  opts.validate();
  if (r < 1) throw ValidationError("threshold r must be at least 1");

  Theta lo{opts.delta, 0.0, 0.0, 0.0, 0.0};
  Theta hi{opts.coef_max, opts.coef_max, opts.coef_max, opts.coef_max, opts.beta_max};
  InnerFit best;
  best.r = r;
  for (Coef k : {kAlphaHigh, kAlphaLow, kXi}) {
    if (!prob.regressor_active(k, r)) {
      best.pinned[k] = true;
      hi[k] = 0.0;
    }
  }

  auto objective = [&](const Theta& x, Theta& grad) {
    const auto e = prob.evaluate(ThresholdParams::from_theta(x, r), Derivatives::gradient);
    for (std::size_t k = 0; k < 5; ++k) grad[k] = -e.score[k];
    return -e.loglik;
  };

  BoxOptions box;
  box.tol_grad = opts.tol_grad;
  box.max_iter = opts.max_iter;
  const auto starts = detail::start_points(mean_y, opts);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto res = minimize_box<5>(objective, starts[s], lo, hi, box);
    const double ll = -res.value;
    if (ll > best.loglik) {
      best.theta = res.x;
      best.loglik = ll;
      best.converged = res.converged;
      best.iterations = res.iterations;
      best.projected_grad = res.projected_grad;
      best.best_start = static_cast<int>(s);
    }
  }
  return best;
}

inline InnerFit fit_theta_given_r(const Panel& panel, const Network& net, long r,
                                  const FitOptions& opts) {
  LikelihoodProblem prob(panel, net, opts.initial);
  return fit_theta_given_r(prob, panel.mean(), r, opts);
}

/// Standard errors sqrt(diag(Σ̂⁻¹) / effective_nt). Throws NumericalError
/// naming the coefficient with the smallest pivot if Σ̂ is singular.
inline Vec5 standard_errors(const Mat5& sigma, std::size_t effective_nt) {
  const auto chol = Cholesky::factor(Matrix::from(sigma), 1e-12);
  if (!chol.ok) {
    throw NumericalError("information matrix is singular: smallest pivot at coefficient '" +
                         std::string(kCoefNames[chol.weakest]) + "'");
  }
  const Matrix inv = chol.inverse();
  Vec5 se{};
  for (std::size_t k = 0; k < 5; ++k) {
    se[k] = std::sqrt(inv(k, k) / static_cast<double>(effective_nt));
  }
  return se;
}

/// θ̂_k ± z_{(1+level)/2} · ŜE_k, with ŜE recomputed from Σ̂.
inline std::array<std::pair<double, double>, 5> confidence_intervals(const FitResult& fit,
                                                                     double level = 0.95) {
  if (!(level >= 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in [0, 1)");
  const Vec5 se = standard_errors(fit.sigma_hat, fit.effective_nt);
  const double z = level == 0.0 ? 0.0 : normal_quantile(0.5 * (1.0 + level));
  std::array<std::pair<double, double>, 5> ci{};
  for (std::size_t k = 0; k < 5; ++k) {
    ci[k] = {fit.theta_hat[k] - z * se[k], fit.theta_hat[k] + z * se[k]};
  }
  return ci;
}

/// Step two: profile the inner optimum over every r in [r_min, r_max] and
/// keep the best (ties to the smallest r), then attach Σ̂, SEs and 95% CIs.
inline FitResult fit(const Panel& panel, const Network& net, const FitOptions& opts_in = {}) {
  FitOptions opts = opts_in;
  if (opts.r_max == 0) opts.r_max = std::max(opts.r_min, default_r_max(panel));
  opts.validate();

  LikelihoodProblem prob(panel, net, opts.initial);
  const double mean_y = panel.mean();

  FitResult out;
  out.n_nodes = panel.n_nodes();
  out.t_obs = panel.t_len();
  out.effective_nt = prob.effective_nt();
  out.node_ids = panel.node_ids();

  InnerFit best;
  bool any_converged = false;
  for (long r = opts.r_min; r <= opts.r_max; ++r) {
    InnerFit inner = fit_theta_given_r(prob, mean_y, r, opts);
    out.profile.push_back({r, inner.theta, inner.loglik, inner.converged});
    any_converged = any_converged || inner.converged;
    if (inner.loglik > best.loglik) best = inner;
  }

  out.theta_hat = best.theta;
  out.r_hat = best.r;
  out.converged = best.converged;
  out.flagged = !any_converged;
  out.pinned = best.pinned;
  const ThresholdParams p = out.params();
  const auto eval = prob.evaluate(p, Derivatives::gradient);
  out.loglik = eval.loglik;
  out.loglik_sum = eval.loglik_sum;
  out.sigma_hat = prob.fisher_info(p);

  const Theta lo{opts.delta, 0.0, 0.0, 0.0, 0.0};
  const Theta hi{opts.coef_max, opts.coef_max, opts.coef_max, opts.coef_max, opts.beta_max};
  for (std::size_t k = 0; k < 5; ++k) {
    out.boundary_flags[k] = out.theta_hat[k] <= lo[k] || out.theta_hat[k] >= hi[k];
  }

  try {
    out.se = standard_errors(out.sigma_hat, out.effective_nt);
    out.ci95 = confidence_intervals(out, 0.95);
  } catch (const NumericalError& e) {
    out.sigma_singular = true;
    out.sigma_message = e.what();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.se.fill(nan);
    out.ci95.fill({nan, nan});
  }
  return out;
}

}  // namespace ptngarch
