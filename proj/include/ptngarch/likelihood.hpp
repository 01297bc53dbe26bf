#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "ptngarch/error.hpp"
#include "ptngarch/linalg.hpp"
#include "ptngarch/network.hpp"
#include "ptngarch/panel.hpp"
#include "ptngarch/params.hpp"

namespace ptngarch {

// Conventions. Observations are indexed t = 0..T-1. The filtered intensity
// starts at λ̃_i0 (zero unless overridden) and the likelihood sums over
// t = 1..T-1, so every "NT" normalisation uses effective_nt = N·(T−1).
// The intensity recursion
//
//   λ̃_it = ω + α⁽¹⁾1{y_{i,t−1}≥r}y_{i,t−1} + α⁽²⁾1{y_{i,t−1}<r}y_{i,t−1}
//          + ξ Σ_j w_ij y_{j,t−1} + β λ̃_{i,t−1}
//
// is linear in θ given λ̃_{i,t−1}, so ∂λ̃_it/∂θ = h_{i,t−1} + β ∂λ̃_{i,t−1}/∂θ
// with h = (1, y·1{y≥r}, y·1{y<r}, Σ_j w_ij y_j, λ̃)_{i,t−1}, and only the
// β row/column of ∂²λ̃/∂θ∂θ′ is ever nonzero.

enum class Derivatives { none, gradient, hessian };

enum class InitialIntensity { zero, sample_mean };

/// Filtered intensities and (optionally) their θ-derivatives, node-major.
struct IntensitySurface {
  std::size_t n_nodes = 0;
  std::size_t t_len = 0;
  std::vector<double> lambdas;
  std::vector<double> grads;     // 5 per cell
  std::vector<double> hessians;  // 25 per cell

  double lambda(std::size_t i, std::size_t t) const { return lambdas[i * t_len + t]; }

  Vec5 grad(std::size_t i, std::size_t t) const {
    Vec5 g{};
    const double* src = grads.data() + (i * t_len + t) * 5;
    for (std::size_t k = 0; k < 5; ++k) g[k] = src[k];
    return g;
  }

  Mat5 hessian(std::size_t i, std::size_t t) const {
    Mat5 h{};
    const double* src = hessians.data() + (i * t_len + t) * 25;
    for (std::size_t m = 0; m < 5; ++m) {
      for (std::size_t n = 0; n < 5; ++n) h[m][n] = src[5 * m + n];
    }
    return h;
  }
};

/// Value and derivatives of the mean log-likelihood
/// L̃ = (1/effective_nt) Σ_{i, t≥1} [y_it log λ̃_it − λ̃_it], plus the
/// information estimate Σ̂ = (1/effective_nt) Σ λ̃⁻¹ (∂λ̃/∂θ)(∂λ̃/∂θ)′.
struct Evaluation {
  double loglik = 0.0;
  double loglik_sum = 0.0;
  Vec5 score{};
  Mat5 hessian{};
  Mat5 fisher{};
  std::size_t effective_nt = 0;
};

namespace detail {

/// Neumaier-compensated running sum.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

/// A panel bound to its network, with the parameter-free pieces of the
/// recursion (counts and neighbour averages, time-major) precomputed once.
class LikelihoodProblem {
 public:
  LikelihoodProblem(const Panel& panel, const Network& net,
                    InitialIntensity init = InitialIntensity::zero)
      : n_(panel.n_nodes()), t_(panel.t_len()) {
    if (net.size() != n_) {
      throw ValidationError("panel has " + std::to_string(n_) + " nodes but network has " +
                            std::to_string(net.size()));
    }
    if (t_ < 2) throw ValidationError("panel needs at least 2 time points");
    y_.resize(n_ * t_);
    x_.resize(n_ * t_);
    std::vector<double> column(n_);
    for (std::size_t t = 0; t < t_; ++t) {
      for (std::size_t i = 0; i < n_; ++i) column[i] = static_cast<double>(panel(i, t));
      for (std::size_t i = 0; i < n_; ++i) {
        y_[t * n_ + i] = column[i];
        x_[t * n_ + i] = net.neighbour_mean(i, column);
      }
    }
    lambda0_.assign(n_, 0.0);
    if (init == InitialIntensity::sample_mean) {
      for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t t = 0; t < t_; ++t) s += y_[t * n_ + i];
        lambda0_[i] = s / static_cast<double>(t_);
      }
    }
  }

  std::size_t n_nodes() const noexcept { return n_; }
  std::size_t t_len() const noexcept { return t_; }
  std::size_t effective_nt() const noexcept { return n_ * (t_ - 1); }

  void set_initial_intensity(std::vector<double> lambda0) {
    if (lambda0.size() != n_) throw ValidationError("initial intensity needs one value per node");
    for (double v : lambda0) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ValidationError("initial intensities must be finite and nonnegative");
      }
    }
    lambda0_ = std::move(lambda0);
  }
  const std::vector<double>& initial_intensity() const noexcept { return lambda0_; }

  double count(std::size_t i, std::size_t t) const { return y_[t * n_ + i]; }
  double neighbour_average(std::size_t i, std::size_t t) const { return x_[t * n_ + i]; }

  /// True when some lagged regressor feeding coefficient k is nonzero. A
  /// coefficient whose regressor vanishes on the whole sample has no effect
  /// on the likelihood.
  bool regressor_active(Coef k, long r) const {
    if (k == kOmega || k == kBeta) return true;
    // lagged regressors are the cells at t = 0..T-2
    for (std::size_t c = 0; c < n_ * (t_ - 1); ++c) {
      const double y = y_[c];
      if (k == kAlphaHigh && y > 0.0 && y >= static_cast<double>(r)) return true;
      if (k == kAlphaLow && y > 0.0 && y < static_cast<double>(r)) return true;
      if (k == kXi && x_[c] > 0.0) return true;
    }
    return false;
  }

  IntensitySurface filter(const ThresholdParams& p, Derivatives order = Derivatives::none) const {
    IntensitySurface s;
    s.n_nodes = n_;
    s.t_len = t_;
    s.lambdas.assign(n_ * t_, 0.0);
    if (order != Derivatives::none) s.grads.assign(n_ * t_ * 5, 0.0);
    if (order == Derivatives::hessian) s.hessians.assign(n_ * t_ * 25, 0.0);
    run(p, order, [&](std::size_t i, std::size_t t, double lam, const double* g, const double* h) {
      s.lambdas[i * t_ + t] = lam;
      if (g) std::copy(g, g + 5, s.grads.begin() + static_cast<std::ptrdiff_t>((i * t_ + t) * 5));
      if (h) {
        std::copy(h, h + 25, s.hessians.begin() + static_cast<std::ptrdiff_t>((i * t_ + t) * 25));
      }
    });
    return s;
  }

  Evaluation evaluate(const ThresholdParams& p, Derivatives order = Derivatives::none) const {
    detail::KahanSum value;
    std::array<detail::KahanSum, 5> score;
    std::array<detail::KahanSum, 15> hess, fisher;
    run(p, order, [&](std::size_t i, std::size_t t, double lam, const double* g, const double* h) {
      if (t == 0) return;
      if (!(lam > 0.0) || !std::isfinite(lam)) {
        std::ostringstream msg;
        msg << "non-positive or non-finite intensity " << lam << " at node " << i << ", time " << t;
        throw NumericalError(msg.str());
      }
      const double y = y_[t * n_ + i];
      value.add((y > 0.0 ? y * std::log(lam) : 0.0) - lam);
      if (!g) return;
      const double resid = y / lam - 1.0;
      for (std::size_t k = 0; k < 5; ++k) score[k].add(resid * g[k]);
      if (!h) return;
      const double curv = y / (lam * lam);
      const double inv = 1.0 / lam;
      std::size_t idx = 0;
      for (std::size_t m = 0; m < 5; ++m) {
        for (std::size_t n = m; n < 5; ++n, ++idx) {
          hess[idx].add(resid * h[5 * m + n] - curv * g[m] * g[n]);
          fisher[idx].add(inv * g[m] * g[n]);
        }
      }
    });

    Evaluation e;
    e.effective_nt = effective_nt();
    const double scale = 1.0 / static_cast<double>(e.effective_nt);
    e.loglik_sum = value.value();
    e.loglik = e.loglik_sum * scale;
    for (std::size_t k = 0; k < 5; ++k) e.score[k] = score[k].value() * scale;
    std::size_t idx = 0;
    for (std::size_t m = 0; m < 5; ++m) {
      for (std::size_t n = m; n < 5; ++n, ++idx) {
        e.hessian[m][n] = e.hessian[n][m] = hess[idx].value() * scale;
        e.fisher[m][n] = e.fisher[n][m] = fisher[idx].value() * scale;
      }
    }
    return e;
  }

  /// Σ̂ alone. Needs only first derivatives.
  Mat5 fisher_info(const ThresholdParams& p) const {
    std::array<detail::KahanSum, 15> acc;
    run(p, Derivatives::gradient,
        [&](std::size_t, std::size_t t, double lam, const double* g, const double*) {
          if (t == 0) return;
          const double inv = 1.0 / lam;
          std::size_t idx = 0;
          for (std::size_t m = 0; m < 5; ++m) {
            for (std::size_t n = m; n < 5; ++n, ++idx) acc[idx].add(inv * g[m] * g[n]);
          }
        });
    Mat5 out{};
    const double scale = 1.0 / static_cast<double>(effective_nt());
    std::size_t idx = 0;
    for (std::size_t m = 0; m < 5; ++m) {
      for (std::size_t n = m; n < 5; ++n, ++idx) out[m][n] = out[n][m] = acc[idx].value() * scale;
    }
    return out;
  }

 private:
  // Drives the recursion, time outermost and nodes innermost, and hands each
  // cell (i, t) to visit(i, t, λ̃, ∂λ̃ or null, ∂²λ̃ or null).
  template <class Visit>
  void run(const ThresholdParams& p, Derivatives order, Visit&& visit) const {
    p.validate_recursive();
    const bool want_g = order != Derivatives::none;
    const bool want_h = order == Derivatives::hessian;
    std::vector<double> lam(lambda0_);
    std::vector<double> g(want_g ? n_ * 5 : 0, 0.0);
    std::vector<double> h(want_h ? n_ * 25 : 0, 0.0);
    const double r = static_cast<double>(p.r);

    for (std::size_t i = 0; i < n_; ++i) {
      visit(i, 0, lam[i], want_g ? &g[5 * i] : nullptr, want_h ? &h[25 * i] : nullptr);
    }
    for (std::size_t t = 1; t < t_; ++t) {
      const double* yprev = &y_[(t - 1) * n_];
      const double* xprev = &x_[(t - 1) * n_];
      for (std::size_t i = 0; i < n_; ++i) {
        const double y = yprev[i];
        const bool high = y >= r;
        const double lam_prev = lam[i];
        lam[i] = p.omega + (high ? p.alpha1 : p.alpha2) * y + p.xi * xprev[i] + p.beta * lam_prev;
        double* gi = want_g ? &g[5 * i] : nullptr;
        double* hi = want_h ? &h[25 * i] : nullptr;
        if (hi) {
          // uses the previous-step gradient, so update before gi
          for (std::size_t k = 0; k < 25; ++k) hi[k] *= p.beta;
          for (std::size_t k = 0; k < 5; ++k) {
            hi[5 * kBeta + k] += gi[k];
            hi[5 * k + kBeta] += gi[k];
          }
        }
        if (gi) {
          gi[kOmega] = 1.0 + p.beta * gi[kOmega];
          gi[kAlphaHigh] = (high ? y : 0.0) + p.beta * gi[kAlphaHigh];
          gi[kAlphaLow] = (high ? 0.0 : y) + p.beta * gi[kAlphaLow];
          gi[kXi] = xprev[i] + p.beta * gi[kXi];
          gi[kBeta] = lam_prev + p.beta * gi[kBeta];
        }
        visit(i, t, lam[i], gi, hi);
      }
    }
  }

  std::size_t n_;
  std::size_t t_;
  std::vector<double> y_;  // time-major
  std::vector<double> x_;  // time-major Σ_j w_ij y_jt
  std::vector<double> lambda0_;
};

// ---------------------------------------------------------------------------
// Free-function forms.

inline IntensitySurface filter_intensities(const ThresholdParams& p, const Panel& panel,
                                           const Network& net,
                                           const std::vector<double>& lambda0 = {},
                                           Derivatives order = Derivatives::none) {
  LikelihoodProblem prob(panel, net);
  if (!lambda0.empty()) prob.set_initial_intensity(lambda0);
  return prob.filter(p, order);
}

/// Truncated moving-average form of the intensity,
///   Σ_{k=1}^{min(K,t)} β^{k−1} [ω + α_{i,t−k} y_{i,t−k} + ξ Σ_j w_ij y_{j,t−k}],
/// evaluated directly from the data. Independent of the recursion; equals the
/// filter started at λ̃_0 = 0 when K ≥ t.
inline double lambda_closed_form(const ThresholdParams& p, const Panel& panel, const Network& net,
                                 std::size_t i, std::size_t t, std::size_t truncation) {
  p.validate_recursive();
  if (truncation < 1) throw ValidationError("truncation K must be at least 1");
  if (net.size() != panel.n_nodes()) throw ValidationError("panel/network size mismatch");
  const std::size_t kmax = std::min(truncation, t);
  double total = 0.0;
  for (std::size_t k = 1; k <= kmax; ++k) {
    const std::size_t s = t - k;
    const Count own = panel(i, s);
    const double alpha = own >= p.r ? p.alpha1 : p.alpha2;
    double spill = 0.0;
    for (std::size_t j = 0; j < panel.n_nodes(); ++j) {
      spill += net.weight(i, j) * static_cast<double>(panel(j, s));
    }
    total += std::pow(p.beta, static_cast<double>(k - 1)) *
             (p.omega + alpha * static_cast<double>(own) + p.xi * spill);
  }
  return total;
}

inline double log_likelihood(const ThresholdParams& p, const Panel& panel, const Network& net,
                             const std::vector<double>& lambda0 = {}) {
  LikelihoodProblem prob(panel, net);
  if (!lambda0.empty()) prob.set_initial_intensity(lambda0);
  return prob.evaluate(p).loglik;
}

inline Vec5 score(const ThresholdParams& p, const Panel& panel, const Network& net) {
  return LikelihoodProblem(panel, net).evaluate(p, Derivatives::gradient).score;
}

inline Mat5 hessian(const ThresholdParams& p, const Panel& panel, const Network& net) {
  return LikelihoodProblem(panel, net).evaluate(p, Derivatives::hessian).hessian;
}

inline Mat5 fisher_info(const ThresholdParams& p, const Panel& panel, const Network& net) {
  return LikelihoodProblem(panel, net).fisher_info(p);
}

}  // namespace ptngarch
