#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

namespace ptngarch {

struct BoxOptions {
  double tol_grad = 1e-8;  // sup-norm of the projected gradient
  int max_iter = 500;
};

template <std::size_t D>
struct BoxResult {
  std::array<double, D> x{};
  std::array<double, D> grad{};
  double value = 0.0;
  double projected_grad = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

namespace detail {

template <std::size_t D>
double projected_gradient_norm(const std::array<double, D>& x, const std::array<double, D>& g,
                               const std::array<double, D>& lo, const std::array<double, D>& hi) {
  double worst = 0.0;
  for (std::size_t k = 0; k < D; ++k) {
    const double moved = std::clamp(x[k] - g[k], lo[k], hi[k]);
    worst = std::max(worst, std::abs(x[k] - moved));
  }
  return worst;
}

}  // namespace detail

/// Minimizes f over the box [lo, hi] by projected BFGS with a backtracking
/// line search along the projection arc. The first step (and every restart)
/// is a projected-gradient step; coordinates held at a bound by the sign of
/// the gradient are excluded from the quasi-Newton direction.
///
/// f(x, grad) must return the objective and write its gradient. Accepted
/// steps never increase f.
template <std::size_t D, class Objective>
BoxResult<D> minimize_box(Objective&& f, std::array<double, D> x, const std::array<double, D>& lo,
                          const std::array<double, D>& hi, const BoxOptions& opts = {}) {
  using Vec = std::array<double, D>;
  using Mat = std::array<Vec, D>;
  constexpr double armijo = 1e-4;

  auto identity = [] {
    Mat m{};
    for (std::size_t k = 0; k < D; ++k) m[k][k] = 1.0;
    return m;
  };

  BoxResult<D> res;
  for (std::size_t k = 0; k < D; ++k) x[k] = std::clamp(x[k], lo[k], hi[k]);
  Vec g{};
  double fx = f(x, g);
  ++res.evaluations;
  Mat h = identity();
  bool fresh = true;  // h is the (unscaled) identity

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    const double pg = detail::projected_gradient_norm(x, g, lo, hi);
    if (pg < opts.tol_grad) {
      res.converged = true;
      break;
    }

    std::array<bool, D> free{};
    for (std::size_t k = 0; k < D; ++k) {
      const bool pinned = lo[k] == hi[k];
      const bool at_lo = x[k] <= lo[k] && g[k] > 0.0;
      const bool at_hi = x[k] >= hi[k] && g[k] < 0.0;
      free[k] = !(pinned || at_lo || at_hi);
    }

    auto direction = [&](const Mat& hm) {
      Vec d{};
      for (std::size_t a = 0; a < D; ++a) {
        if (!free[a]) continue;
        for (std::size_t b = 0; b < D; ++b) {
          if (free[b]) d[a] -= hm[a][b] * g[b];
        }
      }
      return d;
    };

    Vec d = direction(h);
    double slope = 0.0;
    for (std::size_t k = 0; k < D; ++k) slope += g[k] * d[k];
    if (!(slope < 0.0)) {
      h = identity();
      fresh = true;
      d = direction(h);
    }

    bool accepted = false;
    Vec x_new{}, g_new{};
    double f_new = fx;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
        double decrease = 0.0;
        bool moved = false;
        for (std::size_t k = 0; k < D; ++k) {
          x_new[k] = std::clamp(x[k] + step * d[k], lo[k], hi[k]);
          decrease += g[k] * (x_new[k] - x[k]);
          moved = moved || x_new[k] != x[k];
        }
        if (!moved) break;
        f_new = f(x_new, g_new);
        ++res.evaluations;
        if (!std::isfinite(f_new)) continue;
        if (f_new <= fx + armijo * decrease) {
          accepted = true;
          break;
        }
        // Near the optimum the sufficient-decrease test drowns in round-off;
        // take any non-increasing step that also shrinks the projected gradient.
        if (f_new <= fx && detail::projected_gradient_norm(x_new, g_new, lo, hi) < pg) {
          accepted = true;
          break;
        }
      }
      if (!accepted && !fresh) {
        h = identity();
        fresh = true;
        d = direction(h);
      } else {
        break;
      }
    }
    if (!accepted) {
      res.message = "line search failed";
      break;
    }

    Vec s{}, yv{};
    double sy = 0.0, yy = 0.0, ss = 0.0;
    for (std::size_t k = 0; k < D; ++k) {
      s[k] = x_new[k] - x[k];
      yv[k] = g_new[k] - g[k];
      sy += s[k] * yv[k];
      yy += yv[k] * yv[k];
      ss += s[k] * s[k];
    }
    x = x_new;
    g = g_new;
    fx = f_new;

    if (sy > 1e-12 * std::sqrt(ss * yy)) {
      if (fresh) {
        const double gamma = sy / yy;
        for (std::size_t k = 0; k < D; ++k) h[k][k] = gamma;
        fresh = false;
      }
      // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
      const double rho = 1.0 / sy;
      Vec hy{};
      for (std::size_t a = 0; a < D; ++a) {
        for (std::size_t b = 0; b < D; ++b) hy[a] += h[a][b] * yv[b];
      }
      double yhy = 0.0;
      for (std::size_t k = 0; k < D; ++k) yhy += yv[k] * hy[k];
      for (std::size_t a = 0; a < D; ++a) {
        for (std::size_t b = 0; b < D; ++b) {
          h[a][b] += -rho * (s[a] * hy[b] + hy[a] * s[b]) + (rho * rho * yhy + rho) * s[a] * s[b];
        }
      }
    }
  }

  res.x = x;
  res.grad = g;
  res.value = fx;
  res.projected_grad = detail::projected_gradient_norm(x, g, lo, hi);
  if (res.projected_grad < opts.tol_grad) res.converged = true;
  if (!res.converged && res.message.empty()) res.message = "iteration limit reached";
  return res;
}

}  // namespace ptngarch
