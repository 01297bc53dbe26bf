#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ptngarch/error.hpp"
#include "ptngarch/estimate.hpp"
#include "ptngarch/linalg.hpp"
#include "ptngarch/special.hpp"

namespace ptngarch {

/// Linear restriction H0: Γθ = η with Γ of size s × 5, full row rank.
struct WaldSpec {
  Matrix gamma;
  std::vector<double> eta;
  std::string label;

  std::size_t restrictions() const { return gamma.rows(); }

  void validate() const {
    const std::size_t s = gamma.rows();
    if (s < 1 || s > 5) throw ValidationError("restriction matrix must have 1 to 5 rows");
    if (gamma.cols() != 5) throw ValidationError("restriction matrix must have 5 columns");
    if (eta.size() != s) throw ValidationError("eta must have one entry per restriction");
    const auto gram = Cholesky::factor(gamma * gamma.transposed(), 1e-10);
    if (!gram.ok) {
      throw ValidationError("restriction matrix is rank deficient (row " +
                            std::to_string(gram.weakest) + " is dependent on earlier rows)");
    }
  }
};

struct WaldResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::string label;
  std::vector<std::string> warnings;
};

/// W = (Γθ̂ − η)′ [Γ Σ̂⁻¹ Γ′ / effective_nt]⁻¹ (Γθ̂ − η), referred to χ²_s.
inline WaldResult wald_test(const FitResult& fit, const WaldSpec& spec) {
  spec.validate();
  const std::size_t s = spec.restrictions();

  const auto sigma = Cholesky::factor(Matrix::from(fit.sigma_hat), 1e-12);
  if (!sigma.ok) {
    throw NumericalError("information matrix is singular: smallest pivot at coefficient '" +
                         std::string(kCoefNames[sigma.weakest]) + "'");
  }
  Matrix middle = spec.gamma * sigma.inverse() * spec.gamma.transposed();
  middle *= 1.0 / static_cast<double>(fit.effective_nt);
  const auto inner = Cholesky::factor(middle, 1e-14);
  if (!inner.ok) throw NumericalError("Wald covariance matrix Γ Σ̂⁻¹ Γ′ is singular");

  std::vector<double> diff = spec.gamma * std::vector<double>(fit.theta_hat.begin(), fit.theta_hat.end());
  for (std::size_t k = 0; k < s; ++k) diff[k] -= spec.eta[k];
  const auto z = inner.solve(diff);
  double w = 0.0;
  for (std::size_t k = 0; k < s; ++k) w += diff[k] * z[k];

  WaldResult res;
  res.statistic = std::max(w, 0.0);
  res.df = static_cast<int>(s);
  res.p_value = chi2_sf(res.statistic, res.df);
  res.label = spec.label;
  for (std::size_t k = 0; k < 5; ++k) {
    bool involved = false;
    for (std::size_t row = 0; row < s; ++row) involved = involved || spec.gamma(row, k) != 0.0;
    if (involved && fit.boundary_flags[k]) {
      res.warnings.push_back(std::string(kCoefNames[k]) +
                             " sits on the parameter boundary; the chi-square reference "
                             "distribution assumes an interior point");
    }
  }
  return res;
}

inline WaldSpec single_restriction(std::array<double, 5> row, double eta, std::string label) {
  WaldSpec spec;
  spec.gamma = Matrix(1, 5);
  for (std::size_t k = 0; k < 5; ++k) spec.gamma(0, k) = row[k];
  spec.eta = {eta};
  spec.label = std::move(label);
  return spec;
}

inline WaldSpec threshold_spec() {
  return single_restriction({0, 1, -1, 0, 0}, 0.0, "threshold: H0 alpha1 = alpha2");
}
inline WaldSpec garch_spec() {
  return single_restriction({0, 0, 0, 0, 1}, 0.0,
                            "garch: H0 beta = 0 vs H1 beta > 0 (one-sided alternative, "
                            "two-sided chi-square p-value)");
}
inline WaldSpec network_spec() {
  return single_restriction({0, 0, 0, 1, 0}, 0.0,
                            "network: H0 xi = 0 vs H1 xi > 0 (one-sided alternative, "
                            "two-sided chi-square p-value)");
}

inline WaldResult threshold_test(const FitResult& fit) { return wald_test(fit, threshold_spec()); }
inline WaldResult garch_test(const FitResult& fit) { return wald_test(fit, garch_spec()); }
inline WaldResult network_test(const FitResult& fit) { return wald_test(fit, network_spec()); }

}  // namespace ptngarch
