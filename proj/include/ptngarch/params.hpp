#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "ptngarch/error.hpp"

namespace ptngarch {

/// The continuous coefficient vector θ = (ω, α⁽¹⁾, α⁽²⁾, ξ, β).
using Theta = std::array<double, 5>;

enum Coef : std::size_t { kOmega = 0, kAlphaHigh = 1, kAlphaLow = 2, kXi = 3, kBeta = 4 };

inline constexpr std::array<std::string_view, 5> kCoefNames = {"omega", "alpha1", "alpha2", "xi",
                                                               "beta"};

/// Model coefficients plus the integer threshold r. alpha1 applies when the
/// previous count is at or above r, alpha2 when it is below.
struct ThresholdParams {
  double omega = 1.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double xi = 0.0;
  double beta = 0.0;
  long r = 1;

  static ThresholdParams from_theta(const Theta& theta, long r) {
    return {theta[kOmega], theta[kAlphaHigh], theta[kAlphaLow], theta[kXi], theta[kBeta], r};
  }

  Theta theta() const { return {omega, alpha1, alpha2, xi, beta}; }

  /// Throws unless ω > 0, the other coefficients are ≥ 0 and finite, r ≥ 1.
  void validate() const {
    const Theta t = theta();
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!std::isfinite(t[k])) {
        throw ValidationError(std::string(kCoefNames[k]) + " must be finite");
      }
    }
    if (!(omega > 0.0)) throw ValidationError("omega must be positive");
    if (alpha1 < 0.0 || alpha2 < 0.0 || xi < 0.0 || beta < 0.0) {
      throw ValidationError("alpha1, alpha2, xi and beta must be nonnegative");
    }
    if (r < 1) throw ValidationError("threshold r must be a positive integer");
  }

  /// Additionally requires β < 1, which the intensity recursion needs.
  void validate_recursive() const {
    validate();
    if (!(beta < 1.0)) throw ValidationError("beta must be < 1");
  }

  friend bool operator==(const ThresholdParams&, const ThresholdParams&) = default;
};

}  // namespace ptngarch
