#pragma once

#include <string>

#include "sldcn/error.hpp"

namespace sldcn {

enum class PotentialKind {
  /// F = (phi^2 - 1)^2 / 4
  quartic,
  /// quartic on [-2, 2], quadratic growth outside; f is 11-Lipschitz
  truncated,
};

inline std::string to_string(PotentialKind kind) {
  return kind == PotentialKind::quartic ? "quartic" : "truncated";
}

/// Lipschitz bound of f for the truncated double well: max |3 phi^2 - 1| on
/// [-2, 2], which equals the outer slope.
inline constexpr double kTruncatedLipschitz = 11.0;

struct PotentialSpec {
  PotentialKind kind = PotentialKind::quartic;

  bool operator==(const PotentialSpec&) const = default;
};

/// Global Lipschitz constant of f. Undefined for the quartic well.
inline double lipschitz(const PotentialSpec& spec) {
  if (spec.kind != PotentialKind::truncated) {
    throw UnsupportedError("lipschitz: the quartic potential has no global bound");
  }
  return kTruncatedLipschitz;
}

inline double potential_F(double phi, const PotentialSpec& spec) {
  if (spec.kind == PotentialKind::truncated) {
    if (phi > 2.0) {
      const double s = phi - 2.0;
      return 5.5 * s * s + 6.0 * s + 2.25;
    }
    if (phi < -2.0) {
      const double s = phi + 2.0;
      return 5.5 * s * s - 6.0 * s + 2.25;
    }
  }
  const double q = phi * phi - 1.0;
  return 0.25 * q * q;
}

inline double potential_f(double phi, const PotentialSpec& spec) {
  if (spec.kind == PotentialKind::truncated) {
    if (phi > 2.0) return 11.0 * (phi - 2.0) + 6.0;
    if (phi < -2.0) return 11.0 * (phi + 2.0) - 6.0;
  }
  return phi * phi * phi - phi;
}

inline double potential_f_prime(double phi, const PotentialSpec& spec) {
  if (spec.kind == PotentialKind::truncated && (phi > 2.0 || phi < -2.0)) {
    return 11.0;
  }
  return 3.0 * phi * phi - 1.0;
}

}  // namespace sldcn
