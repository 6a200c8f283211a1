#pragma once

#include <cmath>
#include <limits>

#include "sldcn/discretization.hpp"
#include "sldcn/potential.hpp"

namespace sldcn {

inline constexpr double kDomainArea = 4.0;  // [-1, 1]^2

enum class StepStatus : int {
  rejected = 0,
  accepted = 1,
  /// accepted although e > tol because the step was already at tau_min
  accepted_at_tau_min = 2,
};

/// Per-step diagnostics of a trajectory.
struct EnergyRecord {
  long step = 0;
  double t = 0.0;
  double tau = 0.0;
  double E_eps = 0.0;
  double E_C = 0.0;
  double mass = 0.0;
  double dt_l2 = 0.0;  // ||phi^{n+1} - phi^n||
  double dt_h1 = 0.0;  // ||grad(phi^{n+1} - phi^n)||
  StepStatus status = StepStatus::accepted;
  double indicator = std::numeric_limits<double>::quiet_NaN();

  bool accepted() const noexcept { return status != StepStatus::rejected; }
};

/// Quadrature of F(phi) on the 2M grid.
inline double potential_integral(const Discretization& disc, const Matrix& grid,
                                 const PotentialSpec& potential) {
  const Matrix fv =
      grid.unaryExpr([&](double v) { return potential_F(v, potential); });
  return disc.integrate(GridField(fv));
}

/// E(phi) = eps/2 |phi|_1^2 + 1/eps * integral of F(phi).
inline double energy_eps(const Discretization& disc, const SpectralField& phi,
                         double epsilon, const PotentialSpec& potential) {
  const FieldNorms n = norms(disc.operators(), phi);
  const GridField g = disc.synthesize(phi);
  return 0.5 * epsilon * n.h1_semi * n.h1_semi +
         potential_integral(disc, g.values, potential) / epsilon;
}

/// E_C = E(phi_next) + (L/(4 eps) + B/2)||d||^2 + eps/8 ||grad d||^2,
/// d = phi_next - phi_curr.
inline double energy_discrete(const Discretization& disc, const SpectralField& next,
                              const SpectralField& curr, double epsilon, double b,
                              double lipschitz_bound, const PotentialSpec& potential) {
  detail::check_square(curr.coeffs, next.size(), "energy_discrete");
  const SpectralField diff(next.coeffs - curr.coeffs);
  const FieldNorms dn = norms(disc.operators(), diff);
  return energy_eps(disc, next, epsilon, potential) +
         (lipschitz_bound / (4.0 * epsilon) + 0.5 * b) * dn.l2 * dn.l2 +
         epsilon / 8.0 * dn.h1_semi * dn.h1_semi;
}

/// Spatial mean (phi, 1)/|Omega|.
inline double mass_mean(const Discretization& disc, const SpectralField& phi) {
  return mean_value(disc.operators(), phi);
}

namespace modal {

/// sum a^2 and sum lambda a^2: squared L2 norm and H1 seminorm in modal form.
inline double l2_squared(const Matrix& a) { return a.squaredNorm(); }

inline double h1_squared(const Discretization& disc, const Matrix& a) {
  return disc.pair_eigvals().cwiseProduct(a.cwiseProduct(a)).sum();
}

/// Mean of the field: c_00 = E_00^2 a_00 and (phi_0, 1)^2 / |Omega| = 1.
inline double mean(const Discretization& disc, const Matrix& a) {
  const double e00 = disc.eigen().eigvecs(0, 0);
  return e00 * e00 * a(0, 0) * disc.operators().mass(0, 0) *
         disc.operators().mass(0, 0) / kDomainArea;
}

inline double energy_eps(const Discretization& disc, const Matrix& a,
                         const Matrix& grid, double epsilon,
                         const PotentialSpec& potential) {
  return 0.5 * epsilon * h1_squared(disc, a) +
         potential_integral(disc, grid, potential) / epsilon;
}

}  // namespace modal

}  // namespace sldcn
