#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "sldcn/error.hpp"
#include "sldcn/legendre.hpp"
#include "sldcn/spectral.hpp"

namespace sldcn {

/// 1-D Galerkin mass (phi_j, phi_i) and stiffness (phi_j', phi_i') matrices.
struct OperatorPair1D {
  Matrix mass;
  Matrix stiffness;

  int size() const noexcept { return static_cast<int>(mass.rows()); }
};

/// Mass entries come from ||L_k||^2 = 2/(2k+1); stiffness by Gauss quadrature
/// exact for the product of derivatives.
inline OperatorPair1D build_operators(const Basis1D& basis) {
  const int m = basis.size();
  OperatorPair1D ops;
  ops.mass = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (const auto& [li, ci] : basis.legendre_terms(i)) {
        for (const auto& [lj, cj] : basis.legendre_terms(j)) {
          if (li == lj) s += ci * cj * 2.0 / (2 * li + 1);
        }
      }
      ops.mass(i, j) = s;
    }
  }

  // derivative degree <= legendre_count - 2, so the product needs
  // legendre_count - 1 nodes; one extra keeps small sizes safe
  const QuadratureRule rule = gauss_legendre(basis.legendre_count() + 1);
  Matrix deriv(rule.size(), m);
  std::vector<double> v(m), d(m);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    basis.evaluate(rule.nodes[q], v.data(), d.data());
    for (int k = 0; k < m; ++k) deriv(q, k) = d[k];
  }
  const Eigen::Map<const Vector> w(rule.weights.data(),
                                   static_cast<Eigen::Index>(rule.size()));
  ops.stiffness = deriv.transpose() * w.asDiagonal() * deriv;
  // symmetrize the roundoff away
  ops.stiffness = 0.5 * (ops.stiffness + ops.stiffness.transpose()).eval();
  return ops;
}

/// Joint eigenbasis of the pair: E^T S E = diag(eigvals), E^T M E = I.
struct EigenFactorization {
  Vector eigvals;  // ascending, eigvals(0) == 0 for the constant mode
  Matrix eigvecs;  // columns are M-orthonormal eigenvectors

  int size() const noexcept { return static_cast<int>(eigvals.size()); }

  /// lambda_i + lambda_j, the 2-D tensor eigenvalue of mode (i, j).
  Matrix pair_eigvals() const {
    const int m = size();
    Matrix lam(m, m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) lam(i, j) = eigvals(i) + eigvals(j);
    return lam;
  }
};

/// Solves S e = lambda M e for the whole pair.
///
/// When the constant function is decoupled (row 0 of the mass matrix is
/// diagonal and row 0 of the stiffness matrix is zero, true for both basis
/// kinds) the zero eigenpair is set exactly and only the remaining block is
/// handed to the dense generalized solver. This keeps the mean of the field
/// invariant to the last bit under the per-mode time step.
inline EigenFactorization simultaneous_diag(const OperatorPair1D& ops) {
  const int m = ops.size();
  if (ops.stiffness.rows() != m || ops.stiffness.cols() != m ||
      ops.mass.cols() != m) {
    throw DimensionError("simultaneous_diag: mass and stiffness sizes differ");
  }
  Eigen::LLT<Matrix> chol(ops.mass);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("simultaneous_diag: mass matrix is not positive definite");
  }

  bool decoupled = ops.stiffness(0, 0) == 0.0;
  for (int k = 1; k < m && decoupled; ++k) {
    decoupled = ops.mass(0, k) == 0.0 && ops.mass(k, 0) == 0.0 &&
                ops.stiffness(0, k) == 0.0 && ops.stiffness(k, 0) == 0.0;
  }

  EigenFactorization eig;
  eig.eigvals = Vector::Zero(m);
  eig.eigvecs = Matrix::Zero(m, m);
  if (decoupled) {
    eig.eigvecs(0, 0) = 1.0 / std::sqrt(ops.mass(0, 0));
    if (m > 1) {
      const Matrix s = ops.stiffness.bottomRightCorner(m - 1, m - 1);
      const Matrix b = ops.mass.bottomRightCorner(m - 1, m - 1);
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(s, b);
      if (ges.info() != Eigen::Success) {
        throw NumericalError("simultaneous_diag: generalized eigensolver failed");
      }
      eig.eigvals.tail(m - 1) = ges.eigenvalues();
      eig.eigvecs.bottomRightCorner(m - 1, m - 1) = ges.eigenvectors();
    }
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(ops.stiffness, ops.mass);
    if (ges.info() != Eigen::Success) {
      throw NumericalError("simultaneous_diag: generalized eigensolver failed");
    }
    eig.eigvals = ges.eigenvalues();
    eig.eigvecs = ges.eigenvectors();
  }
  return eig;
}

/// Per-mode denominators 1 + tau*gamma*lambda*(alpha*lambda + beta).
///
/// The SLD-CN step uses alpha = 3*eps/4 + A*tau, beta = B; the stabilized
/// first-order start uses alpha = eps, beta = S.
class StepFactor {
 public:
  StepFactor(const EigenFactorization& eig, double tau, double gamma,
             double alpha, double beta)
      : tau_(tau), gamma_(gamma), alpha_(alpha), beta_(beta) {
    const Matrix lam = eig.pair_eigvals();
    denominators_ =
        (1.0 + (tau * gamma) * lam.array() * (alpha * lam.array() + beta)).matrix();
    if (alpha >= 0.0 && beta >= 0.0 && tau >= 0.0 && gamma >= 0.0) {
      if ((denominators_.array() < 1.0).any()) {
        throw NumericalError("StepFactor: denominator below 1 with nonnegative constants");
      }
    }
  }

  static StepFactor sldcn(const EigenFactorization& eig, double tau,
                          double epsilon, double gamma, double a, double b) {
    return StepFactor(eig, tau, gamma, 0.75 * epsilon + a * tau, b);
  }

  static StepFactor first_order(const EigenFactorization& eig, double tau,
                                double epsilon, double gamma, double s) {
    return StepFactor(eig, tau, gamma, epsilon, s);
  }

  const Matrix& denominators() const noexcept { return denominators_; }
  double tau() const noexcept { return tau_; }
  double gamma() const noexcept { return gamma_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  int size() const noexcept { return static_cast<int>(denominators_.rows()); }

 private:
  double tau_, gamma_, alpha_, beta_;
  Matrix denominators_;
};

namespace detail {
inline void check_square(const Matrix& a, int m, const char* what) {
  if (a.rows() != m || a.cols() != m) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(m) +
                         "x" + std::to_string(m) + ", got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}
}  // namespace detail

/// Coefficients c -> modal coordinates a with c = E a E^T.
inline Matrix to_modal(const OperatorPair1D& ops, const EigenFactorization& eig,
                       const Matrix& c) {
  const Matrix left = eig.eigvecs.transpose() * ops.mass;  // E^{-1}
  return left * c * left.transpose();
}

inline Matrix from_modal(const EigenFactorization& eig, const Matrix& a) {
  return eig.eigvecs * a * eig.eigvecs.transpose();
}

/// Load vector (inner products against the basis) -> modal coordinates.
inline Matrix load_to_modal(const EigenFactorization& eig, const Matrix& load) {
  return eig.eigvecs.transpose() * load * eig.eigvecs;
}

/// Solves (M2 + tau*gamma*S2*M2^{-1}*(alpha*S2 + beta*M2)) phi = rhs, where
/// rhs is a Galerkin load vector and M2, S2 are the 2-D tensor operators.
inline SpectralField apply_step_inverse(const SpectralField& rhs,
                                        const StepFactor& factor,
                                        const EigenFactorization& eig) {
  detail::check_square(rhs.coeffs, eig.size(), "apply_step_inverse");
  detail::check_square(factor.denominators(), eig.size(), "apply_step_inverse factor");
  const Matrix modal = load_to_modal(eig, rhs.coeffs).cwiseQuotient(factor.denominators());
  return SpectralField(from_modal(eig, modal));
}

/// (u, v) = tr(U^T M V M).
inline double l2_inner(const OperatorPair1D& ops, const SpectralField& u,
                       const SpectralField& v) {
  return (ops.mass * u.coeffs * ops.mass).cwiseProduct(v.coeffs).sum();
}

inline double mean_value(const OperatorPair1D& ops, const SpectralField& v) {
  // (phi_k, 1) = 0 for k >= 1 in both basis kinds
  return v.coeffs(0, 0) * ops.mass(0, 0) * ops.mass(0, 0) / 4.0;
}

struct FieldNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

inline FieldNorms norms(const OperatorPair1D& ops, const SpectralField& v) {
  detail::check_square(v.coeffs, ops.size(), "norms");
  const Matrix& c = v.coeffs;
  const double l2sq = (ops.mass * c * ops.mass).cwiseProduct(c).sum();
  const double h1sq =
      (ops.stiffness * c * ops.mass + ops.mass * c * ops.stiffness).cwiseProduct(c).sum();
  return {std::sqrt(std::max(l2sq, 0.0)), std::sqrt(std::max(h1sq, 0.0))};
}

inline constexpr double kCompatibilityTol = 1e-10;

/// Zero-mean u with (grad u, grad w) = (rhs, w) for every w in V_M.
inline SpectralField poisson_neumann(const OperatorPair1D& ops,
                                     const EigenFactorization& eig,
                                     const SpectralField& rhs) {
  detail::check_square(rhs.coeffs, eig.size(), "poisson_neumann");
  const double mean = mean_value(ops, rhs);
  const double scale = norms(ops, rhs).l2;
  if (std::abs(mean) > kCompatibilityTol * scale) {
    throw CompatibilityError("poisson_neumann: right-hand side mean " +
                             std::to_string(mean) + " is not zero");
  }
  Matrix modal = to_modal(ops, eig, rhs.coeffs);
  const Matrix lam = eig.pair_eigvals();
  for (int j = 0; j < modal.cols(); ++j) {
    for (int i = 0; i < modal.rows(); ++i) {
      modal(i, j) = (i == 0 && j == 0) ? 0.0 : modal(i, j) / lam(i, j);
    }
  }
  return SpectralField(from_modal(eig, modal));
}

/// ||v||_{-1} = sqrt((v, -Laplace^{-1} v)) for zero-mean v.
inline double hminus1_norm(const OperatorPair1D& ops, const EigenFactorization& eig,
                           const SpectralField& v) {
  const SpectralField u = poisson_neumann(ops, eig, v);
  return std::sqrt(std::max(l2_inner(ops, v, u), 0.0));
}

}  // namespace sldcn
