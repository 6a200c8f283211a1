#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "sldcn/operators.hpp"
#include "sldcn/spectral.hpp"

namespace sldcn {

/// Everything that depends only on the basis size: the grid transform, the
/// 1-D operator pair and its joint eigenbasis. Immutable once built.
///
/// Time stepping runs in modal coordinates a, where c = E a E^T. There the
/// mass operator is the identity and the stiffness operator is the diagonal
/// lambda_i + lambda_j, so grid values are P a P^T with P = V E.
class Discretization {
 public:
  explicit Discretization(int size, BasisKind kind = BasisKind::legendre)
      : transform_(Basis1D(size, kind)),
        ops_(build_operators(transform_.basis())),
        eig_(simultaneous_diag(ops_)) {
    modal_eval_ = transform_.eval_matrix() * eig_.eigvecs;
    weighted_modal_eval_ = transform_.weights().asDiagonal() * modal_eval_;
    pair_eigvals_ = eig_.pair_eigvals();
    modal_from_coeffs_ = eig_.eigvecs.transpose() * ops_.mass;
  }

  /// Shared, lazily built instance per (size, kind).
  static std::shared_ptr<const Discretization> get(int size,
                                                   BasisKind kind = BasisKind::legendre) {
    static std::mutex mutex;
    static std::map<std::pair<int, BasisKind>, std::shared_ptr<const Discretization>> cache;
    const std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{size, kind}];
    if (!slot) slot = std::make_shared<const Discretization>(size, kind);
    return slot;
  }

  int size() const noexcept { return transform_.size(); }
  int grid_size() const noexcept { return transform_.grid_size(); }
  const Transform& transform() const noexcept { return transform_; }
  const Basis1D& basis() const noexcept { return transform_.basis(); }
  const OperatorPair1D& operators() const noexcept { return ops_; }
  const EigenFactorization& eigen() const noexcept { return eig_; }
  const Matrix& pair_eigvals() const noexcept { return pair_eigvals_; }

  GridField synthesize(const SpectralField& f) const { return transform_.synthesize(f); }
  Matrix galerkin_inner(const GridField& g) const { return transform_.galerkin_inner(g); }

  Matrix to_modal(const SpectralField& f) const {
    detail::check_square(f.coeffs, size(), "to_modal");
    return modal_from_coeffs_ * f.coeffs * modal_from_coeffs_.transpose();
  }
  SpectralField from_modal(const Matrix& a) const {
    return SpectralField(sldcn::from_modal(eig_, a));
  }

  /// Grid values of the field with modal coordinates a.
  void modal_synthesize(const Matrix& a, Matrix& grid) const {
    grid.noalias() = modal_eval_ * a * modal_eval_.transpose();
  }
  /// Modal load of grid values g: E^T (g, phi_k phi_j) E.
  void modal_inner(const Matrix& g, Matrix& load) const {
    load.noalias() = weighted_modal_eval_.transpose() * g * weighted_modal_eval_;
  }

  /// L2 projection of grid samples onto V_M, in coefficient space.
  SpectralField project(const GridField& g) const {
    Matrix load;
    modal_inner(g.values, load);
    return from_modal(load);
  }

  double integrate(const GridField& g) const { return transform_.integrate(g); }

 private:
  Transform transform_;
  OperatorPair1D ops_;
  EigenFactorization eig_;
  Matrix modal_eval_;
  Matrix weighted_modal_eval_;
  Matrix pair_eigvals_;
  Matrix modal_from_coeffs_;
};

/// Truncates (or zero-pads) coefficients to another basis size. V_M is nested
/// in V_{M'} for M < M', so this is the natural restriction between levels.
inline SpectralField resize_coefficients(const SpectralField& f, int size) {
  SpectralField out = SpectralField::zeros(size);
  const int n = std::min(size, f.size());
  out.coeffs.topLeftCorner(n, n) = f.coeffs.topLeftCorner(n, n);
  return out;
}

}  // namespace sldcn
