#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sldcn/error.hpp"
#include "sldcn/legendre.hpp"

namespace sldcn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class BasisKind {
  /// phi_k = L_k; spans the full polynomial space of degree M-1.
  legendre,
  /// phi_0 = L_0, phi_1 = L_1, phi_k = L_k - L_{k+2} for k >= 2.
  dirichlet_combination,
};

inline std::string to_string(BasisKind kind) {
  return kind == BasisKind::legendre ? "legendre" : "dirichlet_combination";
}

/// One-dimensional Galerkin basis on [-1, 1] built from Legendre polynomials.
class Basis1D {
 public:
  explicit Basis1D(int size, BasisKind kind = BasisKind::legendre)
      : size_(size), kind_(kind) {
    if (size < 1) throw DimensionError("Basis1D: size must be >= 1");
  }

  int size() const noexcept { return size_; }
  BasisKind kind() const noexcept { return kind_; }

  /// Legendre expansion of basis function k as (index, coefficient) pairs.
  std::vector<std::pair<int, double>> legendre_terms(int k) const {
    if (kind_ == BasisKind::dirichlet_combination && k >= 2) {
      return {{k, 1.0}, {k + 2, -1.0}};
    }
    return {{k, 1.0}};
  }

  int degree(int k) const {
    return (kind_ == BasisKind::dirichlet_combination && k >= 2) ? k + 2 : k;
  }

  /// Highest Legendre index used by any basis function, plus one.
  int legendre_count() const {
    return kind_ == BasisKind::dirichlet_combination && size_ >= 3 ? size_ + 2
                                                                   : size_;
  }

  /// values[k] = phi_k(x), derivs[k] = phi_k'(x) for k = 0..size-1.
  void evaluate(double x, double* values, double* derivs) const {
    const int n = legendre_count();
    std::vector<double> lv(n), ld(n);
    legendre_table(n, x, lv.data(), ld.data());
    for (int k = 0; k < size_; ++k) {
      double v = 0.0, d = 0.0;
      for (const auto& [idx, c] : legendre_terms(k)) {
        v += c * lv[idx];
        d += c * ld[idx];
      }
      values[k] = v;
      derivs[k] = d;
    }
  }

 private:
  int size_;
  BasisKind kind_;
};

/// Coefficients of a function in the tensor basis phi_k(x) phi_j(y).
struct SpectralField {
  Matrix coeffs;

  SpectralField() = default;
  explicit SpectralField(Matrix c) : coeffs(std::move(c)) {}

  static SpectralField zeros(int m) { return SpectralField(Matrix::Zero(m, m)); }
  /// phi_0 = 1 for every basis kind, so a constant lives in entry (0, 0).
  static SpectralField constant(int m, double value) {
    SpectralField f = zeros(m);
    f.coeffs(0, 0) = value;
    return f;
  }

  int size() const noexcept { return static_cast<int>(coeffs.rows()); }
  bool all_finite() const { return coeffs.allFinite(); }
};

/// Point values on the tensor Gauss grid; entry (i, m) sits at (x_i, y_m).
struct GridField {
  Matrix values;

  GridField() = default;
  explicit GridField(Matrix v) : values(std::move(v)) {}

  int size() const noexcept { return static_cast<int>(values.rows()); }
  bool all_finite() const { return values.allFinite(); }
};

/// Maps between coefficient space and the dealiased 2M x 2M Gauss grid.
///
/// Both directions are dense products with the 2M x M evaluation matrix
/// V(i, k) = phi_k(x_i), applied once per dimension.
class Transform {
 public:
  explicit Transform(Basis1D basis)
      : basis_(basis), rule_(gauss_legendre(2 * basis.size())) {
    const int m = basis_.size();
    const int n = static_cast<int>(rule_.size());
    eval_.resize(n, m);
    weights_.resize(n);
    std::vector<double> v(m), d(m);
    for (int i = 0; i < n; ++i) {
      basis_.evaluate(rule_.nodes[i], v.data(), d.data());
      for (int k = 0; k < m; ++k) eval_(i, k) = v[k];
      weights_(i) = rule_.weights[i];
    }
    weighted_eval_ = weights_.asDiagonal() * eval_;
  }

  const Basis1D& basis() const noexcept { return basis_; }
  const QuadratureRule& rule() const noexcept { return rule_; }
  int size() const noexcept { return basis_.size(); }
  int grid_size() const noexcept { return static_cast<int>(rule_.size()); }
  const Matrix& eval_matrix() const noexcept { return eval_; }
  const Matrix& weighted_eval_matrix() const noexcept { return weighted_eval_; }
  const Vector& weights() const noexcept { return weights_; }

  GridField synthesize(const SpectralField& field) const {
    if (field.coeffs.rows() != size() || field.coeffs.cols() != size()) {
      throw DimensionError("synthesize: coefficient tensor is " +
                           std::to_string(field.coeffs.rows()) + "x" +
                           std::to_string(field.coeffs.cols()) +
                           ", basis size is " + std::to_string(size()));
    }
    return GridField(eval_ * field.coeffs * eval_.transpose());
  }

  /// Entry (k, j) is the 2M-point quadrature of g * phi_k(x) * phi_j(y).
  Matrix galerkin_inner(const GridField& g) const {
    check_grid(g);
    return weighted_eval_.transpose() * g.values * weighted_eval_;
  }

  /// Quadrature of g over the square.
  double integrate(const GridField& g) const {
    check_grid(g);
    return weights_.dot(g.values * weights_);
  }

 private:
  void check_grid(const GridField& g) const {
    if (g.values.rows() != grid_size() || g.values.cols() != grid_size()) {
      throw DimensionError("grid field is " + std::to_string(g.values.rows()) +
                           "x" + std::to_string(g.values.cols()) +
                           ", expected " + std::to_string(grid_size()));
    }
  }

  Basis1D basis_;
  QuadratureRule rule_;
  Matrix eval_;
  Matrix weighted_eval_;
  Vector weights_;
};

inline GridField synthesize(const Transform& t, const SpectralField& f) {
  return t.synthesize(f);
}

inline Matrix galerkin_inner(const Transform& t, const GridField& g) {
  return t.galerkin_inner(g);
}

}  // namespace sldcn
