#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "sldcn/error.hpp"

namespace sldcn {

/// Value and first derivative of a Legendre polynomial at one point.
struct LegendreValue {
  double value = 0.0;
  double derivative = 0.0;
};

/// Evaluates L_k(x) and L_k'(x) by the three-term recurrence.
///
/// The derivative uses L'_{k+1} = L'_{k-1} + (2k+1) L_k, which stays finite
/// at the endpoints x = +-1 where the closed form divides by x^2 - 1.
inline LegendreValue legendre_eval_with_derivative(int k, double x) {
  if (k == 0) return {1.0, 0.0};
  double p_prev = 1.0, p = x;
  double d_prev = 0.0, d = 1.0;
  for (int n = 1; n < k; ++n) {
    const double p_next = ((2 * n + 1) * x * p - n * p_prev) / (n + 1);
    const double d_next = d_prev + (2 * n + 1) * p;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d};
}

inline double legendre_eval(int k, double x) {
  return legendre_eval_with_derivative(k, x).value;
}

inline double legendre_derivative(int k, double x) {
  return legendre_eval_with_derivative(k, x).derivative;
}

/// Fills values[k] = L_k(x), derivs[k] = L_k'(x) for k = 0..n-1.
inline void legendre_table(int n, double x, double* values, double* derivs) {
  if (n <= 0) return;
  values[0] = 1.0;
  derivs[0] = 0.0;
  if (n == 1) return;
  values[1] = x;
  derivs[1] = 1.0;
  for (int k = 1; k + 1 < n; ++k) {
    values[k + 1] = ((2 * k + 1) * x * values[k] - k * values[k - 1]) / (k + 1);
    derivs[k + 1] = derivs[k - 1] + (2 * k + 1) * values[k];
  }
}

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // positive, sum to 2

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Computes the n-point Gauss-Legendre rule.
///
/// Roots of L_n are found by Newton iteration from Chebyshev-like initial
/// guesses, on the positive half only; the negative half is mirrored so the
/// rule is exactly symmetric.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw UnsupportedError("gauss_legendre: rule size must be >= 1");
  constexpr double kTol = 1e-14;
  constexpr int kMaxIter = 100;

  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // i-th largest root
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    bool converged = false;
    LegendreValue lv{};
    for (int iter = 0; iter < kMaxIter; ++iter) {
      lv = legendre_eval_with_derivative(n, x);
      const double dx = lv.value / lv.derivative;
      x -= dx;
      if (std::abs(dx) <= kTol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericalError("gauss_legendre: Newton iteration did not converge");
    }
    if (n % 2 == 1 && i == half - 1) x = 0.0;  // middle root is exactly zero
    lv = legendre_eval_with_derivative(n, x);
    const double w = 2.0 / ((1.0 - x * x) * lv.derivative * lv.derivative);
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
  }
  return rule;
}

}  // namespace sldcn
