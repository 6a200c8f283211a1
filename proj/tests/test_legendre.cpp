#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sldcn/legendre.hpp"

using namespace sldcn;

TEST(Legendre, PointValues) {
  EXPECT_EQ(legendre_eval(0, 0.7), 1.0);
  EXPECT_NEAR(legendre_eval(2, 0.5), -0.125, 1e-15);
  EXPECT_NEAR(legendre_eval(3, 1.0), 1.0, 1e-15);
  for (int k = 0; k < 40; ++k) {
    EXPECT_NEAR(legendre_eval(k, 1.0), 1.0, 1e-13);
    EXPECT_NEAR(legendre_eval(k, -1.0), k % 2 ? -1.0 : 1.0, 1e-13);
  }
}

TEST(Legendre, MatchesCosineSeries) {
  for (int k = 0; k < 20; ++k) {
    for (double x : {-0.93, -0.4, 0.0, 0.11, 0.62, 1.0}) {
      const auto v = legendre_eval_with_derivative(k, x);
      EXPECT_NEAR(v.value, oracle::legendre(k, x), 1e-12) << k << " " << x;
      EXPECT_NEAR(v.derivative, oracle::legendre_derivative(k, x), 1e-10 * (1 + k * k))
          << k << " " << x;
    }
  }
}

TEST(Legendre, EndpointDerivative) {
  // L_k'(1) = k(k+1)/2
  for (int k = 0; k < 30; ++k) {
    EXPECT_NEAR(legendre_derivative(k, 1.0), k * (k + 1) / 2.0, 1e-10);
  }
}

TEST(Legendre, RecurrenceHoldsAtRandomPoints) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(gen);
    for (int k = 1; k < 30; ++k) {
      const double lhs = (k + 1) * legendre_eval(k + 1, x);
      const double rhs = (2 * k + 1) * x * legendre_eval(k, x) - k * legendre_eval(k - 1, x);
      EXPECT_NEAR(lhs, rhs, 1e-13 * (k + 1));
    }
  }
}

TEST(Legendre, TableMatchesSingleEvaluation) {
  std::vector<double> v(25), d(25);
  legendre_table(25, 0.37, v.data(), d.data());
  for (int k = 0; k < 25; ++k) {
    const auto e = legendre_eval_with_derivative(k, 0.37);
    EXPECT_DOUBLE_EQ(v[k], e.value);
    EXPECT_DOUBLE_EQ(d[k], e.derivative);
  }
}

TEST(GaussLegendre, SmallRules) {
  const auto r1 = gauss_legendre(1);
  ASSERT_EQ(r1.size(), 1u);
  EXPECT_EQ(r1.nodes[0], 0.0);
  EXPECT_NEAR(r1.weights[0], 2.0, 1e-15);

  const auto r2 = gauss_legendre(2);
  EXPECT_NEAR(r2.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r2.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r2.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(r2.weights[1], 1.0, 1e-15);

  const auto r3 = gauss_legendre(3);
  EXPECT_NEAR(r3.nodes[0], -std::sqrt(0.6), 1e-15);
  EXPECT_EQ(r3.nodes[1], 0.0);
  EXPECT_NEAR(r3.nodes[2], std::sqrt(0.6), 1e-15);
  EXPECT_NEAR(r3.weights[0], 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(r3.weights[1], 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(r3.weights[2], 5.0 / 9.0, 1e-15);
}

TEST(GaussLegendre, NodesAreRootsAndSorted) {
  for (int n : {4, 7, 16, 63, 128, 254}) {
    const auto r = gauss_legendre(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(legendre_eval(n, r.nodes[i]), 0.0, 1e-12) << n;
      if (i > 0) {
        EXPECT_LT(r.nodes[i - 1], r.nodes[i]);
      }
      EXPECT_GT(r.weights[i], 0.0);
      wsum += r.weights[i];
    }
    EXPECT_NEAR(wsum, 2.0, 1e-13);
  }
}

TEST(GaussLegendre, LargeRuleConverges) { EXPECT_NO_THROW(gauss_legendre(1024)); }

TEST(GaussLegendre, RejectsEmptyRule) { EXPECT_THROW(gauss_legendre(0), Error); }

TEST(GaussLegendre, ExactForDegreeUpTo2nMinus1) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {1, 2, 5, 12, 30}) {
    const auto r = gauss_legendre(n);
    for (int trial = 0; trial < 10; ++trial) {
      const int degree = 2 * n - 1;
      std::vector<double> c(degree + 1);
      for (auto& v : c) v = u(gen);
      double exact = 0.0;
      for (int p = 0; p <= degree; p += 2) exact += c[p] * 2.0 / (p + 1);
      double quad = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        double val = 0.0;
        for (int p = degree; p >= 0; --p) val = val * r.nodes[i] + c[p];
        quad += r.weights[i] * val;
      }
      EXPECT_LE(std::abs(quad - exact), 1e-12 * (1 + std::abs(exact))) << n;
    }
  }
}
