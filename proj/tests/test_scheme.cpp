#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "sldcn/harness.hpp"
#include "sldcn/scheme.hpp"

using namespace sldcn;

namespace {

const PotentialSpec kQuartic{PotentialKind::quartic};

Matrix random_coeffs(int m, std::mt19937_64& gen, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix c(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) c(i, j) = u(gen);
  return c;
}

SchemeParams params(double tau, double a, double b, PotentialKind kind = PotentialKind::quartic) {
  SchemeParams p;
  p.epsilon = 0.05;
  p.gamma = 0.0025;
  p.tau = tau;
  p.A = a;
  p.B = b;
  p.potential = {kind};
  return p;
}

}  // namespace

TEST(SchemeParams, Validation) {
  EXPECT_NO_THROW(params(0.01, 0, 0).validate());
  EXPECT_THROW(params(0.0, 0, 0).validate(), ConfigError);
  EXPECT_THROW(params(0.01, -1, 0).validate(), ConfigError);
  EXPECT_THROW(params(0.01, 0, -1).validate(), ConfigError);
  EXPECT_TRUE(params(0.01, 7.5625, 110).satisfies_energy_condition(11.0));
  EXPECT_FALSE(params(0.01, 7.5, 110).satisfies_energy_condition(11.0));
  EXPECT_FALSE(params(0.01, 8, 109).satisfies_energy_condition(11.0));
}

TEST(FirstStep, ConstantIsFixed) {
  const auto d = Discretization::get(8);
  for (double c : {-0.7, 0.0, 0.4, 1.0}) {
    const SpectralField phi0 = SpectralField::constant(8, c);
    const SpectralField phi1 = first_step(d, phi0, params(0.01, 1, 1));
    EXPECT_LE((phi1.coeffs - phi0.coeffs).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(FirstStep, MatchesDenseOracleAndConservesMean) {
  std::mt19937_64 gen(21);
  for (BasisKind kind : {BasisKind::legendre, BasisKind::dirichlet_combination}) {
    const auto d = Discretization::get(8, kind);
    const SchemeParams p = params(0.01, 0, 0);
    for (int trial = 0; trial < 5; ++trial) {
      const SpectralField phi0(random_coeffs(8, gen, 0.3));
      const SpectralField phi1 = first_step(d, phi0, p);
      const Matrix ref =
          oracle::first_step_block_solve(kind, phi0.coeffs, p.epsilon, p.gamma, p.tau, kQuartic);
      EXPECT_LE((phi1.coeffs - ref).norm(), 1e-10 * ref.norm());
      EXPECT_NEAR(mass_mean(*d, phi1), mass_mean(*d, phi0),
                  1e-12 * std::max(1.0, std::abs(mass_mean(*d, phi0))));
    }
  }
}

TEST(SldcnStep, ConstantStateAndChemicalPotential) {
  const auto d = Discretization::get(8);
  const SchemeParams p = params(0.01, 1, 2);
  const StepFactor f = ModalStepper(d, p).factor();
  for (double c : {-1.0, -0.2, 0.6}) {
    const SpectralField phi = SpectralField::constant(8, c);
    const StepResult r = sldcn_step(d, {phi, phi, 0.0, 1}, p, f);
    EXPECT_LE((r.next.coeffs - phi.coeffs).cwiseAbs().maxCoeff(), 1e-14);
    const SpectralField mu_expected = SpectralField::constant(8, potential_f(c, kQuartic) / p.epsilon);
    EXPECT_LE((r.mu.coeffs - mu_expected.coeffs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SldcnStep, MatchesDenseOracle) {
  std::mt19937_64 gen(22);
  for (BasisKind kind : {BasisKind::legendre, BasisKind::dirichlet_combination}) {
    for (int m : {4, 6, 8}) {
      const auto d = Discretization::get(m, kind);
      const SchemeParams p = params(0.02, 0.7, 3.0, PotentialKind::truncated);
      const StepFactor f = ModalStepper(d, p).factor();
      for (int trial = 0; trial < 20; ++trial) {
        StepState s;
        s.prev = SpectralField(random_coeffs(m, gen, 0.4));
        s.curr = SpectralField(random_coeffs(m, gen, 0.4));
        const StepResult r = sldcn_step(d, s, p, f);
        const oracle::BlockSolution ref = oracle::sldcn_block_solve(
            kind, s.prev.coeffs, s.curr.coeffs, p.epsilon, p.gamma, p.tau, p.A, p.B, p.potential);
        EXPECT_LE((r.next.coeffs - ref.phi).norm(), 1e-10 * ref.phi.norm());
        EXPECT_LE((r.mu.coeffs - ref.mu).norm(), 1e-10 * ref.mu.norm());
      }
    }
  }
}

TEST(SldcnStep, RejectsMismatchedFactorAndSizes) {
  const auto d = Discretization::get(6);
  const SchemeParams p = params(0.01, 1, 1);
  const StepFactor wrong = ModalStepper(d, params(0.02, 1, 1)).factor();
  const StepState s{SpectralField::zeros(6), SpectralField::zeros(6), 0.0, 1};
  EXPECT_THROW(sldcn_step(d, s, p, wrong), DimensionError);
  const StepFactor right = ModalStepper(d, p).factor();
  const StepState bad{SpectralField::zeros(5), SpectralField::zeros(6), 0.0, 1};
  EXPECT_THROW(sldcn_step(d, bad, p, right), DimensionError);
}

TEST(SldcnStep, SignalsBlowUp) {
  const auto d = Discretization::get(6);
  const SchemeParams p = params(0.01, 0, 0);
  const StepFactor f = ModalStepper(d, p).factor();
  const StepState s{SpectralField::constant(6, 5e3), SpectralField::constant(6, 5e3), 0.0, 7};
  try {
    sldcn_step(d, s, p, f);
    FAIL() << "expected a blow-up signal";
  } catch (const BlowUpError& e) {
    EXPECT_EQ(e.step(), 8);
  }
}

TEST(RunUniform, MassConservedOverThousandSteps) {
  const auto d = Discretization::get(24);
  const SpectralField phi0 = random_initial(3, *d).field;
  const RunResult r = run_uniform(d, phi0, params(0.001, 1, 0.25), 1.0);
  ASSERT_EQ(r.outcome, RunOutcome::completed);
  EXPECT_EQ(r.steps, 1000);
  const double m0 = mass_mean(*d, phi0);
  EXPECT_NEAR(mass_mean(*d, r.final_state), m0, 1e-12 * std::max(1.0, std::abs(m0)));
  for (const auto& rec : r.records) EXPECT_NEAR(rec.mass, m0, 1e-12);
}

TEST(RunUniform, ConstantTrajectory) {
  const auto d = Discretization::get(10);
  const SpectralField phi0 = SpectralField::constant(10, 0.3);
  const RunResult r = run_uniform(d, phi0, params(0.01, 1, 1), 0.5);
  ASSERT_EQ(r.outcome, RunOutcome::completed);
  ASSERT_EQ(r.records.size(), 51u);
  for (const auto& rec : r.records) {
    EXPECT_NEAR(rec.E_eps, r.records.front().E_eps, 1e-12);
    EXPECT_LE(rec.dt_l2, 1e-14);
  }
}

TEST(RunUniform, EnergyLawUnderCondition) {
  const auto d = Discretization::get(31);
  const SchemeParams p = params(0.01, 8, 110, PotentialKind::truncated);
  const RunResult r = run_uniform(d, random_initial(1, *d).field, p, 2.0);
  ASSERT_EQ(r.outcome, RunOutcome::completed);
  for (std::size_t n = 1; n < r.records.size(); ++n) {
    const double prev = r.records[n - 1].E_C;
    EXPECT_LE(r.records[n].E_C, prev + 1e-10 * (1 + std::abs(prev))) << n;
    EXPECT_GE(r.records[n].E_C, r.records[n].E_eps);
  }
}

TEST(RunUniform, DeterministicTraces) {
  const auto d = Discretization::get(20);
  const SchemeParams p = params(0.01, 1, 1);
  const RunResult a = run_uniform(d, random_initial(5, *d).field, p, 0.5);
  const RunResult b = run_uniform(d, random_initial(5, *d).field, p, 0.5);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].E_C, b.records[i].E_C);
    EXPECT_EQ(a.records[i].E_eps, b.records[i].E_eps);
  }
  EXPECT_EQ(a.final_state.coeffs, b.final_state.coeffs);
}

TEST(RunUniform, StepCountAndRecording) {
  EXPECT_EQ(uniform_step_count(0.3, 0.1), 3);
  EXPECT_EQ(uniform_step_count(40.96, 0.01), 4096);
  EXPECT_EQ(uniform_step_count(0.35, 0.1), 4);
  const auto d = Discretization::get(6);
  RunOptions opts;
  opts.record_every = 4;
  long snaps = 0;
  opts.snapshot_every = 5;
  opts.on_snapshot = [&](long, double, const SpectralField&) { ++snaps; };
  const RunResult r = run_uniform(d, SpectralField::constant(6, 0.1), params(0.1, 0, 0), 1.0, opts);
  // initial, steps 4 and 8, final step 10
  ASSERT_EQ(r.records.size(), 4u);
  EXPECT_EQ(r.records.back().step, 10);
  EXPECT_DOUBLE_EQ(r.t, 1.0);
  EXPECT_EQ(snaps, 3);  // steps 0, 5, 10
  EXPECT_THROW(run_uniform(d, SpectralField::zeros(6), params(0.1, 0, 0), 0.1), ConfigError);
}

TEST(RunUniform, DetectsBlowUp) {
  const auto d = Discretization::get(16);
  SchemeParams p = params(1.0, 0, 0);
  p.gamma = 1.0;
  const RunResult r = run_uniform(d, random_initial(1, *d).field, p, 200.0);
  EXPECT_EQ(r.outcome, RunOutcome::blow_up);
  EXPECT_GT(r.blowup_step, 0);
  EXPECT_LT(r.steps, r.blowup_step);
  for (const auto& rec : r.records) EXPECT_TRUE(std::isfinite(rec.E_C));
}

TEST(SldcnStep, LocalTruncationErrorIsThirdOrder) {
  // A fine-step reference supplies "exact" states at t0, t0 + tau, t0 + 2 tau.
  // M stays small so tau * gamma * eps * lam^2 is modest for every mode.
  const int m = 4;
  const auto d = Discretization::get(m);
  SchemeParams p = params(1e-5, 0.5, 1.0);
  p.epsilon = 0.2;
  p.gamma = 0.02;
  const int n = d->grid_size();
  const auto& x = d->transform().rule().nodes;
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g(i, j) = 0.4 * std::cos(std::acos(-1.0) * x[i]) + 0.3 * x[j] * x[j] - 0.1;
  const SpectralField phi0 = d->project(GridField(g));

  const double t0 = 0.05, fine = 1e-5;
  const std::vector<double> taus = {0.01, 0.005};
  std::map<long, SpectralField> states;
  RunOptions opts;
  opts.record_every = 0;
  opts.snapshot_every = 1;
  opts.on_snapshot = [&](long step, double, const SpectralField& f) {
    const long base = std::lround(t0 / fine);
    for (double tau : taus) {
      const long k = std::lround(tau / fine);
      if (step == base || step == base + k || step == base + 2 * k) states[step] = f;
    }
  };
  ASSERT_EQ(run_uniform(d, phi0, p, t0 + 2 * taus[0], opts).outcome, RunOutcome::completed);

  std::vector<double> lte;
  for (double tau : taus) {
    const long base = std::lround(t0 / fine), k = std::lround(tau / fine);
    SchemeParams q = p;
    q.tau = tau;
    const StepFactor f = ModalStepper(d, q).factor();
    const StepResult r = sldcn_step(d, {states.at(base), states.at(base + k), t0 + tau, 1}, q, f);
    lte.push_back(norms(d->operators(), SpectralField(r.next.coeffs - states.at(base + 2 * k).coeffs)).l2);
  }
  const double ratio = lte[0] / lte[1];
  EXPECT_NEAR(ratio, 8.0, 1.6) << lte[0] << " " << lte[1];
}
