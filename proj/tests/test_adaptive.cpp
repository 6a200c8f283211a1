#include <gtest/gtest.h>

#include <cmath>

#include "sldcn/adaptive.hpp"
#include "sldcn/harness.hpp"

using namespace sldcn;

namespace {

SchemeParams params() {
  SchemeParams p;
  p.epsilon = 0.05;
  p.gamma = 0.0025;
  p.A = 1.0;
  p.B = 0.25;
  p.tau = 1e-3;
  return p;
}

void check_invariants(const AdaptiveResult& r, const AdaptiveConfig& cfg, double end_time) {
  double t = 0.0;
  double last_rejected_tau = 0.0;
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    const auto& rec = r.records[i];
    const bool last = i + 1 == r.records.size();
    if (!last) {
      EXPECT_GE(rec.tau, cfg.tau_min * (1 - 1e-12));
      EXPECT_LE(rec.tau, cfg.tau_max * (1 + 1e-12));
    }
    if (rec.status == StepStatus::rejected) {
      EXPECT_GT(rec.indicator, cfg.tol);
      // a rejection is always followed by a strictly smaller attempt
      if (last_rejected_tau > 0.0) {
        EXPECT_LT(rec.tau, last_rejected_tau);
      }
      last_rejected_tau = rec.tau;
      continue;
    }
    if (last_rejected_tau > 0.0) {
      EXPECT_LT(rec.tau, last_rejected_tau);
    }
    last_rejected_tau = 0.0;
    EXPECT_TRUE(rec.indicator <= cfg.tol || rec.status == StepStatus::accepted_at_tau_min);
    t += rec.tau;
    EXPECT_NEAR(rec.t, t, 1e-12);
  }
  if (r.outcome == RunOutcome::completed) {
    EXPECT_DOUBLE_EQ(r.t, end_time);
  }
}

}  // namespace

TEST(Indicator, Examples) {
  EXPECT_NEAR(indicator(0.01, 0.05, 20.0), 1e-3, 1e-18);
  EXPECT_EQ(indicator(0.0, 0.05, 20.0), 0.0);
  EXPECT_NEAR(indicator(0.02, 0.05, 20.0), 4 * indicator(0.01, 0.05, 20.0), 1e-18);
  EXPECT_THROW(indicator(0.01, 0.05, 0.0), UnsupportedError);
  EXPECT_THROW(indicator(0.01, 0.05, -1.0), UnsupportedError);
  const auto d = Discretization::get(5);
  const SpectralField f = SpectralField::constant(5, 0.2);
  EXPECT_EQ(indicator(*d, f, f, 0.05, 3.0), 0.0);
}

TEST(Adp, Examples) {
  const AdaptiveConfig cfg;
  EXPECT_NEAR(adp(cfg.tol, 0.01, cfg), 0.009, 1e-15);
  EXPECT_NEAR(adp(cfg.tol / 4, 0.01, cfg), 0.018, 1e-15);
  EXPECT_NEAR(adp(4 * cfg.tol, 0.01, cfg), 0.0045, 1e-15);
  EXPECT_EQ(adp(0.0, 0.01, cfg), cfg.tau_max);
}

TEST(AdaptiveConfig, DefaultsAndValidation) {
  const AdaptiveConfig cfg;
  EXPECT_EQ(cfg.rho, 0.9);
  EXPECT_EQ(cfg.tol, 1e-3);
  EXPECT_EQ(cfg.tau_min, 1e-6);
  EXPECT_EQ(cfg.tau_max, 0.01);
  EXPECT_NO_THROW(cfg.validate());
  AdaptiveConfig bad = cfg;
  bad.rho = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.tau_init = 0.1;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(AdaptiveRun, SmoothDataGrowsToTauMax) {
  const auto d = Discretization::get(12);
  const AdaptiveConfig cfg;
  const AdaptiveResult r = adaptive_run(d, SpectralField::constant(12, 0.2), params(), cfg, 0.5);
  EXPECT_EQ(r.outcome, RunOutcome::completed);
  EXPECT_EQ(r.rejected, 0);
  double largest = 0.0;
  for (const auto& rec : r.records) largest = std::max(largest, rec.tau);
  EXPECT_DOUBLE_EQ(largest, cfg.tau_max);
  check_invariants(r, cfg, 0.5);
}

TEST(AdaptiveRun, RandomDataRejectsThenGrows) {
  const auto d = Discretization::get(24);
  const AdaptiveConfig cfg;
  const AdaptiveResult r =
      adaptive_run(d, random_initial(1, *d).field, params(), cfg, 0.2);
  ASSERT_EQ(r.outcome, RunOutcome::completed);
  EXPECT_GT(r.rejected, 0);
  check_invariants(r, cfg, 0.2);
  const double m0 = r.records.front().mass;
  for (const auto& rec : r.records) {
    if (rec.accepted()) {
      EXPECT_NEAR(rec.mass, m0, 1e-12);
    }
  }
}

TEST(AdaptiveRun, LivelockGuardFlagsTauMinSteps) {
  const auto d = Discretization::get(16);
  AdaptiveConfig cfg;
  cfg.tol = 1e-12;  // unreachable: every step ends at tau_min
  cfg.tau_min = 1e-4;
  cfg.tau_init = 1e-3;
  const AdaptiveResult r = adaptive_run(d, random_initial(2, *d).field, params(), cfg, 2e-3);
  ASSERT_EQ(r.outcome, RunOutcome::completed);
  EXPECT_GT(r.forced, 0);
  EXPECT_EQ(r.forced, r.accepted);
  check_invariants(r, cfg, 2e-3);
}

TEST(AdaptiveRun, FinalStepLandsOnEndTime) {
  const auto d = Discretization::get(8);
  AdaptiveConfig cfg;
  const AdaptiveResult r = adaptive_run(d, SpectralField::constant(8, 0.0), params(), cfg, 0.0137);
  EXPECT_DOUBLE_EQ(r.t, 0.0137);
  EXPECT_DOUBLE_EQ(r.records.back().t, 0.0137);
}

TEST(AdaptiveRun, RejectsBadEndTime) {
  const auto d = Discretization::get(4);
  EXPECT_THROW(adaptive_run(d, SpectralField::zeros(4), params(), AdaptiveConfig{}, 0.0),
               ConfigError);
}
