#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "sldcn/scheme.hpp"

namespace sldcn {

struct AdaptiveConfig {
  double rho = 0.9;  // safety coefficient
  double tol = 1e-3;
  double tau_min = 1e-6;
  double tau_max = 0.01;
  double tau_init = 1e-3;

  void validate() const {
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("adaptive: rho must be in (0, 1]");
    if (!(tol > 0.0)) throw ConfigError("adaptive: tol must be positive");
    if (!(tau_min > 0.0 && tau_min <= tau_init && tau_init <= tau_max)) {
      throw ConfigError("adaptive: need 0 < tau_min <= tau_init <= tau_max");
    }
  }

  bool operator==(const AdaptiveConfig&) const = default;
};

/// e = 10 (||phi^{n+1} - phi^n|| / (eps E_C))^2: interface speed relative to
/// interface thickness.
inline double indicator(double increment_l2, double epsilon, double discrete_energy) {
  if (!(discrete_energy > 0.0)) {
    throw UnsupportedError("indicator: undefined for nonpositive discrete energy");
  }
  const double r = increment_l2 / (epsilon * discrete_energy);
  return 10.0 * r * r;
}

inline double indicator(const Discretization& disc, const SpectralField& next,
                        const SpectralField& curr, double epsilon,
                        double discrete_energy) {
  const FieldNorms n = norms(disc.operators(), SpectralField(next.coeffs - curr.coeffs));
  return indicator(n.l2, epsilon, discrete_energy);
}

/// Proposed step rho * sqrt(tol / e) * tau; e = 0 means "grow maximally".
inline double adp(double e, double tau, const AdaptiveConfig& cfg) {
  if (e == 0.0) return cfg.tau_max;
  return cfg.rho * std::sqrt(cfg.tol / e) * tau;
}

struct AdaptiveResult {
  RunOutcome outcome = RunOutcome::completed;
  long blowup_step = -1;
  long accepted = 0;
  long rejected = 0;
  long forced = 0;  // accepted at tau_min with e > tol
  double t = 0.0;
  SpectralField prev;
  SpectralField final_state;
  /// Every attempted step, rejected ones included, in order.
  std::vector<EnergyRecord> records;
};

/// Accept/reject time stepping driven by the interface-speed indicator.
///
/// The step size actually attempted is kept inside [tau_min, tau_max], except
/// for the last step, which is clipped to land on T. The two-step history is
/// reused as-is when tau changes.
inline AdaptiveResult adaptive_run(std::shared_ptr<const Discretization> disc,
                                   const SpectralField& phi0, const SchemeParams& params,
                                   const AdaptiveConfig& cfg, double end_time) {
  params.validate();
  cfg.validate();
  if (!(end_time > 0.0)) throw ConfigError("adaptive_run: end time must be positive");

  SchemeParams p = params;
  p.tau = cfg.tau_init;
  ModalStepper stepper(disc, p);
  Matrix prev = disc->to_modal(phi0);
  Matrix curr = prev;
  Matrix next, grid;

  AdaptiveResult result;
  result.records.push_back(detail::make_record(*disc, p, 0, 0.0, cfg.tau_init, curr, curr, grid));

  const double time_eps = 1e-12 * std::max(1.0, end_time);
  double t = 0.0;
  double tau_next = cfg.tau_init;
  long n = 0;
  while (end_time - t > time_eps) {
    double tau_try = std::clamp(tau_next, cfg.tau_min, cfg.tau_max);
    for (;;) {
      const bool clipped = t + tau_try >= end_time - time_eps;
      if (clipped) tau_try = end_time - t;
      stepper.set_tau(tau_try);
      if (n == 0) {
        stepper.first_step(curr, next);
      } else {
        stepper.step(prev, curr, next);
      }

      EnergyRecord rec;
      double e = std::numeric_limits<double>::infinity();
      const bool finite = next.allFinite() && !is_blown_up(stepper.last_grid_max());
      if (finite) {
        rec = detail::make_record(*disc, stepper.params(), n + 1, t + tau_try, tau_try,
                                  curr, next, grid);
        if (!is_blown_up(detail::grid_max(grid)) && std::isfinite(rec.E_C)) {
          e = rec.dt_l2 == 0.0 ? 0.0 : indicator(rec.dt_l2, p.epsilon, rec.E_C);
        }
      } else {
        rec.step = n + 1;
        rec.t = t + tau_try;
        rec.tau = tau_try;
        rec.E_eps = rec.E_C = rec.mass = rec.dt_l2 = rec.dt_h1 =
            std::numeric_limits<double>::quiet_NaN();
      }
      rec.indicator = e;
      const double proposal = std::isfinite(e) ? adp(e, tau_try, cfg) : 0.0;
      const bool at_floor = tau_try <= cfg.tau_min;

      if (e > cfg.tol && !at_floor) {
        rec.status = StepStatus::rejected;
        result.records.push_back(rec);
        ++result.rejected;
        tau_try = std::max(cfg.tau_min, std::min(proposal, cfg.tau_max));
        continue;
      }
      if (!std::isfinite(e)) {
        rec.status = StepStatus::rejected;
        result.records.push_back(rec);
        result.outcome = RunOutcome::blow_up;
        result.blowup_step = n + 1;
        result.t = t;
        result.prev = disc->from_modal(prev);
        result.final_state = disc->from_modal(curr);
        return result;
      }
      rec.status = e > cfg.tol ? StepStatus::accepted_at_tau_min : StepStatus::accepted;
      if (rec.status == StepStatus::accepted_at_tau_min) ++result.forced;
      result.records.push_back(rec);
      ++result.accepted;
      t = clipped ? end_time : t + tau_try;
      tau_next = std::min(proposal, cfg.tau_max);
      break;
    }
    prev.swap(curr);
    curr.swap(next);
    ++n;
  }
  result.t = t;
  result.prev = disc->from_modal(prev);
  result.final_state = disc->from_modal(curr);
  return result;
}

}  // namespace sldcn
