#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sldcn/discretization.hpp"
#include "sldcn/energy.hpp"
#include "sldcn/error.hpp"
#include "sldcn/potential.hpp"

namespace sldcn {

/// Grid max-norm above which a trajectory is declared blown up.
inline constexpr double kBlowUpThreshold = 1e3;

struct SchemeParams {
  double epsilon = 0.05;
  double gamma = 0.0025;
  double tau = 0.01;
  double A = 0.0;
  double B = 0.0;
  PotentialSpec potential{};
  /// L in the discrete energy E_C; the truncated-well bound unless overridden.
  double energy_lipschitz = kTruncatedLipschitz;

  void validate() const {
    if (!(epsilon > 0.0) || !(gamma > 0.0) || !(tau > 0.0)) {
      throw ConfigError("SchemeParams: epsilon, gamma and tau must be positive");
    }
    if (!(A >= 0.0) || !(B >= 0.0)) {
      throw ConfigError("SchemeParams: A and B must be nonnegative");
    }
  }

  /// Sufficient condition for the discrete energy law with Lipschitz bound L:
  /// A >= L^2 gamma / (16 eps^2) and B >= L / (2 eps).
  bool satisfies_energy_condition(double lipschitz_bound) const {
    return A >= lipschitz_bound * lipschitz_bound * gamma / (16.0 * epsilon * epsilon) &&
           B >= lipschitz_bound / (2.0 * epsilon);
  }

  bool operator==(const SchemeParams&) const = default;
};

/// The two time levels the SLD-CN update needs.
struct StepState {
  SpectralField prev;  // phi^{n-1}
  SpectralField curr;  // phi^n
  double t = 0.0;
  long step_index = 0;
};

/// Single-threaded integrator working in modal coordinates.
///
/// In modal form every linear operator is diagonal, so one SLD-CN step is
///   d * a^{n+1} = a^n - tau*gamma*lam*( eps/4 lam a^{n-1} + f~/eps
///                                      - A tau lam a^n + B (a^{n-1} - 2 a^n) )
/// with f~ the modal load of f evaluated at (3 a^n - a^{n-1})/2 on the grid.
class ModalStepper {
 public:
  ModalStepper(std::shared_ptr<const Discretization> disc, SchemeParams params)
      : disc_(std::move(disc)), params_(params) {
    params_.validate();
    rebuild();
  }

  const Discretization& discretization() const noexcept { return *disc_; }
  const SchemeParams& params() const noexcept { return params_; }
  double tau() const noexcept { return params_.tau; }
  const StepFactor& factor() const noexcept { return *factor_; }

  void set_tau(double tau) {
    if (tau == params_.tau) return;
    if (!(tau > 0.0)) throw ConfigError("ModalStepper: tau must be positive");
    params_.tau = tau;
    rebuild();
  }

  /// Stabilized first-order step with S = 1/eps and explicit f(phi^0).
  void first_step(const Matrix& a0, Matrix& a1) {
    const double eps = params_.epsilon;
    const double s = 1.0 / eps;
    nonlinear_load(a0);
    const StepFactor first =
        StepFactor::first_order(disc_->eigen(), params_.tau, eps, params_.gamma, s);
    const auto lam = disc_->pair_eigvals().array();
    a1 = ((a0.array() - params_.tau * params_.gamma * lam *
                            (load_.array() / eps - s * a0.array())) /
          first.denominators().array())
             .matrix();
  }

  /// SLD-CN update (prev, curr) -> next.
  void step(const Matrix& prev, const Matrix& curr, Matrix& next) {
    const double eps = params_.epsilon;
    const double tau = params_.tau;
    extrap_.noalias() = 1.5 * curr - 0.5 * prev;
    nonlinear_load(extrap_);
    const auto lam = disc_->pair_eigvals().array();
    next = ((curr.array() -
             tau * params_.gamma * lam *
                 (0.25 * eps * lam * prev.array() + load_.array() / eps -
                  params_.A * tau * lam * curr.array() +
                  params_.B * (prev.array() - 2.0 * curr.array()))) /
            factor_->denominators().array())
               .matrix();
  }

  /// Modal chemical potential recovered from the second equation, using the
  /// nonlinear load of the last call to step().
  Matrix chemical_potential(const Matrix& prev, const Matrix& curr,
                            const Matrix& next) const {
    const double eps = params_.epsilon;
    const auto lam = disc_->pair_eigvals().array();
    return (eps * lam * (3.0 * next.array() + prev.array()) / 4.0 + load_.array() / eps +
            params_.A * params_.tau * lam * (next.array() - curr.array()) +
            params_.B * (next.array() - 2.0 * curr.array() + prev.array()))
        .matrix();
  }

  /// Max |value| on the grid of the field last fed to the nonlinearity, or
  /// infinity if it contained a non-finite value.
  double last_grid_max() const noexcept { return last_grid_max_; }

 private:
  void rebuild() {
    factor_.emplace(StepFactor::sldcn(disc_->eigen(), params_.tau, params_.epsilon,
                                      params_.gamma, params_.A, params_.B));
  }

  void nonlinear_load(const Matrix& a) {
    disc_->modal_synthesize(a, grid_);
    last_grid_max_ = grid_.allFinite() ? grid_.cwiseAbs().maxCoeff()
                                       : std::numeric_limits<double>::infinity();
    const PotentialSpec pot = params_.potential;
    grid_ = grid_.unaryExpr([pot](double v) { return potential_f(v, pot); });
    disc_->modal_inner(grid_, load_);
  }

  std::shared_ptr<const Discretization> disc_;
  SchemeParams params_;
  std::optional<StepFactor> factor_;
  Matrix grid_, load_, extrap_;
  double last_grid_max_ = 0.0;
};

inline bool is_blown_up(double grid_max) {
  return !(grid_max <= kBlowUpThreshold);
}

/// phi^1 from phi^0 by the stabilized first-order scheme.
inline SpectralField first_step(std::shared_ptr<const Discretization> disc,
                                const SpectralField& phi0, const SchemeParams& params) {
  ModalStepper stepper(disc, params);
  Matrix a1;
  stepper.first_step(disc->to_modal(phi0), a1);
  if (!a1.allFinite() || is_blown_up(stepper.last_grid_max())) {
    throw BlowUpError(1, "first_step: non-finite or unbounded solution");
  }
  return disc->from_modal(a1);
}

struct StepResult {
  SpectralField next;  // phi^{n+1}
  SpectralField mu;    // mu^{n+1/2}
};

/// One SLD-CN step. The factor must match params (same tau, eps, gamma, A, B).
inline StepResult sldcn_step(std::shared_ptr<const Discretization> disc,
                             const StepState& state, const SchemeParams& params,
                             const StepFactor& factor) {
  detail::check_square(state.prev.coeffs, disc->size(), "sldcn_step prev");
  detail::check_square(state.curr.coeffs, disc->size(), "sldcn_step curr");
  ModalStepper stepper(disc, params);
  const Matrix& expected = stepper.factor().denominators();
  if (factor.size() != disc->size() || factor.denominators() != expected) {
    throw DimensionError("sldcn_step: factor was built for different parameters");
  }
  const Matrix prev = disc->to_modal(state.prev);
  const Matrix curr = disc->to_modal(state.curr);
  Matrix next;
  stepper.step(prev, curr, next);
  if (!next.allFinite() || is_blown_up(stepper.last_grid_max())) {
    throw BlowUpError(state.step_index + 1, "sldcn_step: non-finite or unbounded solution");
  }
  StepResult out;
  out.mu = disc->from_modal(stepper.chemical_potential(prev, curr, next));
  out.next = disc->from_modal(next);
  return out;
}

enum class RunOutcome { completed, blow_up };

inline std::string to_string(RunOutcome o) {
  return o == RunOutcome::completed ? "completed" : "blow-up";
}

struct RunOptions {
  /// Record every k-th step; 0 records only the initial and the final state.
  long record_every = 1;
  /// Called with (step, t, field) every snapshot_every steps (0 disables).
  long snapshot_every = 0;
  std::function<void(long, double, const SpectralField&)> on_snapshot;
};

struct RunResult {
  RunOutcome outcome = RunOutcome::completed;
  long blowup_step = -1;
  long steps = 0;
  double t = 0.0;
  SpectralField prev;
  SpectralField final_state;
  std::vector<EnergyRecord> records;
};

/// Number of uniform steps to reach T, tolerant to T/tau being an integer up
/// to rounding.
inline long uniform_step_count(double end_time, double tau) {
  const double r = end_time / tau;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, r)) return static_cast<long>(nearest);
  return static_cast<long>(std::ceil(r));
}

namespace detail {

/// Builds a record for the step that produced `next` from `curr`.
inline EnergyRecord make_record(const Discretization& disc, const SchemeParams& p,
                                long step, double t, double tau, const Matrix& curr,
                                const Matrix& next, Matrix& grid) {
  disc.modal_synthesize(next, grid);
  EnergyRecord r;
  r.step = step;
  r.t = t;
  r.tau = tau;
  r.E_eps = modal::energy_eps(disc, next, grid, p.epsilon, p.potential);
  const Matrix d = next - curr;
  const double l2sq = modal::l2_squared(d);
  const double h1sq = modal::h1_squared(disc, d);
  r.dt_l2 = std::sqrt(l2sq);
  r.dt_h1 = std::sqrt(h1sq);
  r.E_C = r.E_eps + (p.energy_lipschitz / (4.0 * p.epsilon) + 0.5 * p.B) * l2sq +
          p.epsilon / 8.0 * h1sq;
  r.mass = modal::mean(disc, next);
  return r;
}

inline double grid_max(const Matrix& grid) {
  return grid.allFinite() ? grid.cwiseAbs().maxCoeff()
                          : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Stabilized first step, then SLD-CN steps with constant tau until T.
inline RunResult run_uniform(std::shared_ptr<const Discretization> disc,
                             const SpectralField& phi0, const SchemeParams& params,
                             double end_time, const RunOptions& options = {}) {
  params.validate();
  if (!(end_time > params.tau)) {
    throw ConfigError("run_uniform: end time must exceed the time step");
  }
  const long total = uniform_step_count(end_time, params.tau);
  ModalStepper stepper(disc, params);
  Matrix prev = disc->to_modal(phi0);
  Matrix curr = prev;
  Matrix next, grid;

  RunResult result;
  result.records.push_back(
      detail::make_record(*disc, params, 0, 0.0, params.tau, curr, curr, grid));
  if (options.on_snapshot && options.snapshot_every > 0) {
    options.on_snapshot(0, 0.0, phi0);
  }

  for (long n = 1; n <= total; ++n) {
    if (n == 1) {
      stepper.first_step(curr, next);
    } else {
      stepper.step(prev, curr, next);
    }
    const double t = static_cast<double>(n) * params.tau;
    bool blown = !next.allFinite() || is_blown_up(stepper.last_grid_max());
    const bool record = n == total || (options.record_every > 0 && n % options.record_every == 0);
    if (!blown && record) {
      result.records.push_back(
          detail::make_record(*disc, params, n, t, params.tau, curr, next, grid));
      blown = is_blown_up(detail::grid_max(grid)) || !std::isfinite(result.records.back().E_C);
      if (blown) result.records.pop_back();
    }
    if (blown) {
      result.outcome = RunOutcome::blow_up;
      result.blowup_step = n;
      break;
    }
    prev.swap(curr);
    curr.swap(next);
    result.steps = n;
    result.t = t;
    if (options.on_snapshot && options.snapshot_every > 0 &&
        n % options.snapshot_every == 0) {
      options.on_snapshot(n, t, disc->from_modal(curr));
    }
  }
  result.prev = disc->from_modal(prev);
  result.final_state = disc->from_modal(curr);
  return result;
}

}  // namespace sldcn
