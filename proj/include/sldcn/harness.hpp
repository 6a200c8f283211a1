#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sldcn/adaptive.hpp"
#include "sldcn/discretization.hpp"
#include "sldcn/energy.hpp"
#include "sldcn/rng.hpp"
#include "sldcn/scheme.hpp"

namespace sldcn {

enum class InitialKind {
  /// i.i.d. uniform(-1, 1) samples on the 2M grid, projected to V_M
  random,
  /// the random field evolved to t = 64 eps^3
  phi1,
};

inline std::string to_string(InitialKind k) {
  return k == InitialKind::random ? "random" : "phi1";
}

enum class ScanAxis { A, B };

inline std::string to_string(ScanAxis a) { return a == ScanAxis::A ? "A" : "B"; }

struct ComparisonConfig {
  double tau_large = 0.01;
  double tau_small = 1e-5;

  bool operator==(const ComparisonConfig&) const = default;
};

struct ScanConfig {
  ScanAxis axis = ScanAxis::A;
  std::vector<double> taus;
  /// candidates are {0} and grid_scale * 2^i for i = 0..grid_count-1
  double grid_scale = 1.0;
  int grid_count = 0;
  long steps = 4096;

  std::vector<double> candidates() const {
    std::vector<double> c{0.0};
    for (int i = 0; i < grid_count; ++i) c.push_back(std::ldexp(grid_scale, i));
    return c;
  }

  bool operator==(const ScanConfig&) const = default;
};

struct ExperimentConfig {
  std::string id = "experiment";
  std::uint64_t seed = 1;
  int M = 0;
  BasisKind basis = BasisKind::legendre;
  SchemeParams scheme{};
  double T = 0.0;
  InitialKind initial = InitialKind::random;
  double phi1_tau = 0.0;
  long record_every = 1;
  long snapshot_every = 0;
  std::optional<AdaptiveConfig> adaptive;
  std::optional<ComparisonConfig> comparison;
  std::vector<double> taus;
  double reference_tau = 0.0;
  std::vector<int> Ms;
  int reference_M = 0;
  std::optional<ScanConfig> scan;

  bool operator==(const ExperimentConfig&) const = default;
};

struct InitialField {
  GridField grid;
  SpectralField field;
};

/// Uniform(-1, 1) samples at the tensor Gauss nodes; node (i, m) uses draw
/// i * 2M + m of the seeded stream. Projected onto V_M in L2.
inline InitialField random_initial(std::uint64_t seed, const Discretization& disc) {
  const int n = disc.grid_size();
  const CounterRng rng(seed);
  Matrix values(n, n);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < n; ++m) {
      values(i, m) = rng.uniform(static_cast<std::uint64_t>(i) * n + m, -1.0, 1.0);
    }
  }
  InitialField out{GridField(std::move(values)), {}};
  out.field = disc.project(out.grid);
  return out;
}

/// 64 eps^3, the end time of the phi1 preparation run.
inline double phi1_time(double epsilon) { return 64.0 * epsilon * epsilon * epsilon; }

/// Evolves the seeded random field to t = 64 eps^3 with params (params.tau is
/// the preparation step).
inline SpectralField prepare_phi1(std::uint64_t seed,
                                  std::shared_ptr<const Discretization> disc,
                                  const SchemeParams& params) {
  const InitialField start = random_initial(seed, *disc);
  RunOptions opts;
  opts.record_every = 0;
  const RunResult r = run_uniform(disc, start.field, params, phi1_time(params.epsilon), opts);
  if (r.outcome == RunOutcome::blow_up) {
    throw BlowUpError(r.blowup_step, "prepare_phi1: preparation run blew up");
  }
  return r.final_state;
}

/// Initial condition selected by the config, at basis size disc->size().
inline SpectralField initial_field(const ExperimentConfig& cfg,
                                   std::shared_ptr<const Discretization> disc) {
  if (cfg.initial == InitialKind::random) return random_initial(cfg.seed, *disc).field;
  SchemeParams prep = cfg.scheme;
  prep.tau = cfg.phi1_tau;
  return prepare_phi1(cfg.seed, disc, prep);
}

/// Ordinary least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

/// Errors of one difference field.
struct ErrorNorms {
  double hminus1 = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;  // full H1 norm
};

/// The mean of the difference is removed before the H^-1 norm; both fields
/// carry the same mean, so this only discards roundoff.
inline ErrorNorms error_norms(const Discretization& disc, const SpectralField& diff) {
  const FieldNorms n = norms(disc.operators(), diff);
  SpectralField zero_mean = diff;
  zero_mean.coeffs(0, 0) = 0.0;
  ErrorNorms e;
  e.l2 = n.l2;
  e.h1 = std::sqrt(n.l2 * n.l2 + n.h1_semi * n.h1_semi);
  e.hminus1 = hminus1_norm(disc.operators(), disc.eigen(), zero_mean);
  return e;
}

struct ConvergencePoint {
  double abscissa = 0.0;  // tau or M
  ErrorNorms errors{};
  bool blow_up = false;
};

inline constexpr std::size_t kMinFitPoints = 3;

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  /// NaN when fewer than kMinFitPoints points survived.
  double slope_hminus1 = std::numeric_limits<double>::quiet_NaN();
  double slope_l2 = std::numeric_limits<double>::quiet_NaN();
  double slope_h1 = std::numeric_limits<double>::quiet_NaN();

  bool has_fit() const { return std::isfinite(slope_l2); }

  void fit() {
    std::vector<double> x, hm, l2, h1;
    for (const auto& p : points) {
      if (p.blow_up) continue;
      x.push_back(p.abscissa);
      hm.push_back(p.errors.hminus1);
      l2.push_back(p.errors.l2);
      h1.push_back(p.errors.h1);
    }
    if (x.size() < kMinFitPoints) return;
    slope_hminus1 = loglog_slope(x, hm);
    slope_l2 = loglog_slope(x, l2);
    slope_h1 = loglog_slope(x, h1);
  }
};

/// Errors at T of runs with each tau in cfg.taus against a cfg.reference_tau
/// run from the same initial data.
inline ConvergenceReport temporal_convergence(const ExperimentConfig& cfg) {
  if (cfg.taus.empty()) throw ConfigError("temporal_convergence: empty tau list");
  for (double tau : cfg.taus) {
    if (!(cfg.reference_tau < tau)) {
      throw ConfigError("temporal_convergence: reference tau must be below every test tau");
    }
  }
  const auto disc = Discretization::get(cfg.M, cfg.basis);
  const SpectralField phi0 = initial_field(cfg, disc);
  RunOptions opts;
  opts.record_every = 0;

  SchemeParams ref_params = cfg.scheme;
  ref_params.tau = cfg.reference_tau;
  const RunResult ref = run_uniform(disc, phi0, ref_params, cfg.T, opts);
  if (ref.outcome == RunOutcome::blow_up) {
    throw BlowUpError(ref.blowup_step, "temporal_convergence: reference run blew up");
  }

  ConvergenceReport report;
  for (double tau : cfg.taus) {
    SchemeParams p = cfg.scheme;
    p.tau = tau;
    const RunResult r = run_uniform(disc, phi0, p, cfg.T, opts);
    ConvergencePoint pt;
    pt.abscissa = tau;
    if (r.outcome == RunOutcome::blow_up) {
      pt.blow_up = true;
    } else {
      pt.errors = error_norms(*disc, SpectralField(r.final_state.coeffs - ref.final_state.coeffs));
    }
    report.points.push_back(pt);
  }
  report.fit();
  return report;
}

/// Errors at T for each basis size in cfg.Ms against cfg.reference_M. The
/// initial data is built at the reference size and truncated; the reference
/// solution is truncated to each coarse size before comparison.
inline ConvergenceReport spatial_convergence(const ExperimentConfig& cfg) {
  if (cfg.Ms.empty()) throw ConfigError("spatial_convergence: empty M list");
  for (int m : cfg.Ms) {
    if (!(m < cfg.reference_M)) {
      throw ConfigError("spatial_convergence: reference M must exceed every test M");
    }
  }
  const auto ref_disc = Discretization::get(cfg.reference_M, cfg.basis);
  const SpectralField phi0 = initial_field(cfg, ref_disc);
  RunOptions opts;
  opts.record_every = 0;
  const RunResult ref = run_uniform(ref_disc, phi0, cfg.scheme, cfg.T, opts);
  if (ref.outcome == RunOutcome::blow_up) {
    throw BlowUpError(ref.blowup_step, "spatial_convergence: reference run blew up");
  }

  ConvergenceReport report;
  for (int m : cfg.Ms) {
    const auto disc = Discretization::get(m, cfg.basis);
    const RunResult r =
        run_uniform(disc, resize_coefficients(phi0, m), cfg.scheme, cfg.T, opts);
    ConvergencePoint pt;
    pt.abscissa = m;
    if (r.outcome == RunOutcome::blow_up) {
      pt.blow_up = true;
    } else {
      const SpectralField ref_coarse = resize_coefficients(ref.final_state, m);
      pt.errors = error_norms(*disc, SpectralField(r.final_state.coeffs - ref_coarse.coeffs));
    }
    report.points.push_back(pt);
  }
  report.fit();
  return report;
}

struct StabilityTrial {
  double value = 0.0;
  bool stable = false;
  long blowup_step = -1;
};

struct StabilityRow {
  double tau = 0.0;
  std::optional<double> minimal;  // empty: unstable at all tested values
  std::vector<StabilityTrial> trials;
  /// false if some value above the minimal stable one blew up
  bool monotone = true;
};

/// Runs `steps` steps for each candidate of the scanned constant and reports
/// the smallest one that does not blow up. All candidates are run so that a
/// non-monotone pattern is surfaced rather than hidden.
inline StabilityRow stability_scan(std::shared_ptr<const Discretization> disc,
                                   const SpectralField& phi0, const SchemeParams& base,
                                   ScanAxis axis, double tau,
                                   const std::vector<double>& candidates, long steps) {
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (!(candidates[i - 1] < candidates[i])) {
      throw ConfigError("stability_scan: candidate grid must be ascending");
    }
  }
  StabilityRow row;
  row.tau = tau;
  RunOptions opts;
  opts.record_every = 0;
  for (double v : candidates) {
    SchemeParams p = base;
    p.tau = tau;
    (axis == ScanAxis::A ? p.A : p.B) = v;
    const RunResult r = run_uniform(disc, phi0, p, static_cast<double>(steps) * tau, opts);
    StabilityTrial trial;
    trial.value = v;
    trial.stable = r.outcome == RunOutcome::completed;
    trial.blowup_step = r.blowup_step;
    row.trials.push_back(trial);
  }
  for (const auto& trial : row.trials) {
    if (trial.stable && !row.minimal) {
      row.minimal = trial.value;
    } else if (!trial.stable && row.minimal) {
      row.monotone = false;
    }
  }
  return row;
}

inline std::vector<StabilityRow> stability_scan(const ExperimentConfig& cfg) {
  if (!cfg.scan) throw ConfigError("stability_scan: missing [scan] section");
  const auto disc = Discretization::get(cfg.M, cfg.basis);
  const SpectralField phi0 = initial_field(cfg, disc);
  std::vector<StabilityRow> rows;
  for (double tau : cfg.scan->taus) {
    rows.push_back(stability_scan(disc, phi0, cfg.scheme, cfg.scan->axis, tau,
                                  cfg.scan->candidates(), cfg.scan->steps));
  }
  return rows;
}

struct ComparisonResult {
  RunResult uniform_large;
  AdaptiveResult adaptive;
  RunResult uniform_small;
};

/// Uniform large-step, adaptive and uniform small-step runs from the same
/// initial data. The small-step trace is recorded on the large-step time grid.
inline ComparisonResult adaptive_comparison(const ExperimentConfig& cfg) {
  if (!cfg.adaptive) throw ConfigError("adaptive_comparison: missing [adaptive] section");
  const ComparisonConfig cmp = cfg.comparison.value_or(ComparisonConfig{});
  const auto disc = Discretization::get(cfg.M, cfg.basis);
  const SpectralField phi0 = initial_field(cfg, disc);

  ComparisonResult out;
  RunOptions opts;
  opts.record_every = cfg.record_every;
  SchemeParams p = cfg.scheme;
  p.tau = cmp.tau_large;
  out.uniform_large = run_uniform(disc, phi0, p, cfg.T, opts);
  out.adaptive = adaptive_run(disc, phi0, cfg.scheme, *cfg.adaptive, cfg.T);
  p.tau = cmp.tau_small;
  opts.record_every =
      std::max(1L, std::lround(cmp.tau_large / cmp.tau_small)) * std::max(1L, cfg.record_every);
  out.uniform_small = run_uniform(disc, phi0, p, cfg.T, opts);
  return out;
}

}  // namespace sldcn
