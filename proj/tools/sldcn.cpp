// Command-line driver: one subcommand per experiment type. Machine outputs go
// to files under --out; progress and summaries go to stderr.
//
// Exit codes: 0 success, 1 blow-up, 2 configuration or usage error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "sldcn/sldcn.hpp"

namespace fs = std::filesystem;
using namespace sldcn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBlowUp = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

ManifestOutcome cmd_run(const ExperimentConfig& cfg, const fs::path& out) {
  require(cfg.T > 0.0, "run: [run] T is required");
  const auto disc = Discretization::get(cfg.M, cfg.basis);
  const SpectralField phi0 = initial_field(cfg, disc);
  RunOptions opts;
  opts.record_every = cfg.record_every;
  opts.snapshot_every = cfg.snapshot_every;
  if (cfg.snapshot_every > 0) {
    fs::create_directories(out / "snapshots");
    opts.on_snapshot = [&](long step, double, const SpectralField& f) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%08ld.sldc", step);
      write_snapshot(f, out / "snapshots" / name);
    };
  }
  std::cerr << "run: M=" << cfg.M << " tau=" << cfg.scheme.tau << " T=" << cfg.T << "\n";
  const RunResult r = run_uniform(disc, phi0, cfg.scheme, cfg.T, opts);
  write_energy_csv(r.records, out / "energy.csv");
  write_snapshot(r.final_state, out / "final.sldc");
  std::cerr << "run: " << to_string(r.outcome) << " after " << r.steps << " steps, t=" << r.t
            << ", E_eps=" << r.records.back().E_eps << "\n";
  if (r.outcome == RunOutcome::blow_up) {
    std::cerr << "run: blow-up at step " << r.blowup_step << "\n";
    return ManifestOutcome::blow_up;
  }
  return ManifestOutcome::completed;
}

ManifestOutcome cmd_adaptive(const ExperimentConfig& cfg, const fs::path& out) {
  require(cfg.T > 0.0, "adaptive: [run] T is required");
  require(cfg.adaptive.has_value(), "adaptive: [adaptive] section is required");
  bool blown = false;
  if (cfg.comparison) {
    std::cerr << "adaptive: comparison runs (tau_large=" << cfg.comparison->tau_large
              << ", adaptive, tau_small=" << cfg.comparison->tau_small << ")\n";
    const ComparisonResult c = adaptive_comparison(cfg);
    write_energy_csv(c.uniform_large.records, out / "uniform_large.csv");
    write_energy_csv(c.adaptive.records, out / "adaptive.csv");
    write_energy_csv(c.uniform_small.records, out / "uniform_small.csv");
    write_snapshot(c.adaptive.final_state, out / "final.sldc");
    std::cerr << "adaptive: accepted " << c.adaptive.accepted << ", rejected "
              << c.adaptive.rejected << ", small-step run " << c.uniform_small.steps
              << " steps\n";
    blown = c.uniform_large.outcome == RunOutcome::blow_up ||
            c.adaptive.outcome == RunOutcome::blow_up ||
            c.uniform_small.outcome == RunOutcome::blow_up;
  } else {
    const auto disc = Discretization::get(cfg.M, cfg.basis);
    const AdaptiveResult a =
        adaptive_run(disc, initial_field(cfg, disc), cfg.scheme, *cfg.adaptive, cfg.T);
    write_energy_csv(a.records, out / "adaptive.csv");
    write_snapshot(a.final_state, out / "final.sldc");
    std::cerr << "adaptive: " << to_string(a.outcome) << ", accepted " << a.accepted
              << ", rejected " << a.rejected << ", forced at tau_min " << a.forced << "\n";
    blown = a.outcome == RunOutcome::blow_up;
  }
  return blown ? ManifestOutcome::blow_up : ManifestOutcome::completed;
}

void print_report(const char* name, const ConvergenceReport& r) {
  for (const auto& p : r.points) {
    std::cerr << name << ": x=" << p.abscissa;
    if (p.blow_up) {
      std::cerr << " blow-up\n";
    } else {
      std::cerr << " H-1=" << p.errors.hminus1 << " L2=" << p.errors.l2 << " H1=" << p.errors.h1
                << "\n";
    }
  }
  if (r.has_fit()) {
    std::cerr << name << ": slopes H-1=" << r.slope_hminus1 << " L2=" << r.slope_l2
              << " H1=" << r.slope_h1 << "\n";
  } else {
    std::cerr << name << ": insufficient data for a slope fit\n";
  }
}

ManifestOutcome cmd_converge_time(const ExperimentConfig& cfg, const fs::path& out) {
  require(cfg.T > 0.0, "converge-time: [run] T is required");
  require(!cfg.taus.empty(), "converge-time: [convergence] taus is required");
  require(cfg.reference_tau > 0.0, "converge-time: [convergence] reference_tau is required");
  const ConvergenceReport r = temporal_convergence(cfg);
  write_convergence_csv(r, out / "convergence.csv");
  print_report("converge-time", r);
  return ManifestOutcome::completed;
}

ManifestOutcome cmd_converge_space(const ExperimentConfig& cfg, const fs::path& out) {
  require(cfg.T > 0.0, "converge-space: [run] T is required");
  require(!cfg.Ms.empty(), "converge-space: [convergence] Ms is required");
  require(cfg.reference_M > 0, "converge-space: [convergence] reference_M is required");
  const ConvergenceReport r = spatial_convergence(cfg);
  write_convergence_csv(r, out / "convergence.csv");
  print_report("converge-space", r);
  return ManifestOutcome::completed;
}

ManifestOutcome cmd_stability_scan(const ExperimentConfig& cfg, const fs::path& out) {
  require(cfg.scan.has_value(), "stability-scan: [scan] section is required");
  const auto rows = stability_scan(cfg);
  write_stability_csv(rows, out / "stability.csv");
  write_stability_trials_csv(rows, out / "stability_trials.csv");
  for (const auto& r : rows) {
    std::cerr << "stability-scan: tau=" << r.tau << " minimal " << to_string(cfg.scan->axis)
              << " = ";
    if (r.minimal) {
      std::cerr << *r.minimal;
    } else {
      std::cerr << "none (unstable at all tested values)";
    }
    if (!r.monotone) std::cerr << " [non-monotone: a larger value blew up]";
    std::cerr << "\n";
  }
  return ManifestOutcome::completed;
}

template <class Fn>
int execute(const std::string& command, const CommonArgs& args, Fn fn) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config(args.config);
    if (args.seed) cfg.seed = *args.seed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const fs::path out(args.out);
  if (fs::exists(out / kManifestName) && !args.force) {
    std::cerr << "error: " << (out / kManifestName).string()
              << " exists; pass --force to overwrite\n";
    return kExitUsage;
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << out.string() << "'\n";
    return kExitUsage;
  }

  RunManifest manifest;
  manifest.command = command;
  manifest.config = cfg;
  manifest.start_time = wall_clock_utc();
  int code = kExitOk;
  try {
    manifest.outcome = fn(cfg, out);
    if (manifest.outcome == ManifestOutcome::blow_up) code = kExitBlowUp;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << " (step " << e.step() << ")\n";
    manifest.outcome = ManifestOutcome::blow_up;
    manifest.message = e.what();
    code = kExitBlowUp;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    manifest.outcome = ManifestOutcome::error;
    manifest.message = e.what();
    code = kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    manifest.outcome = ManifestOutcome::error;
    manifest.message = e.what();
    code = kExitUsage;
  }
  manifest.end_time = wall_clock_utc();
  try {
    write_manifest(manifest, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cahn-Hilliard SLD-CN spectral solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonArgs args;
  struct Sub {
    const char* name;
    const char* help;
    ManifestOutcome (*fn)(const ExperimentConfig&, const fs::path&);
  };
  const Sub subs[] = {
      {"run", "uniform-step run with energy trace", cmd_run},
      {"adaptive", "adaptive run, optionally with uniform comparisons", cmd_adaptive},
      {"converge-time", "temporal convergence study", cmd_converge_time},
      {"converge-space", "spatial convergence study", cmd_converge_space},
      {"stability-scan", "minimal stabilization constant per tau", cmd_stability_scan},
  };
  std::uint64_t seed = 0;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", args.config, "experiment config file")->required();
    sub->add_option("--out", args.out, "output directory")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("--force", args.force, "overwrite an existing run directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (const auto& s : subs) {
    CLI::App* sub = app.get_subcommand(s.name);
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) args.seed = seed;
    return execute(s.name, args, s.fn);
  }
  return kExitUsage;
}
