#pragma once

#include <array>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sldcn/config.hpp"
#include "sldcn/energy.hpp"
#include "sldcn/error.hpp"
#include "sldcn/harness.hpp"
#include "sldcn/spectral.hpp"

namespace sldcn {

inline constexpr const char* kVersion = "sldcn 1.0.0";

inline constexpr const char* kEnergyCsvHeader = "t,tau,E_eps,E_C,mass,dt_l2,dt_h1,accepted";

namespace io_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// binary mode everywhere so line endings are LF on every platform
inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline double parse_num(const std::string& s, const std::string& origin) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw FormatError(origin + ": bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace io_detail

/// One row per record, 17 significant digits, LF line endings. The accepted
/// column holds the StepStatus code (0 rejected, 1 accepted, 2 accepted at
/// tau_min).
inline void write_energy_csv(const std::vector<EnergyRecord>& records,
                             const std::filesystem::path& path) {
  using io_detail::num;
  auto out = io_detail::open_out(path);
  out << kEnergyCsvHeader << '\n';
  for (const auto& r : records) {
    out << num(r.t) << ',' << num(r.tau) << ',' << num(r.E_eps) << ',' << num(r.E_C) << ','
        << num(r.mass) << ',' << num(r.dt_l2) << ',' << num(r.dt_h1) << ','
        << static_cast<int>(r.status) << '\n';
  }
  io_detail::finish(out, path);
}

inline std::vector<EnergyRecord> read_energy_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kEnergyCsvHeader) {
    throw FormatError(path.string() + ": missing energy CSV header");
  }
  std::vector<EnergyRecord> out;
  long step = 0;
  while (std::getline(in, line)) {
    const auto f = io_detail::split(line);
    if (f.size() != 8) throw FormatError(path.string() + ": expected 8 fields");
    const std::string o = path.string();
    EnergyRecord r;
    r.step = step++;
    r.t = io_detail::parse_num(f[0], o);
    r.tau = io_detail::parse_num(f[1], o);
    r.E_eps = io_detail::parse_num(f[2], o);
    r.E_C = io_detail::parse_num(f[3], o);
    r.mass = io_detail::parse_num(f[4], o);
    r.dt_l2 = io_detail::parse_num(f[5], o);
    r.dt_h1 = io_detail::parse_num(f[6], o);
    const double s = io_detail::parse_num(f[7], o);
    if (s != 0.0 && s != 1.0 && s != 2.0) throw FormatError(o + ": bad accepted code");
    r.status = static_cast<StepStatus>(static_cast<int>(s));
    out.push_back(r);
  }
  return out;
}

inline constexpr const char* kConvergenceCsvHeader =
    "abscissa,err_hm1,err_l2,err_h1,blowup,slope_hm1,slope_l2,slope_h1";

/// Slope columns repeat the fitted value on every row (nan when the fit had
/// fewer than three surviving points).
inline void write_convergence_csv(const ConvergenceReport& report,
                                  const std::filesystem::path& path) {
  using io_detail::num;
  auto out = io_detail::open_out(path);
  out << kConvergenceCsvHeader << '\n';
  for (const auto& p : report.points) {
    out << num(p.abscissa) << ',' << num(p.errors.hminus1) << ',' << num(p.errors.l2) << ','
        << num(p.errors.h1) << ',' << (p.blow_up ? 1 : 0) << ',' << num(report.slope_hminus1)
        << ',' << num(report.slope_l2) << ',' << num(report.slope_h1) << '\n';
  }
  io_detail::finish(out, path);
}

/// Minimal stable value per tau (nan if none) and a 0/1 monotonicity flag.
inline void write_stability_csv(const std::vector<StabilityRow>& rows,
                                const std::filesystem::path& path) {
  using io_detail::num;
  auto out = io_detail::open_out(path);
  out << "tau,minimal,monotone\n";
  for (const auto& r : rows) {
    out << num(r.tau) << ',' << num(r.minimal.value_or(std::nan(""))) << ','
        << (r.monotone ? 1 : 0) << '\n';
  }
  io_detail::finish(out, path);
}

inline void write_stability_trials_csv(const std::vector<StabilityRow>& rows,
                                       const std::filesystem::path& path) {
  using io_detail::num;
  auto out = io_detail::open_out(path);
  out << "tau,value,stable,blowup_step\n";
  for (const auto& r : rows) {
    for (const auto& t : r.trials) {
      out << num(r.tau) << ',' << num(t.value) << ',' << (t.stable ? 1 : 0) << ','
          << t.blowup_step << '\n';
    }
  }
  io_detail::finish(out, path);
}

// Snapshot layout: "SLDC", u16 version, u32 M, then M*M little-endian f64
// coefficients in row-major order (k outer, j inner).
inline constexpr std::array<char, 4> kSnapshotMagic = {'S', 'L', 'D', 'C'};
inline constexpr std::uint16_t kSnapshotVersion = 1;

namespace io_detail {

template <class T>
void put_le(std::string& buf, T v) {
  auto u = std::bit_cast<std::conditional_t<sizeof(T) == 8, std::uint64_t,
                         std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>(u & 0xFF));
    u >>= 8;
  }
}

template <class T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(u);
}

}  // namespace io_detail

inline std::string encode_snapshot(const SpectralField& field) {
  const int m = field.size();
  if (field.coeffs.cols() != m) throw DimensionError("snapshot: coefficient tensor is not square");
  std::string buf(kSnapshotMagic.begin(), kSnapshotMagic.end());
  io_detail::put_le<std::uint16_t>(buf, kSnapshotVersion);
  io_detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m));
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) io_detail::put_le<double>(buf, field.coeffs(k, j));
  return buf;
}

inline SpectralField decode_snapshot(const std::string& bytes, const std::string& origin = "<snapshot>") {
  constexpr std::size_t header = 4 + 2 + 4;
  if (bytes.size() < header) throw FormatError(origin + ": truncated header");
  if (std::memcmp(bytes.data(), kSnapshotMagic.data(), 4) != 0) {
    throw FormatError(origin + ": bad magic");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto version = io_detail::get_le<std::uint16_t>(p + 4);
  if (version != kSnapshotVersion) {
    throw FormatError(origin + ": unsupported version " + std::to_string(version));
  }
  const auto m = io_detail::get_le<std::uint32_t>(p + 6);
  if (m == 0 || m > 65535) throw FormatError(origin + ": bad dimension " + std::to_string(m));
  const std::size_t count = static_cast<std::size_t>(m) * m;
  if (bytes.size() != header + 8 * count) {
    throw FormatError(origin + ": size " + std::to_string(bytes.size()) + " does not match M=" +
                      std::to_string(m));
  }
  SpectralField f = SpectralField::zeros(static_cast<int>(m));
  const unsigned char* q = p + header;
  for (std::uint32_t k = 0; k < m; ++k)
    for (std::uint32_t j = 0; j < m; ++j, q += 8) f.coeffs(k, j) = io_detail::get_le<double>(q);
  return f;
}

inline void write_snapshot(const SpectralField& field, const std::filesystem::path& path) {
  const std::string bytes = encode_snapshot(field);
  auto out = io_detail::open_out(path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  io_detail::finish(out, path);
}

inline SpectralField read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str(), path.string());
}

enum class ManifestOutcome { completed, blow_up, error };

inline std::string to_string(ManifestOutcome o) {
  switch (o) {
    case ManifestOutcome::completed: return "completed";
    case ManifestOutcome::blow_up: return "blow-up";
    default: return "error";
  }
}

/// Provenance of one CLI run, written once at the end as manifest.txt.
struct RunManifest {
  std::string command;
  ExperimentConfig config;
  std::string version = kVersion;
  std::string start_time;
  std::string end_time;
  ManifestOutcome outcome = ManifestOutcome::completed;
  std::string message;
};

inline std::string wall_clock_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline constexpr const char* kManifestName = "manifest.txt";

/// The manifest is a comment block followed by the config echo, so the file
/// itself parses back as a config.
inline void write_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  auto out = io_detail::open_out(path);
  out << "# command = " << m.command << '\n'
      << "# version = " << m.version << '\n'
      << "# seed = " << m.config.seed << '\n'
      << "# potential = " << to_string(m.config.scheme.potential.kind) << '\n'
      << "# energy_lipschitz = " << io_detail::num(m.config.scheme.energy_lipschitz) << '\n'
      << "# start = " << m.start_time << '\n'
      << "# end = " << m.end_time << '\n'
      << "# outcome = " << to_string(m.outcome) << '\n';
  if (!m.message.empty()) out << "# message = " << m.message << '\n';
  out << '\n' << echo_config(m.config);
  io_detail::finish(out, path);
}

}  // namespace sldcn
