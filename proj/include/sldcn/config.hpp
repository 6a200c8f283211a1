#pragma once

// Experiment configuration files: flat `key = value` lines grouped under
// `[section]` headers, `#` starts a comment. Unknown sections or keys are
// errors, and the physical constants have no defaults.
//
//   [experiment]    id, seed
//   [model]         epsilon, gamma, potential = quartic | truncated
//   [discretization] M, basis = legendre | dirichlet_combination
//   [scheme]        A, B, tau
//   [run]           T, initial = random | phi1, phi1_tau, record_every,
//                   snapshot_every
//   [adaptive]      rho, tol, tau_min, tau_max, tau_init (all optional)
//   [comparison]    tau_large, tau_small
//   [convergence]   taus, reference_tau, Ms, reference_M
//   [scan]          axis = A | B, taus, grid_scale, grid_count, steps

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sldcn/error.hpp"
#include "sldcn/harness.hpp"

namespace sldcn {

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"experiment", {"id", "seed"}},
      {"model", {"epsilon", "gamma", "potential"}},
      {"discretization", {"M", "basis"}},
      {"scheme", {"A", "B", "tau"}},
      {"run", {"T", "initial", "phi1_tau", "record_every", "snapshot_every"}},
      {"adaptive", {"rho", "tol", "tau_min", "tau_max", "tau_init"}},
      {"comparison", {"tau_large", "tau_small"}},
      {"convergence", {"taus", "reference_tau", "Ms", "reference_M"}},
      {"scan", {"axis", "taus", "grid_scale", "grid_count", "steps"}},
  };
  return s;
}

class Reader {
 public:
  Reader(std::map<std::string, Section> sections, std::string origin)
      : sections_(std::move(sections)), origin_(std::move(origin)) {}

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  const Entry* find(const std::string& s, const std::string& k) const {
    auto it = sections_.find(s);
    if (it == sections_.end()) return nullptr;
    auto jt = it->second.find(k);
    return jt == it->second.end() ? nullptr : &jt->second;
  }

  const Entry& require(const std::string& s, const std::string& k,
                       const std::string& label = {}) const {
    const Entry* e = find(s, k);
    if (!e) {
      throw ConfigError(origin_ + ": missing required key '" + k + "'" +
                        (label.empty() ? "" : " (" + label + ")") + " in [" + s + "]");
    }
    return *e;
  }

  [[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key + "': " + msg);
  }

  double to_double(const Entry& e, const std::string& key) const {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE) fail(e, key, "not a number: '" + e.value + "'");
    return v;
  }

  long to_long(const Entry& e, const std::string& key) const {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE) fail(e, key, "not an integer: '" + e.value + "'");
    return v;
  }

  std::uint64_t to_u64(const Entry& e, const std::string& key) const {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    if (!e.value.empty() && e.value[0] == '-') fail(e, key, "must be nonnegative");
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE) fail(e, key, "not an unsigned integer: '" + e.value + "'");
    return static_cast<std::uint64_t>(v);
  }

  std::vector<std::string> to_list(const Entry& e) const {
    std::vector<std::string> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
  }

  std::vector<double> to_doubles(const Entry& e, const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : to_list(e)) out.push_back(to_double(Entry{item, e.line}, key));
    if (out.empty()) fail(e, key, "list must not be empty");
    return out;
  }

  std::vector<int> to_ints(const Entry& e, const std::string& key) const {
    std::vector<int> out;
    for (const auto& item : to_list(e)) {
      out.push_back(static_cast<int>(to_long(Entry{item, e.line}, key)));
    }
    if (out.empty()) fail(e, key, "list must not be empty");
    return out;
  }

  double positive(const std::string& s, const std::string& k, const std::string& label = {}) const {
    const Entry& e = require(s, k, label);
    const double v = to_double(e, k);
    if (!(v > 0.0)) fail(e, k, "must be positive");
    return v;
  }

  double nonnegative(const std::string& s, const std::string& k) const {
    const Entry& e = require(s, k);
    const double v = to_double(e, k);
    if (!(v >= 0.0)) fail(e, k, "must be nonnegative");
    return v;
  }

 private:
  std::map<std::string, Section> sections_;
  std::string origin_;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

}  // namespace config_detail

/// Parses configuration text; `origin` names the source in error messages.
inline ExperimentConfig parse_config_text(const std::string& text,
                                          const std::string& origin = "<config>") {
  using namespace config_detail;
  std::map<std::string, Section> sections;
  std::istringstream in(text);
  std::string raw, current;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (!schema().count(current)) throw ConfigError(where + "unknown section [" + current + "]");
      if (sections.count(current)) throw ConfigError(where + "duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (current.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!schema().at(current).count(key)) {
      throw ConfigError(where + "unknown key '" + key + "' in [" + current + "]");
    }
    if (sections[current].count(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    sections[current][key] = Entry{value, line_no};
  }

  const Reader r(std::move(sections), origin);
  ExperimentConfig cfg;

  if (const Entry* e = r.find("experiment", "id")) cfg.id = e->value;
  if (const Entry* e = r.find("experiment", "seed")) cfg.seed = r.to_u64(*e, "seed");

  cfg.scheme.epsilon = r.positive("model", "epsilon", "ε");
  cfg.scheme.gamma = r.positive("model", "gamma", "γ");
  {
    const Entry& e = r.require("model", "potential");
    if (e.value == "quartic") cfg.scheme.potential.kind = PotentialKind::quartic;
    else if (e.value == "truncated") cfg.scheme.potential.kind = PotentialKind::truncated;
    else r.fail(e, "potential", "expected quartic or truncated");
  }

  {
    const Entry& e = r.require("discretization", "M");
    const long m = r.to_long(e, "M");
    if (m < 1) r.fail(e, "M", "must be >= 1");
    cfg.M = static_cast<int>(m);
  }
  if (const Entry* e = r.find("discretization", "basis")) {
    if (e->value == "legendre") cfg.basis = BasisKind::legendre;
    else if (e->value == "dirichlet_combination") cfg.basis = BasisKind::dirichlet_combination;
    else r.fail(*e, "basis", "expected legendre or dirichlet_combination");
  }

  if (r.has_section("scan")) {
    ScanConfig scan;
    {
      const Entry& e = r.require("scan", "axis");
      if (e.value == "A") scan.axis = ScanAxis::A;
      else if (e.value == "B") scan.axis = ScanAxis::B;
      else r.fail(e, "axis", "expected A or B");
    }
    scan.taus = r.to_doubles(r.require("scan", "taus"), "taus");
    for (double t : scan.taus) {
      if (!(t > 0.0)) r.fail(r.require("scan", "taus"), "taus", "must be positive");
    }
    scan.grid_scale = r.positive("scan", "grid_scale");
    {
      const Entry& e = r.require("scan", "grid_count");
      const long n = r.to_long(e, "grid_count");
      if (n < 0) r.fail(e, "grid_count", "must be nonnegative");
      scan.grid_count = static_cast<int>(n);
    }
    if (const Entry* e = r.find("scan", "steps")) {
      scan.steps = r.to_long(*e, "steps");
      if (scan.steps < 1) r.fail(*e, "steps", "must be >= 1");
    }
    // the scanned constant and the step come from the scan itself
    cfg.scheme.tau = scan.taus.front();
    if (scan.axis == ScanAxis::A) {
      cfg.scheme.B = r.nonnegative("scheme", "B");
      if (r.find("scheme", "A")) cfg.scheme.A = r.nonnegative("scheme", "A");
    } else {
      cfg.scheme.A = r.nonnegative("scheme", "A");
      if (r.find("scheme", "B")) cfg.scheme.B = r.nonnegative("scheme", "B");
    }
    if (r.find("scheme", "tau")) cfg.scheme.tau = r.positive("scheme", "tau", "τ");
    cfg.scan = scan;
  } else {
    cfg.scheme.A = r.nonnegative("scheme", "A");
    cfg.scheme.B = r.nonnegative("scheme", "B");
    cfg.scheme.tau = r.positive("scheme", "tau", "τ");
  }

  if (r.find("run", "T")) cfg.T = r.positive("run", "T");
  if (const Entry* e = r.find("run", "initial")) {
    if (e->value == "random") cfg.initial = InitialKind::random;
    else if (e->value == "phi1") cfg.initial = InitialKind::phi1;
    else r.fail(*e, "initial", "expected random or phi1");
  }
  if (cfg.initial == InitialKind::phi1) cfg.phi1_tau = r.positive("run", "phi1_tau");
  else if (r.find("run", "phi1_tau")) cfg.phi1_tau = r.positive("run", "phi1_tau");
  if (const Entry* e = r.find("run", "record_every")) {
    cfg.record_every = r.to_long(*e, "record_every");
    if (cfg.record_every < 0) r.fail(*e, "record_every", "must be nonnegative");
  }
  if (const Entry* e = r.find("run", "snapshot_every")) {
    cfg.snapshot_every = r.to_long(*e, "snapshot_every");
    if (cfg.snapshot_every < 0) r.fail(*e, "snapshot_every", "must be nonnegative");
  }

  if (r.has_section("adaptive")) {
    AdaptiveConfig a;
    if (r.find("adaptive", "rho")) a.rho = r.positive("adaptive", "rho");
    if (r.find("adaptive", "tol")) a.tol = r.positive("adaptive", "tol");
    if (r.find("adaptive", "tau_min")) a.tau_min = r.positive("adaptive", "tau_min");
    if (r.find("adaptive", "tau_max")) a.tau_max = r.positive("adaptive", "tau_max");
    if (r.find("adaptive", "tau_init")) a.tau_init = r.positive("adaptive", "tau_init");
    a.validate();
    cfg.adaptive = a;
  }
  if (r.has_section("comparison")) {
    ComparisonConfig c;
    c.tau_large = r.positive("comparison", "tau_large");
    c.tau_small = r.positive("comparison", "tau_small");
    cfg.comparison = c;
  }
  if (const Entry* e = r.find("convergence", "taus")) {
    cfg.taus = r.to_doubles(*e, "taus");
    for (double t : cfg.taus) {
      if (!(t > 0.0)) r.fail(*e, "taus", "must be positive");
    }
  }
  if (r.find("convergence", "reference_tau")) {
    cfg.reference_tau = r.positive("convergence", "reference_tau");
  }
  if (const Entry* e = r.find("convergence", "Ms")) cfg.Ms = r.to_ints(*e, "Ms");
  if (const Entry* e = r.find("convergence", "reference_M")) {
    cfg.reference_M = static_cast<int>(r.to_long(*e, "reference_M"));
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// Canonical text form; parse_config_text(echo_config(c)) == c.
inline std::string echo_config(const ExperimentConfig& c) {
  using config_detail::format_double;
  using config_detail::join;
  std::ostringstream o;
  o << "[experiment]\nid = " << c.id << "\nseed = " << c.seed << "\n\n";
  o << "[model]\nepsilon = " << format_double(c.scheme.epsilon)
    << "\ngamma = " << format_double(c.scheme.gamma)
    << "\npotential = " << to_string(c.scheme.potential.kind) << "\n\n";
  o << "[discretization]\nM = " << c.M << "\nbasis = " << to_string(c.basis) << "\n\n";
  o << "[scheme]\nA = " << format_double(c.scheme.A) << "\nB = " << format_double(c.scheme.B)
    << "\ntau = " << format_double(c.scheme.tau) << "\n\n";
  o << "[run]\n";
  if (c.T > 0.0) o << "T = " << format_double(c.T) << "\n";
  o << "initial = " << to_string(c.initial) << "\n";
  if (c.phi1_tau > 0.0) o << "phi1_tau = " << format_double(c.phi1_tau) << "\n";
  o << "record_every = " << c.record_every << "\nsnapshot_every = " << c.snapshot_every << "\n";
  if (c.adaptive) {
    const auto& a = *c.adaptive;
    o << "\n[adaptive]\nrho = " << format_double(a.rho) << "\ntol = " << format_double(a.tol)
      << "\ntau_min = " << format_double(a.tau_min) << "\ntau_max = " << format_double(a.tau_max)
      << "\ntau_init = " << format_double(a.tau_init) << "\n";
  }
  if (c.comparison) {
    o << "\n[comparison]\ntau_large = " << format_double(c.comparison->tau_large)
      << "\ntau_small = " << format_double(c.comparison->tau_small) << "\n";
  }
  if (!c.taus.empty() || c.reference_tau > 0.0 || !c.Ms.empty() || c.reference_M != 0) {
    o << "\n[convergence]\n";
    if (!c.taus.empty()) o << "taus = " << join(c.taus, format_double) << "\n";
    if (c.reference_tau > 0.0) o << "reference_tau = " << format_double(c.reference_tau) << "\n";
    if (!c.Ms.empty()) {
      o << "Ms = " << join(c.Ms, [](int m) { return std::to_string(m); }) << "\n";
    }
    if (c.reference_M != 0) o << "reference_M = " << c.reference_M << "\n";
  }
  if (c.scan) {
    const auto& s = *c.scan;
    o << "\n[scan]\naxis = " << to_string(s.axis) << "\ntaus = " << join(s.taus, format_double)
      << "\ngrid_scale = " << format_double(s.grid_scale) << "\ngrid_count = " << s.grid_count
      << "\nsteps = " << s.steps << "\n";
  }
  return o.str();
}

}  // namespace sldcn
