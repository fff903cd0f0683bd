#pragma once

// Run configuration, orchestration of single runs and viscosity sweeps, and
// CSV/text report emission.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <locale>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sphvisc/control_params.hpp"
#include "sphvisc/density_floor.hpp"
#include "sphvisc/entropy_analysis.hpp"
#include "sphvisc/errors.hpp"
#include "sphvisc/field.hpp"
#include "sphvisc/gas_core.hpp"
#include "sphvisc/initial_data.hpp"
#include "sphvisc/invariant_monitor.hpp"
#include "sphvisc/viscous_solver.hpp"

namespace sphvisc {

inline constexpr const char* kVersion = "1.0.0";

enum class Scenario { exterior, origin, generic };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::exterior: return "exterior";
    case Scenario::origin: return "origin";
    case Scenario::generic: return "generic";
  }
  return "?";
}

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "exterior") return Scenario::exterior;
  if (s == "origin") return Scenario::origin;
  if (s == "generic") return Scenario::generic;
  throw ConfigError("unknown scenario '" + s + "' (exterior, origin, generic)");
}

struct RunConfig {
  std::string name = "run";
  Scenario scenario = Scenario::exterior;
  double t_end = 0.5;
  std::size_t outputs = 50;
  std::uint64_t seed = 1;

  double gamma = 2.0;

  int N_dim = 3;
  double eps = 1e-2;
  double M1 = 0.0;  // 0: chosen automatically
  double M2 = 1.0;
  double M3 = 1.0;
  double C = 0.0;   // 0: chosen automatically
  std::string alpha = "min";  // min | mid | max | number
  double c = 0.0;

  double cfl = 0.4;
  std::size_t nx = 400;
  double x_lo = 0.0;  // 0: 1 (exterior) or a(eps) (origin)
  double x_hi = 0.0;  // 0: b(eps)
  bool extra_visc_term = true;
  double dx_over_eps = 0.25;  // grid coupling used by sweeps

  std::string profile = "constant";
  std::string profile_table;
  ProfileParams profile_params;

  double tol_atol = 1e-8;
  double tol_K = 10.0;

  bool diag_entropy = false;
  bool diag_floor = false;
  bool diag_dissipation = false;
  std::size_t floor_nodes = 200;
  double floor_tol = 0.05;
  double K_visc = 10.0;
  double K_dx = 10.0;
  // Dissipation window as fractions of the domain and of [0, t_end].
  double win_x0 = 0.1, win_x1 = 0.5, win_t0 = 0.2, win_t1 = 1.0;
};

// ---------------------------------------------------------------------------
// Serialization and hashing

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12) << v;
  return os.str();
}
inline std::string fmt17(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}
}  // namespace detail

/// Canonical INI text; parse_config(to_ini(c)) reproduces c.
inline std::string to_ini(const RunConfig& c) {
  using detail::fmt;
  std::ostringstream os;
  os << "[run]\nname = " << c.name << "\nscenario = " << to_string(c.scenario) << "\nt_end = " << fmt(c.t_end)
     << "\noutputs = " << c.outputs << "\nseed = " << c.seed << "\n\n";
  os << "[eos]\ngamma = " << fmt(c.gamma) << "\n\n";
  os << "[control]\nN = " << c.N_dim << "\neps = " << fmt(c.eps) << "\nM1 = " << fmt(c.M1) << "\nM2 = " << fmt(c.M2)
     << "\nM3 = " << fmt(c.M3) << "\nC = " << fmt(c.C) << "\nalpha = " << c.alpha << "\nc = " << fmt(c.c) << "\n\n";
  os << "[solver]\ncfl = " << fmt(c.cfl) << "\nnx = " << c.nx << "\nx_lo = " << fmt(c.x_lo) << "\nx_hi = " << fmt(c.x_hi)
     << "\nextra_visc_term = " << (c.extra_visc_term ? "true" : "false") << "\ndx_over_eps = " << fmt(c.dx_over_eps)
     << "\n\n";
  os << "[profile]\nname = " << c.profile << "\n";
  if (!c.profile_table.empty()) os << "table = " << c.profile_table << "\n";
  for (const auto& [k, v] : c.profile_params) os << k << " = " << fmt(v) << "\n";
  os << "\n[monitor]\natol = " << fmt(c.tol_atol) << "\nK = " << fmt(c.tol_K) << "\n\n";
  os << "[diagnostics]\nentropy = " << (c.diag_entropy ? "true" : "false")
     << "\nfloor = " << (c.diag_floor ? "true" : "false")
     << "\ndissipation = " << (c.diag_dissipation ? "true" : "false") << "\nfloor_nodes = " << c.floor_nodes
     << "\nfloor_tol = " << fmt(c.floor_tol) << "\nK_visc = " << fmt(c.K_visc) << "\nK_dx = " << fmt(c.K_dx)
     << "\nwindow_x0 = " << fmt(c.win_x0) << "\nwindow_x1 = " << fmt(c.win_x1) << "\nwindow_t0 = " << fmt(c.win_t0)
     << "\nwindow_t1 = " << fmt(c.win_t1) << "\n";
  return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(to_ini(c));
  return os.str();
}

namespace detail {
inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("expected a boolean, got '" + s + "'");
}
inline double parse_double(const std::string& key, const std::string& s) {
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  double v;
  if (!(is >> v)) throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
  std::string rest;
  if (is >> rest) throw ConfigError("key '" + key + "': trailing text '" + rest + "'");
  return v;
}
}  // namespace detail

inline RunConfig parse_config_tree(const boost::property_tree::ptree& pt) {
  RunConfig c;
  auto str = [&](const std::string& path, const std::string& def) { return pt.get<std::string>(path, def); };
  auto num = [&](const std::string& path, double def) {
    const auto v = pt.get_optional<std::string>(path);
    return v ? detail::parse_double(path, *v) : def;
  };
  auto count = [&](const std::string& path, std::size_t def) {
    const double v = num(path, static_cast<double>(def));
    if (v < 0 || v != std::floor(v)) throw ConfigError("key '" + path + "': expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  };
  auto flag = [&](const std::string& path, bool def) {
    const auto v = pt.get_optional<std::string>(path);
    return v ? detail::parse_bool(*v) : def;
  };
  c.name = str("run.name", c.name);
  c.scenario = scenario_from_string(str("run.scenario", "exterior"));
  c.t_end = num("run.t_end", c.t_end);
  c.outputs = count("run.outputs", c.outputs);
  c.seed = count("run.seed", c.seed);
  c.gamma = num("eos.gamma", c.gamma);
  c.N_dim = static_cast<int>(count("control.N", static_cast<std::size_t>(c.N_dim)));
  c.eps = num("control.eps", c.eps);
  c.M1 = num("control.M1", c.M1);
  c.M2 = num("control.M2", c.M2);
  c.M3 = num("control.M3", c.M3);
  c.C = num("control.C", c.C);
  c.alpha = str("control.alpha", c.alpha);
  c.c = num("control.c", c.c);
  c.cfl = num("solver.cfl", c.cfl);
  c.nx = count("solver.nx", c.nx);
  c.x_lo = num("solver.x_lo", c.x_lo);
  c.x_hi = num("solver.x_hi", c.x_hi);
  c.extra_visc_term = flag("solver.extra_visc_term", c.extra_visc_term);
  c.dx_over_eps = num("solver.dx_over_eps", c.dx_over_eps);
  c.profile = str("profile.name", c.profile);
  c.profile_table = str("profile.table", "");
  if (const auto prof = pt.get_child_optional("profile")) {
    for (const auto& [k, v] : *prof) {
      if (k == "name" || k == "table") continue;
      c.profile_params[k] = detail::parse_double("profile." + k, v.data());
    }
  }
  c.tol_atol = num("monitor.atol", c.tol_atol);
  c.tol_K = num("monitor.K", c.tol_K);
  c.diag_entropy = flag("diagnostics.entropy", c.diag_entropy);
  c.diag_floor = flag("diagnostics.floor", c.diag_floor);
  c.diag_dissipation = flag("diagnostics.dissipation", c.diag_dissipation);
  c.floor_nodes = count("diagnostics.floor_nodes", c.floor_nodes);
  c.floor_tol = num("diagnostics.floor_tol", c.floor_tol);
  c.K_visc = num("diagnostics.K_visc", c.K_visc);
  c.K_dx = num("diagnostics.K_dx", c.K_dx);
  c.win_x0 = num("diagnostics.window_x0", c.win_x0);
  c.win_x1 = num("diagnostics.window_x1", c.win_x1);
  c.win_t0 = num("diagnostics.window_t0", c.win_t0);
  c.win_t1 = num("diagnostics.window_t1", c.win_t1);
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config_tree(pt);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Resolved parameters

struct ResolvedRun {
  EosParams eos;
  ControlParams ctrl;
  Grid1D grid;
  SolverConfig solver;
};

inline double resolve_alpha(const RunConfig& c, const EosParams& eos) {
  const AlphaBounds ab = alpha_bounds(c.N_dim, eos);
  if (c.alpha == "min") return ab.min;
  if (c.alpha == "max") {
    if (ab.max_infinite) throw ConfigError("alpha = max is unbounded for gamma = 3");
    return ab.max;
  }
  if (c.alpha == "mid") {
    if (ab.max_infinite) throw ConfigError("alpha = mid is unbounded for gamma = 3");
    return 0.5 * (ab.min + ab.max);
  }
  return detail::parse_double("control.alpha", c.alpha);
}

/// Validates a configuration and resolves automatic choices (alpha, M1, C, domain, d).
inline ResolvedRun resolve(const RunConfig& c) {
  if (!(c.t_end > 0.0)) throw ConfigError("run.t_end must be positive");
  if (c.outputs < 1) throw ConfigError("run.outputs must be at least 1");
  if (c.nx < 3) throw ConfigError("solver.nx must be at least 3");
  if (!(c.eps > 0.0)) throw ConfigError("control.eps must be positive");
  if (!(c.cfl > 0.0 && c.cfl <= 0.9)) throw ConfigError("solver.cfl must lie in (0, 0.9]");
  if (c.N_dim < 2) throw ConfigError("control.N must be at least 2");
  ResolvedRun r;
  try {
    r.eos = EosParams::from_gamma(c.gamma);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  r.ctrl.eps = c.eps;
  r.ctrl.N_dim = c.N_dim;
  r.ctrl.M2 = c.M2;
  r.ctrl.M3 = c.M3;
  if (c.scenario == Scenario::exterior || c.scenario == Scenario::generic) {
    if (!(c.gamma > 1.0 && c.gamma <= 3.0)) throw ConfigError("exterior runs require 1 < gamma <= 3");
    const AlphaBounds ab = alpha_bounds(c.N_dim, r.eos);
    const double alpha = resolve_alpha(c, r.eos);
    if (!ab.contains(alpha)) {
      std::ostringstream os;
      os << "alpha = " << alpha << " violates (N-1) theta/(1+sqrt(theta))^2 <= alpha <= (N-1) theta/(1-sqrt(theta))^2, i.e. "
         << ab.min << " <= alpha <= " << ab.max;
      throw ConfigError(os.str());
    }
    r.ctrl.alpha = alpha;
    if (!(c.M2 > 0.0)) throw ConfigError("control.M2 must be positive");
    const ChosenConstants cc = sufficient_constants(c.M2, r.eos, c.N_dim, alpha);
    r.ctrl.M1 = c.M1 > 0.0 ? c.M1 : cc.M1;
    r.ctrl.C = c.C > 0.0 ? c.C : cc.C;
    if (!(r.ctrl.M1 > r.ctrl.M2)) throw ConfigError("control.M1 must exceed M2");
    const double lo = c.x_lo > 0.0 ? c.x_lo : 1.0;
    if (c.scenario == Scenario::exterior && lo != 1.0) throw ConfigError("exterior runs start at x = 1");
    const double hi = c.x_hi > 0.0 ? c.x_hi : default_outer_radius(c.eps);
    r.grid = Grid1D(lo, hi, c.nx);
  } else {
    if (!(c.c >= 0.0)) throw ConfigError("control.c must be nonnegative");
    r.ctrl.c = c.c;
    r.ctrl.couple_decay_rates(r.eos.theta);
    const double lo = c.x_lo > 0.0 ? c.x_lo : default_inner_radius(c.eps);
    const double hi = c.x_hi > 0.0 ? c.x_hi : default_outer_radius(c.eps);
    if (!(hi > lo && lo > 0.0)) throw ConfigError("origin runs need 0 < x_lo < x_hi");
    r.grid = Grid1D(lo, hi, c.nx);
  }
  r.solver.eps = c.eps;
  r.solver.cfl = c.cfl;
  r.solver.N_dim = c.N_dim;
  r.solver.t_end = c.t_end;
  r.solver.extra_visc_term = c.extra_visc_term;
  return r;
}

// ---------------------------------------------------------------------------
// Reports

struct DiagnosticRow {
  std::string diagnostic;
  std::string phi_id;
  std::string pair_id;
  double value = 0.0;
  double tolerance = 0.0;
  bool verdict = true;
  bool informational = false;
};

struct RunReport {
  RunConfig config;
  ResolvedRun resolved;
  std::string hash;
  std::string version = kVersion;
  std::vector<MonitorReport> monitor;
  std::vector<DiagnosticRow> diagnostics;
  std::vector<FloorRow> floor;
  std::vector<std::string> warnings;
  Trajectory trajectory;
  double wall_clock = 0.0;
  bool verdict = false;

  bool strict_verdict() const { return verdict && warnings.empty(); }
};

/// Monitor tolerance atol + K dx^2.
inline double monitor_tolerance(const RunConfig& c, double dx) { return c.tol_atol + c.tol_K * dx * dx; }

// ---------------------------------------------------------------------------
// Generic 2x2 maximum-principle cases

/// Randomized coefficients satisfying the sign conditions (or violating the a12 condition).
struct GenericCase {
  GenericCoeffs coeffs;
  std::function<double(double)> p0, q0;
  std::string description;
};

inline GenericCase random_generic_case(std::uint64_t seed, bool violate_coupling = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double m1 = 2.0 * U(rng) - 1.0, m2 = 2.0 * U(rng) - 1.0, k1 = 1.0 + 4.0 * U(rng), k2 = 1.0 + 4.0 * U(rng);
  const double d11 = 2.0 * U(rng) - 1.0, d22 = 2.0 * U(rng) - 1.0;
  const double c12 = 0.2 + U(rng), c21 = 0.2 + U(rng);
  const double r1 = 0.5 * U(rng), r2 = 0.5 * U(rng), n1 = 1.0 + 3.0 * U(rng), n2 = 1.0 + 3.0 * U(rng);
  const double g1 = U(rng), g2 = U(rng);
  const double pa = 0.2 + U(rng), qa = 0.2 + U(rng);
  GenericCase gc;
  gc.coeffs.mu1 = [=](const CoeffArgs& a) { return m1 * std::cos(k1 * a.x + a.t); };
  gc.coeffs.mu2 = [=](const CoeffArgs& a) { return m2 * std::sin(k2 * a.x - a.t); };
  gc.coeffs.a11 = [=](const CoeffArgs& a) { return d11 * std::cos(a.x * a.t); };
  gc.coeffs.a22 = [=](const CoeffArgs& a) { return d22 * std::sin(a.x + a.t); };
  if (violate_coupling) {
    gc.coeffs.a12 = [=](const CoeffArgs&) { return 5.0 + c12; };
  } else {
    gc.coeffs.a12 = [=](const CoeffArgs& a) { return -c12 * (1.0 + 0.5 * std::sin(a.x - a.t)) * (1.0 + a.q * a.q); };
  }
  gc.coeffs.a21 = [=](const CoeffArgs& a) { return -c21 * (1.0 + 0.5 * std::cos(a.x + a.t)); };
  // R1 <= 0 at p = 0 and R2 >= 0 at q = 0; both vanish on parts of the domain.
  gc.coeffs.r1 = [=](const CoeffArgs& a) {
    const double s = std::max(0.0, std::sin(n1 * M_PI * a.x));
    return -r1 * s * s * (1.0 + a.q_x * a.q_x) + g1 * a.p * a.q;
  };
  gc.coeffs.r2 = [=](const CoeffArgs& a) {
    const double s = std::max(0.0, std::cos(n2 * M_PI * a.x));
    return r2 * s * s * (1.0 + a.p_x * a.p_x) + g2 * a.p * a.q;
  };
  gc.p0 = [=](double x) { return violate_coupling ? 0.0 : -pa * std::sin(M_PI * x) * std::sin(M_PI * x); };
  gc.q0 = [=](double x) { return qa * std::sin(2.0 * M_PI * x) * std::sin(2.0 * M_PI * x); };
  gc.description = violate_coupling ? "coupling-violating" : "sign-compliant";
  return gc;
}

struct GenericRunResult {
  double max_p = -std::numeric_limits<double>::infinity();
  double min_q = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
  PQField final;

  /// max(p_+, q_-) over the run.
  double violation() const { return std::max({0.0, max_p, -min_q}); }
};

/// Integrates a generic case on [0, 1] with zero Dirichlet data up to t_end.
inline GenericRunResult run_generic(const GenericCase& gc, std::size_t nx, double t_end, double cfl = 0.4) {
  const Grid1D g(0.0, 1.0, nx);
  PQField f(g);
  for (std::size_t i = 0; i < nx; ++i) f[i] = {gc.p0(g.x(i)), gc.q0(g.x(i))};
  f[0] = f[nx - 1] = {0.0, 0.0};
  // |mu| <= 1 and |a_ij| bounded by the construction; the diffusive limit dominates here.
  const double dt0 = generic_stable_dt(g, 1.0, 1.0, 8.0, cfl);
  const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt0));
  const double dt = t_end / static_cast<double>(steps);
  GenericRunResult r;
  auto track = [&](const PQField& u) {
    for (const PQ& v : u.data) {
      r.max_p = std::max(r.max_p, v.p);
      r.min_q = std::min(r.min_q, v.q);
    }
  };
  track(f);
  for (std::size_t k = 0; k < steps; ++k) {
    f = step_generic(f, gc.coeffs, 1.0, dt);
    track(f);
  }
  r.steps = steps;
  r.final = f;
  return r;
}

// ---------------------------------------------------------------------------
// Single run

namespace detail {
inline std::size_t worker_count() {
  if (const char* env = std::getenv("SPHVISC_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Runs f(i) for i in [0, n) on up to `workers` threads; rethrows the first exception.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& f) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

inline std::string stage_error(const std::string& stage, const std::exception& e) {
  return "stage '" + stage + "': " + e.what();
}
}  // namespace detail

struct RunOptions {
  bool keep_trajectory = true;
};

/// Initial field in physical variables and its Dirichlet data.
inline MollifiedData initial_state(const RunConfig& c, const ResolvedRun& r) {
  const InitialProfile prof = make_profile(c.profile, c.profile_params, r.eos, r.ctrl, c.profile_table);
  if (c.scenario == Scenario::origin) {
    MollifiedData m = mollify_origin(prof, r.eos, c.eps, r.grid, r.ctrl);
    m.field = unscale_field(m.field, r.ctrl);
    m.boundary = {m.field.data.front(), m.field.data.back()};
    return m;
  }
  return mollify_exterior(prof, r.eos, c.eps, r.grid);
}

inline RunReport run(const RunConfig& config, const RunOptions& opt = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = config;
  rep.hash = config_hash(config);
  if (config.scenario == Scenario::generic) throw ConfigError("generic scenario runs through run_generic_config");
  try {
    rep.resolved = resolve(config);
  } catch (const Error& e) {
    throw ConfigError(detail::stage_error("validate", e));
  }
  const ResolvedRun& r = rep.resolved;
  const bool origin = config.scenario == Scenario::origin;

  MollifiedData init;
  try {
    init = initial_state(config, r);
  } catch (const Error& e) {
    throw Error(detail::stage_error("initial data", e));
  }
  SolverConfig scfg = r.solver;
  scfg.boundary = init.boundary;
  if (origin) scfg.extra_visc_term = false;
  GasStepper stepper(origin ? GasSystem::scaled_origin : GasSystem::exterior, r.grid, r.eos, scfg, r.ctrl);

  const double dx = r.grid.dx();
  const double tol = monitor_tolerance(config, dx);
  OriginMonitorOptions omo;
  omo.tol = tol;
  if (origin) {
    double z_min = 0.0;
    const GasField scaled = scale_field(init.field, r.ctrl);
    for (const GasState& s : scaled.data) z_min = std::min(z_min, s.mom / s.rho - pow_fast(s.rho, r.eos.theta));
    omo.z_floor = -z_min;
  } else {
    const AdmissibilityReport adm = check_admissible_exterior(init.field, r.ctrl, r.eos, tol);
    rep.diagnostics.push_back({"admissible_initial", "-", "-", std::min(adm.min_w_margin, adm.min_z_margin), tol,
                               adm.verdict, false});
  }
  auto monitor = [&](const GasField& f) {
    MonitorReport m = origin ? monitor_origin(f, r.ctrl, r.eos, omo) : monitor_exterior(f, r.ctrl, r.eos, tol);
    if (m.control_expired) {
      std::ostringstream os;
      os << "control expired at t = " << f.time << " (sqrt(eps) e^(C t) > 1)";
      if (rep.warnings.empty() || rep.warnings.back() != os.str()) rep.warnings.push_back(os.str());
    }
    rep.monitor.push_back(m);
  };

  Trajectory& traj = rep.trajectory;
  traj.eos = r.eos;
  traj.ctrl = r.ctrl;
  traj.eps = config.eps;
  traj.system = origin ? GasSystem::scaled_origin : GasSystem::exterior;
  GasField f = init.field;
  f.time = 0.0;
  monitor(f);
  traj.snapshots.push_back(f);
  try {
    for (std::size_t k = 1; k <= config.outputs; ++k) {
      const double target = config.t_end * static_cast<double>(k) / static_cast<double>(config.outputs);
      stepper.advance_to(f, target);
      monitor(f);
      if (opt.keep_trajectory || k == config.outputs) traj.snapshots.push_back(f);
    }
  } catch (const Error& e) {
    throw Error(detail::stage_error("time stepping", e));
  }
  if (!opt.keep_trajectory && traj.snapshots.size() > 2) traj.snapshots.erase(traj.snapshots.begin() + 1, traj.snapshots.end() - 1);

  try {
    const Grid1D& g = r.grid;
    if (config.diag_entropy && traj.snapshots.size() >= 3) {
      const auto phis = standard_test_functions(g.x_lo, g.x_hi, 0.0, config.t_end);
      std::vector<EntropyPairSpec> pairs{mechanical_pair()};
      for (auto& gen : g_family()) pairs.push_back(weak_pair(gen));
      const double etol = config.K_visc * config.eps + config.K_dx * dx * dx;
      for (const auto& phi : phis) {
        const WeakResidual wr = weak_residual(traj, phi);
        rep.diagnostics.push_back({"weak_residual", phi.id, "mass", wr.mass, 0.0, true, true});
        rep.diagnostics.push_back({"weak_residual", phi.id, "momentum", wr.momentum, 0.0, true, true});
        for (const auto& pair : pairs) {
          if (!pair.mechanical && r.eos.gamma >= 3.0) continue;
          const double D = entropy_production(traj, pair, phi);
          const bool info = !pair.mechanical && !pair.gen.convex;
          rep.diagnostics.push_back({"entropy_production", phi.id, pair.id, D, etol, info || D >= -etol, info});
        }
      }
    }
    if (config.diag_dissipation && traj.snapshots.size() >= 3) {
      const double L = g.x_hi - g.x_lo;
      const Window w{g.x_lo + config.win_x0 * L, g.x_lo + config.win_x1 * L, config.win_t0 * config.t_end,
                     config.win_t1 * config.t_end};
      rep.diagnostics.push_back({"dissipation_integral", "window", "mechanical", dissipation_integral(traj, w), 0.0,
                                 true, true});
    }
    if (config.diag_floor) {
      FloorOptions fo;
      fo.nodes = config.floor_nodes;
      fo.tol = config.floor_tol;
      const FloorReport fr = density_floor_of_run(traj, fo);
      rep.floor = fr.rows;
      const double mtol = 5.0 * (std::pow((fr.heat.grid.x_hi - fr.heat.grid.x_lo) / double(fo.nodes - 1), 2) + 1e-8);
      rep.diagnostics.push_back({"floor_mismatch", "-", "-", fr.mismatch, mtol, fr.mismatch < mtol, false});
      rep.diagnostics.push_back({"floor_min_w1", "-", "-", fr.min_w1, 1e-8, fr.min_w1 >= -1e-8, false});
      rep.diagnostics.push_back({"floor_proof_bound", "-", "-", fr.proof_floor, 0.0, true, true});
    }
  } catch (const Error& e) {
    throw Error(detail::stage_error("diagnostics", e));
  }

  bool ok = true;
  for (const auto& m : rep.monitor) ok = ok && m.verdict;
  for (const auto& d : rep.diagnostics) ok = ok && d.verdict;
  for (const auto& fl : rep.floor) ok = ok && fl.verdict;
  rep.verdict = ok;
  rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepReport {
  std::vector<RunReport> runs;
  CauchyTable cauchy;
  std::vector<double> dissipation;
  double dissipation_ratio = 0.0;
  std::vector<double> entropy_K;  // per member: max(0, -min D) / (eps + dx^2)
  double entropy_K_ratio = 0.0;
  std::vector<double> weak_residual;  // per member: sum over test functions of |residual|
  double weak_order = 0.0;
  bool verdict = false;
};

/// Sweep members: same configuration with eps replaced and dx = dx_over_eps * eps on a fixed domain.
inline std::vector<RunConfig> sweep_members(const RunConfig& base, const std::vector<double>& eps_list) {
  if (eps_list.size() < 3) throw ConfigError("sweep needs at least three viscosities");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("sweep viscosities must be strictly decreasing");
  RunConfig fixed = base;
  const double e0 = eps_list.front();
  const bool origin = base.scenario == Scenario::origin;
  if (fixed.x_lo <= 0.0) fixed.x_lo = origin ? default_inner_radius(e0) : 1.0;
  if (fixed.x_hi <= 0.0) fixed.x_hi = default_outer_radius(e0);
  std::vector<RunConfig> out;
  for (double e : eps_list) {
    RunConfig c = fixed;
    c.eps = e;
    c.name = base.name + "-eps" + detail::fmt(e);
    const double dx = base.dx_over_eps * e;
    c.nx = static_cast<std::size_t>(std::ceil((c.x_hi - c.x_lo) / dx)) + 1;
    out.push_back(c);
  }
  return out;
}

/// Entropy-production constant K = max(0, -min D) / (eps + dx^2) over the test functions and convex pairs.
inline double entropy_constant(const Trajectory& traj, double* min_D = nullptr) {
  const Grid1D& g = traj.grid();
  const auto phis = standard_test_functions(g.x_lo, g.x_hi, traj.t_begin(), traj.t_end());
  std::vector<EntropyPairSpec> pairs{mechanical_pair()};
  for (auto& gen : g_family())
    if (gen.convex) pairs.push_back(weak_pair(gen));
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& phi : phis)
    for (const auto& pair : pairs) mn = std::min(mn, entropy_production(traj, pair, phi));
  if (min_D) *min_D = mn;
  const double dx = g.dx();
  return std::max(0.0, -mn) / (traj.eps + dx * dx);
}

inline double weak_residual_total(const Trajectory& traj) {
  const Grid1D& g = traj.grid();
  double s = 0.0;
  for (const auto& phi : standard_test_functions(g.x_lo, g.x_hi, traj.t_begin(), traj.t_end()))
    s += weak_residual(traj, phi).magnitude();
  return s;
}

/// Ratio max/min of a positive sequence; 1 when all entries vanish.
inline double spread_ratio(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  const double mn = *std::min_element(v.begin(), v.end());
  if (mx <= 0.0) return 1.0;
  if (mn <= 0.0) return std::numeric_limits<double>::infinity();
  return mx / mn;
}

inline SweepReport sweep(const RunConfig& base, const std::vector<double>& eps_list) {
  const auto members = sweep_members(base, eps_list);
  SweepReport rep;
  rep.runs.resize(members.size());
  detail::parallel_for(members.size(), detail::worker_count(), [&](std::size_t i) { rep.runs[i] = run(members[i]); });
  std::vector<Trajectory> trajs;
  for (const auto& r : rep.runs) trajs.push_back(r.trajectory);
  const Grid1D& g = trajs.front().grid();
  const double L = g.x_hi - g.x_lo;
  const Window w{g.x_lo + base.win_x0 * L, g.x_lo + base.win_x1 * L, base.win_t0 * base.t_end, base.win_t1 * base.t_end};
  rep.cauchy = convergence_study(trajs, w, 1.0);
  rep.dissipation.resize(trajs.size());
  rep.entropy_K.resize(trajs.size());
  rep.weak_residual.resize(trajs.size());
  detail::parallel_for(trajs.size(), detail::worker_count(), [&](std::size_t i) {
    rep.dissipation[i] = dissipation_integral(trajs[i], w);
    rep.entropy_K[i] = entropy_constant(trajs[i]);
    rep.weak_residual[i] = weak_residual_total(trajs[i]);
  });
  rep.dissipation_ratio = spread_ratio(rep.dissipation);
  rep.entropy_K_ratio = spread_ratio(rep.entropy_K);
  rep.weak_order = log_log_slope(eps_list, rep.weak_residual);
  rep.verdict = rep.cauchy.decreasing && rep.dissipation_ratio <= 3.0 && rep.entropy_K_ratio <= 2.0;
  for (const auto& r : rep.runs) rep.verdict = rep.verdict && r.verdict;
  return rep;
}

// ---------------------------------------------------------------------------
// Bundled fixtures

inline std::vector<std::string> fixture_names() {
  return {"exterior-rest", "exterior-inward", "exterior-blast", "origin-blast-c1"};
}

inline RunConfig fixture(const std::string& name) {
  RunConfig c;
  c.name = name;
  c.gamma = 2.0;
  c.N_dim = 3;
  c.eps = 1e-2;
  c.alpha = "min";
  c.M2 = 1.0;
  c.t_end = 0.5;
  c.outputs = 150;
  if (name == "exterior-rest") {
    c.profile = "constant";
    c.profile_params = {{"rho", 0.1}, {"u", 0.0}};
    c.nx = 400;
    c.x_hi = 11.0;
  } else if (name == "exterior-inward") {
    c.profile = "inward";
    c.nx = 400;
    c.x_hi = 11.0;
  } else if (name == "exterior-blast") {
    c.profile = "blast";
    c.profile_params = {{"s_in", 0.8}, {"s_bg", 0.3}, {"U", 0.5}, {"x_s", 2.0}, {"delta", 0.1}, {"ell", 0.2}};
    c.nx = 400;
    c.x_hi = 11.0;
    c.win_x0 = 0.05;
    c.win_x1 = 0.3;
  } else if (name == "origin-blast-c1") {
    c.scenario = Scenario::origin;
    c.c = 1.0;
    c.M3 = 2.0;
    c.profile = "power_blast";
    c.profile_params = {{"A", 0.5}, {"k", 8.0}, {"U", 0.2}};
    c.nx = 800;
    c.x_hi = 3.0;
    c.win_x0 = 0.2;
    c.win_x1 = 0.6;
  } else {
    std::string valid;
    for (const auto& n : fixture_names()) valid += " " + n;
    throw ConfigError("unknown fixture '" + name + "'; available:" + valid);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Output

inline std::string file_header(const RunConfig& c) {
  return std::string("# sphvisc config_hash=") + config_hash(c) + " version=" + kVersion;
}

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out.imbue(std::locale::classic());
  return out;
}
}  // namespace detail

inline void write_checkpoint(const GasField& f, const RunConfig& c, const ControlParams& ctrl,
                             const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << file_header(c) << "\n";
  out << "# t=" << detail::fmt17(f.time) << " eps=" << detail::fmt17(c.eps) << " gamma=" << detail::fmt17(c.gamma)
      << " N=" << c.N_dim << " c=" << detail::fmt17(ctrl.c) << " d=" << detail::fmt17(ctrl.d) << "\n";
  out << "x,rho,mom\n";
  for (std::size_t i = 0; i < f.nx(); ++i)
    out << detail::fmt17(f.x(i)) << "," << detail::fmt17(f[i].rho) << "," << detail::fmt17(f[i].mom) << "\n";
}

/// Reads a checkpoint written by write_checkpoint; the grid is rebuilt from the first and last x.
inline GasField read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  double t = 0.0;
  std::vector<double> xs;
  std::vector<GasState> st;
  while (std::getline(in, line)) {
    if (line.rfind("# t=", 0) == 0) {
      t = detail::parse_double("t", line.substr(4, line.find(' ', 4) - 4));
      continue;
    }
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    row.imbue(std::locale::classic());
    double x, r, m;
    if (row >> x >> r >> m) {
      xs.push_back(x);
      st.push_back({r, m});
    }
  }
  if (xs.size() < 3) throw Error("checkpoint has too few rows");
  GasField f(Grid1D(xs.front(), xs.back(), xs.size()));
  f.data = st;
  f.time = t;
  return f;
}

inline void write_reports(const RunReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const RunConfig& c = rep.config;
  const std::string head = file_header(c);
  {
    auto out = detail::open_out(dir / "config.ini");
    out << to_ini(c);
  }
  {
    auto out = detail::open_out(dir / "monitor.csv");
    out << head << "\nt,max_wbar,min_zbar,worst_x,verdict\n";
    for (const auto& m : rep.monitor)
      out << detail::fmt(m.t) << "," << detail::fmt(m.max_wbar) << "," << detail::fmt(m.min_zbar) << ","
          << detail::fmt(m.worst_x) << "," << (m.verdict ? "pass" : "fail") << "\n";
  }
  {
    auto out = detail::open_out(dir / "diagnostics.csv");
    out << head << "\ndiagnostic,phi_id,pair_id,value,tolerance,verdict\n";
    for (const auto& d : rep.diagnostics)
      out << d.diagnostic << "," << d.phi_id << "," << d.pair_id << "," << detail::fmt(d.value) << ","
          << detail::fmt(d.tolerance) << "," << (d.informational ? "info" : (d.verdict ? "pass" : "fail")) << "\n";
  }
  {
    auto out = detail::open_out(dir / "floor.csv");
    out << head << "\nt,min_rho,oracle_floor,verdict\n";
    for (const auto& f : rep.floor)
      out << detail::fmt(f.t) << "," << detail::fmt(f.min_rho) << "," << detail::fmt(f.oracle_floor) << ","
          << (f.verdict ? "pass" : "fail") << "\n";
  }
  {
    auto out = detail::open_out(dir / "summary.txt");
    const ResolvedRun& r = rep.resolved;
    out << head << "\n";
    out << "name: " << c.name << "\nscenario: " << to_string(c.scenario) << "\n";
    out << "gamma: " << detail::fmt(c.gamma) << "  N: " << c.N_dim << "  eps: " << detail::fmt(c.eps) << "\n";
    out << "domain: [" << detail::fmt(r.grid.x_lo) << ", " << detail::fmt(r.grid.x_hi) << "]  nx: " << r.grid.nx
        << "  dx: " << detail::fmt(r.grid.dx()) << "\n";
    if (c.scenario == Scenario::origin) {
      out << "c: " << detail::fmt(r.ctrl.c) << "  d: " << detail::fmt(r.ctrl.d) << "  M3: " << detail::fmt(r.ctrl.M3) << "\n";
    } else {
      out << "alpha: " << detail::fmt(r.ctrl.alpha) << "  M1: " << detail::fmt(r.ctrl.M1) << "  M2: "
          << detail::fmt(r.ctrl.M2) << "  C: " << detail::fmt(r.ctrl.C) << "\n";
    }
    out << "t_end: " << detail::fmt(c.t_end) << "  outputs: " << c.outputs << "\n";
    std::size_t mf = 0;
    for (const auto& m : rep.monitor) mf += m.verdict ? 0 : 1;
    std::size_t df = 0;
    for (const auto& d : rep.diagnostics) df += d.verdict ? 0 : 1;
    std::size_t ff = 0;
    for (const auto& fl : rep.floor) ff += fl.verdict ? 0 : 1;
    out << "monitor rows: " << rep.monitor.size() << " (failed " << mf << ")\n";
    out << "diagnostic rows: " << rep.diagnostics.size() << " (failed " << df << ")\n";
    out << "floor rows: " << rep.floor.size() << " (failed " << ff << ")\n";
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
    out << "verdict: " << (rep.verdict ? "pass" : "fail") << "\n";
  }
  if (!rep.trajectory.snapshots.empty())
    write_checkpoint(rep.trajectory.snapshots.back(), c, rep.resolved.ctrl, dir / "checkpoint.csv");
}

inline void write_sweep_report(const SweepReport& s, const RunConfig& base, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto out = detail::open_out(dir / "sweep.csv");
  out << file_header(base) << "\n";
  out << "eps,nx,dissipation,entropy_K,weak_residual,cauchy_difference\n";
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    out << detail::fmt(s.runs[i].config.eps) << "," << s.runs[i].config.nx << "," << detail::fmt(s.dissipation[i]) << ","
        << detail::fmt(s.entropy_K[i]) << "," << detail::fmt(s.weak_residual[i]) << ","
        << (i < s.cauchy.differences.size() ? detail::fmt(s.cauchy.differences[i]) : std::string("")) << "\n";
  }
  auto sum = detail::open_out(dir / "sweep_summary.txt");
  sum << file_header(base) << "\n";
  sum << "cauchy decreasing: " << (s.cauchy.decreasing ? "yes" : "no") << "\n";
  sum << "dissipation max/min: " << detail::fmt(s.dissipation_ratio) << "\n";
  sum << "entropy K max/min: " << detail::fmt(s.entropy_K_ratio) << "\n";
  sum << "weak residual order in eps: " << detail::fmt(s.weak_order) << "\n";
  sum << "verdict: " << (s.verdict ? "pass" : "fail") << "\n";
}

inline std::vector<std::string> emit_selectors() { return {"profiles", "margins", "all"}; }

/// Plain tables for plotting: per-snapshot profiles (x, rho, mom, w, z, margins) and monitor margins over time.
inline std::vector<std::filesystem::path> emit_plotdata(const RunReport& rep, const std::string& what,
                                                        const std::filesystem::path& dir) {
  const auto sel = emit_selectors();
  if (std::find(sel.begin(), sel.end(), what) == sel.end())
    throw ConfigError("unknown selector '" + what + "'; valid: profiles, margins, all");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const ResolvedRun& r = rep.resolved;
  const bool origin = rep.config.scenario == Scenario::origin;
  const std::string head = file_header(rep.config);
  if (what == "profiles" || what == "all") {
    for (std::size_t k = 0; k < rep.trajectory.snapshots.size(); ++k) {
      const GasField& f = rep.trajectory.snapshots[k];
      std::ostringstream name;
      name << "profile_" << std::setw(4) << std::setfill('0') << k << ".csv";
      const auto p = dir / name.str();
      auto out = detail::open_out(p);
      out << head << "\n# t=" << detail::fmt(f.time) << "\nx,rho,mom,w,z,w_margin,z_margin\n";
      for (std::size_t i = 0; i < f.nx(); ++i) {
        const double x = f.x(i);
        const RiemannPair rp = riemann_invariants(f[i], r.eos);
        double wm, zm;
        if (origin) {
          const double sc = std::pow(x, r.ctrl.c * r.eos.theta);
          wm = (r.ctrl.M3 + 2.0 * r.ctrl.eps) - rp.w / sc;
          zm = rp.z / sc;
        } else {
          const ControlFunctionSample cs = control_sample_exterior(x, f.time, r.ctrl);
          wm = cs.phi - rp.w;
          zm = rp.z + cs.psi;
        }
        out << detail::fmt(x) << "," << detail::fmt(f[i].rho) << "," << detail::fmt(f[i].mom) << "," << detail::fmt(rp.w)
            << "," << detail::fmt(rp.z) << "," << detail::fmt(wm) << "," << detail::fmt(zm) << "\n";
      }
      written.push_back(p);
    }
  }
  if (what == "margins" || what == "all") {
    const auto p = dir / "margins.csv";
    auto out = detail::open_out(p);
    out << head << "\nt,max_wbar,min_zbar,min_rho\n";
    for (std::size_t k = 0; k < rep.monitor.size(); ++k) {
      double mn = std::numeric_limits<double>::infinity();
      if (k < rep.trajectory.snapshots.size())
        for (const GasState& s : rep.trajectory.snapshots[k].data) mn = std::min(mn, s.rho);
      out << detail::fmt(rep.monitor[k].t) << "," << detail::fmt(rep.monitor[k].max_wbar) << ","
          << detail::fmt(rep.monitor[k].min_zbar) << "," << detail::fmt(mn) << "\n";
    }
    written.push_back(p);
  }
  return written;
}

}  // namespace sphvisc
