#pragma once

// Mollified initial/boundary data, admissibility checks, and the (rho~, m~, xi) scaling.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sphvisc/control_params.hpp"
#include "sphvisc/errors.hpp"
#include "sphvisc/field.hpp"
#include "sphvisc/gas_core.hpp"
#include "sphvisc/quadrature.hpp"
#include "sphvisc/viscous_solver.hpp"

namespace sphvisc {

struct InitialProfile {
  std::function<double(double)> rho0;
  std::function<double(double)> mom0;
  std::string description;
};

/// Density floor eps^(2/theta) added before mollification.
inline double vacuum_floor(double eps, const EosParams& eos) { return std::pow(eps, 2.0 / eos.theta); }

// ---------------------------------------------------------------------------
// Mollifier

/// Unnormalized bump exp(1/(y^2 - 1)) on |y| < 1.
inline double bump(double y) {
  const double y2 = y * y;
  return y2 < 1.0 ? std::exp(1.0 / (y2 - 1.0)) : 0.0;
}

/// Discrete mollifier: offsets y_k in [-eps, eps] and weights summing to one.
struct Mollifier {
  std::vector<double> offsets;
  std::vector<double> weights;

  static constexpr std::size_t kIntervals = 64;

  explicit Mollifier(double eps, std::size_t intervals = kIntervals) {
    if (!(eps > 0.0)) throw DomainError("Mollifier: width must be positive");
    const double h = 2.0 * eps / static_cast<double>(intervals);
    const std::vector<double> sw = simpson_weights(intervals, h);
    offsets.resize(intervals + 1);
    weights.resize(intervals + 1);
    double total = 0.0;
    for (std::size_t k = 0; k <= intervals; ++k) {
      offsets[k] = -eps + static_cast<double>(k) * h;
      weights[k] = sw[k] * bump(offsets[k] / eps) / eps;
      total += weights[k];
    }
    for (double& w : weights) w /= total;
  }

  double mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  /// (v * j)(x) with v extended by constants outside [lo, hi].
  template <class F>
  double apply(F&& v, double x, double lo, double hi) const {
    double s = 0.0;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (weights[k] == 0.0) continue;
      const double y = std::clamp(x - offsets[k], lo, hi);
      s += weights[k] * v(y);
    }
    return s;
  }
};

struct MollifiedData {
  GasField field;
  Dirichlet boundary;
};

namespace detail {
inline double velocity_of(const InitialProfile& p, double x) {
  const double r = p.rho0(x);
  const double m = p.mom0(x);
  if (r < 0.0) throw DomainError("initial profile: negative density at x = " + std::to_string(x));
  if (r == 0.0) {
    if (m != 0.0) throw VacuumError("initial profile: momentum without mass at x = " + std::to_string(x));
    return 0.0;
  }
  return m / r;
}
}  // namespace detail

/// ((rho0 + eps^(2/theta)), (m0/rho0)(rho0 + eps^(2/theta))) * j^eps on the grid.
/// Boundary data: (rho(1), 0) on the left, (rho(b), m(b)) on the right.
inline MollifiedData mollify_exterior(const InitialProfile& p, const EosParams& eos, double eps, const Grid1D& grid) {
  const double floor = vacuum_floor(eps, eos);
  const Mollifier j(eps);
  auto rho = [&](double x) { return p.rho0(x) + floor; };
  auto mom = [&](double x) { return detail::velocity_of(p, x) * (p.rho0(x) + floor); };
  MollifiedData out{GasField(grid), {}};
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    out.field[i] = {j.apply(rho, x, grid.x_lo, grid.x_hi), j.apply(mom, x, grid.x_lo, grid.x_hi)};
  }
  out.field[0].mom = 0.0;
  out.boundary = {out.field.data.front(), out.field.data.back()};
  return out;
}

// ---------------------------------------------------------------------------
// Scaling rho = rho~ x^c, m = m~ x^d.

inline GasState scale_state(const GasState& s, double x, const ControlParams& ctrl) {
  if (!(x > 0.0)) throw DomainError("scale_transform: x must be positive");
  return {s.rho * std::pow(x, -ctrl.c), s.mom * std::pow(x, -ctrl.d)};
}

inline GasState unscale_state(const GasState& s, double x, const ControlParams& ctrl) {
  if (!(x > 0.0)) throw DomainError("scale_transform: x must be positive");
  return {s.rho * std::pow(x, ctrl.c), s.mom * std::pow(x, ctrl.d)};
}

/// Samples of a field in scaled variables together with both coordinates.
struct ScaledField {
  std::vector<double> x;
  std::vector<double> xi;
  std::vector<GasState> data;
  double time = 0.0;
};

inline ScaledField scale_transform(const GasField& f, const ControlParams& ctrl) {
  const XiMap map{ctrl.c, ctrl.d};
  ScaledField s;
  s.time = f.time;
  s.x.resize(f.nx());
  s.xi.resize(f.nx());
  s.data.resize(f.nx());
  for (std::size_t i = 0; i < f.nx(); ++i) {
    const double x = f.x(i);
    s.x[i] = x;
    s.xi[i] = map.xi(x);
    s.data[i] = scale_state(f[i], x, ctrl);
  }
  return s;
}

/// Inverse of scale_transform; x is recovered from xi.
inline std::vector<std::pair<double, GasState>> inverse_scale_transform(const ScaledField& s, const ControlParams& ctrl) {
  const XiMap map{ctrl.c, ctrl.d};
  std::vector<std::pair<double, GasState>> out(s.data.size());
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const double x = map.x(s.xi[i]);
    out[i] = {x, unscale_state(s.data[i], x, ctrl)};
  }
  return out;
}

/// Field-level maps that keep the x grid.
inline GasField scale_field(const GasField& f, const ControlParams& ctrl) {
  GasField out = f;
  for (std::size_t i = 0; i < f.nx(); ++i) out[i] = scale_state(f[i], f.x(i), ctrl);
  return out;
}

inline GasField unscale_field(const GasField& f, const ControlParams& ctrl) {
  GasField out = f;
  for (std::size_t i = 0; i < f.nx(); ++i) out[i] = unscale_state(f[i], f.x(i), ctrl);
  return out;
}

/// Origin data in scaled variables:
/// (rho~0 + eps^(2/theta), (m~0/rho~0 + eps)(rho~0 + eps^(2/theta)) chi_[2a, b]) * j^eps.
/// Boundary data: (rho~(a), 0) and (rho~(b), m~(b)).
inline MollifiedData mollify_origin(const InitialProfile& p, const EosParams& eos, double eps, const Grid1D& grid,
                                    const ControlParams& ctrl) {
  const double floor = vacuum_floor(eps, eos);
  const double a = grid.x_lo;
  const Mollifier j(eps);
  auto rho_t = [&](double x) { return p.rho0(x) * std::pow(x, -ctrl.c); };
  auto rho = [&](double x) { return rho_t(x) + floor; };
  auto mom = [&](double x) {
    if (x < 2.0 * a) return 0.0;
    const double r = p.rho0(x);
    double ut = 0.0;
    if (r > 0.0) {
      ut = p.mom0(x) * std::pow(x, -ctrl.d) / rho_t(x);
    } else if (p.mom0(x) != 0.0) {
      throw VacuumError("initial profile: momentum without mass at x = " + std::to_string(x));
    }
    return (ut + eps) * (rho_t(x) + floor);
  };
  MollifiedData out{GasField(grid), {}};
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    out.field[i] = {j.apply(rho, x, grid.x_lo, grid.x_hi), j.apply(mom, x, grid.x_lo, grid.x_hi)};
  }
  out.field[0].mom = 0.0;
  out.boundary = {out.field.data.front(), out.field.data.back()};
  return out;
}

// ---------------------------------------------------------------------------
// Admissibility

struct AdmissibilityReport {
  std::vector<double> x;
  std::vector<double> w_margin;
  std::vector<double> z_margin;
  std::vector<bool> floor_ok;
  double min_w_margin = std::numeric_limits<double>::infinity();
  double min_z_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_node = 0;
  bool floor_violation = false;
  bool verdict = true;
};

namespace detail {
inline void finish_report(AdmissibilityReport& r, double tol) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    const double m = std::min(r.w_margin[i], r.z_margin[i]);
    if (m < worst) {
      worst = m;
      r.worst_node = i;
    }
    r.min_w_margin = std::min(r.min_w_margin, r.w_margin[i]);
    r.min_z_margin = std::min(r.min_z_margin, r.z_margin[i]);
    if (!r.floor_ok[i]) r.floor_violation = true;
  }
  r.verdict = !r.floor_violation && r.min_w_margin >= -tol && r.min_z_margin >= -tol;
}
}  // namespace detail

/// Margins M1 - M2 x^-alpha + eps - w and z + M2 x^-alpha + eps; at x = 1 the boundary rows
/// M1 - M2 - w and z + M2 apply. Floor rho >= eps^(2/theta).
inline AdmissibilityReport check_admissible_exterior(const GasField& f, const ControlParams& ctrl, const EosParams& eos,
                                                     double tol = 0.0) {
  const double floor = vacuum_floor(ctrl.eps, eos);
  AdmissibilityReport r;
  for (std::size_t i = 0; i < f.nx(); ++i) {
    const double x = f.x(i);
    const double decay = ctrl.M2 * std::pow(x, -ctrl.alpha);
    const bool ok = f[i].rho >= floor * (1.0 - 1e-12);
    double wm = -std::numeric_limits<double>::infinity(), zm = wm;
    if (f[i].rho > 0.0) {
      const RiemannPair rp = riemann_invariants(f[i], eos);
      const double slack = (i == 0 && x == 1.0) ? 0.0 : ctrl.eps;
      wm = ctrl.M1 - decay + slack - rp.w;
      zm = rp.z + decay + slack;
    }
    r.x.push_back(x);
    r.w_margin.push_back(wm);
    r.z_margin.push_back(zm);
    r.floor_ok.push_back(ok);
  }
  detail::finish_report(r, tol);
  return r;
}

struct OriginAdmissibilityOptions {
  double tol = 0.0;
  /// The z-row is not evaluated at x below this value (the momentum cutoff layer).
  double z_exempt_below = 0.0;
};

/// Margins (M3 + 2 eps) x^(c theta) - w and z on physical variables; floor rho >= eps^(2/theta) x^c.
inline AdmissibilityReport check_admissible_origin(const GasField& f, const ControlParams& ctrl, const EosParams& eos,
                                                   const OriginAdmissibilityOptions& opt = {}) {
  const double floor = vacuum_floor(ctrl.eps, eos);
  AdmissibilityReport r;
  for (std::size_t i = 0; i < f.nx(); ++i) {
    const double x = f.x(i);
    const bool ok = f[i].rho >= floor * std::pow(x, ctrl.c) * (1.0 - 1e-12);
    double wm = -std::numeric_limits<double>::infinity(), zm = wm;
    if (f[i].rho > 0.0) {
      const RiemannPair rp = riemann_invariants(f[i], eos);
      wm = (ctrl.M3 + 2.0 * ctrl.eps) * std::pow(x, ctrl.c * eos.theta) - rp.w;
      zm = x < opt.z_exempt_below ? std::numeric_limits<double>::infinity() : rp.z;
    }
    r.x.push_back(x);
    r.w_margin.push_back(wm);
    r.z_margin.push_back(zm);
    r.floor_ok.push_back(ok);
  }
  detail::finish_report(r, opt.tol);
  return r;
}

// ---------------------------------------------------------------------------
// f(r) = (eps + r^theta)^(1/theta) - r - eps^(2/theta)

struct FloorCertificate {
  bool holds = false;
  bool in_regime = true;
  double f0 = 0.0;
  double min_derivative = 0.0;
  explicit operator bool() const { return holds; }
};

inline FloorCertificate floor_monotonicity_certificate(const EosParams& eos, double eps, std::size_t samples = 2000) {
  const double th = eos.theta;
  if (!(th > 0.0) || th > 1.0) throw DomainError("floor_monotonicity_certificate: theta must lie in (0, 1]");
  if (!(eps > 0.0)) throw DomainError("floor_monotonicity_certificate: eps must be positive");
  FloorCertificate c;
  c.in_regime = eps <= 0.1;
  c.f0 = std::pow(eps, 1.0 / th) - std::pow(eps, 2.0 / th);
  // f'(r) = (1 + eps r^-theta)^((1-theta)/theta) - 1
  c.min_derivative = std::numeric_limits<double>::infinity();
  const double lo = std::log(1e-12), hi = std::log(1e3);
  for (std::size_t k = 0; k < samples; ++k) {
    const double r = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples - 1));
    const double d = std::pow(1.0 + eps * std::pow(r, -th), (1.0 - th) / th) - 1.0;
    c.min_derivative = std::min(c.min_derivative, d);
  }
  c.holds = c.f0 > 0.0 && c.min_derivative >= 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Named profiles

using ProfileParams = std::map<std::string, double>;

namespace detail {
inline double param(const ProfileParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}
inline double smooth_step_down(double x, double x0, double width) { return 0.5 * (1.0 - std::tanh((x - x0) / width)); }
}  // namespace detail

/// Piecewise-linear profile from rows (x, rho, mom), constant outside the table.
inline InitialProfile tabulated_profile(std::vector<double> xs, std::vector<double> rho, std::vector<double> mom,
                                        std::string description = "table") {
  if (xs.size() < 2 || rho.size() != xs.size() || mom.size() != xs.size())
    throw ConfigError("tabulated profile needs at least two rows of equal length");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw ConfigError("tabulated profile: x must be strictly increasing");
  auto lerp = [xs](const std::vector<double>& v) {
    return [xs, v](double x) {
      if (x <= xs.front()) return v.front();
      if (x >= xs.back()) return v.back();
      const auto it = std::upper_bound(xs.begin(), xs.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
      const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
      return (1.0 - w) * v[i] + w * v[i + 1];
    };
  };
  return {lerp(rho), lerp(mom), std::move(description)};
}

inline InitialProfile load_profile_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile table " + path);
  std::vector<double> xs, rs, ms;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, r, m;
    if (!(row >> x >> r >> m)) continue;  // header row
    xs.push_back(x);
    rs.push_back(r);
    ms.push_back(m);
  }
  return tabulated_profile(xs, rs, ms, "table:" + path);
}

inline std::vector<std::string> profile_names() {
  return {"constant", "step", "gaussian", "inward", "blast", "power_blast", "table"};
}

/// Built-in profiles in physical variables. Unknown keys are ignored; missing keys take defaults.
///   constant:    rho, u
///   step:        rho_lo, rho_hi, x0, u            rho = rho_lo + (rho_hi - rho_lo) H(x - x0)
///   gaussian:    base, amp, x0, width, u
///   inward:      rho^theta = M2 x^-alpha / 4, u = -M2 x^-alpha / 2
///   blast:       s_in, s_bg, U, x_s, delta, ell   rho^theta and u smoothed steps, u -> 0 at x = 1
///   power_blast: A, k, U                          rho = A x^c min(1,x)^k, u = x^(c theta)(rho~^theta + U)
inline InitialProfile make_profile(const std::string& name, const ProfileParams& p, const EosParams& eos,
                                   const ControlParams& ctrl, const std::string& table_path = "") {
  using detail::param;
  const double th = eos.theta;
  if (name == "constant") {
    const double r = param(p, "rho", 1.0), u = param(p, "u", 0.0);
    return {[r](double) { return r; }, [r, u](double) { return r * u; }, "constant"};
  }
  if (name == "step") {
    const double lo = param(p, "rho_lo", 1.0), hi = param(p, "rho_hi", 2.0), x0 = param(p, "x0", 2.0),
                 u = param(p, "u", 0.0);
    auto r = [=](double x) { return x < x0 ? lo : hi; };
    return {r, [=](double x) { return r(x) * u; }, "step"};
  }
  if (name == "gaussian") {
    const double base = param(p, "base", 0.5), amp = param(p, "amp", 0.5), x0 = param(p, "x0", 3.0),
                 width = param(p, "width", 0.5), u = param(p, "u", 0.0);
    auto r = [=](double x) { return base + amp * std::exp(-(x - x0) * (x - x0) / (width * width)); };
    return {r, [=](double x) { return r(x) * u; }, "gaussian"};
  }
  if (name == "inward") {
    const double M2 = ctrl.M2, al = ctrl.alpha;
    auto r = [=](double x) { return std::pow(0.25 * M2 * std::pow(x, -al), 1.0 / th); };
    return {r, [=](double x) { return -0.5 * M2 * std::pow(x, -al) * r(x); }, "inward"};
  }
  if (name == "blast") {
    const double s_in = param(p, "s_in", 0.8), s_bg = param(p, "s_bg", 0.3), U = param(p, "U", 0.5),
                 xs = param(p, "x_s", 2.0), delta = param(p, "delta", 0.1), ell = param(p, "ell", 0.2);
    auto s = [=](double x) { return s_bg + (s_in - s_bg) * detail::smooth_step_down(x, xs, delta); };
    auto u = [=](double x) { return U * detail::smooth_step_down(x, xs, delta) * (1.0 - std::exp(-(x - 1.0) / ell)); };
    auto r = [=](double x) { return std::pow(s(x), 1.0 / th); };
    return {r, [=](double x) { return r(x) * u(x); }, "blast"};
  }
  if (name == "power_blast") {
    const double A = param(p, "A", 0.5), k = param(p, "k", 8.0), U = param(p, "U", 0.2), c = ctrl.c;
    auto rt = [=](double x) { return A * std::pow(std::min(1.0, x), k); };
    auto r = [=](double x) { return rt(x) * std::pow(x, c); };
    auto u = [=](double x) { return std::pow(x, c * th) * (std::pow(rt(x), th) + U); };
    return {r, [=](double x) { return r(x) * u(x); }, "power_blast"};
  }
  if (name == "table") return load_profile_table(table_path);
  std::string valid;
  for (const auto& n : profile_names()) valid += " " + n;
  throw ConfigError("unknown profile '" + name + "'; valid:" + valid);
}

}  // namespace sphvisc
