#pragma once

// Heat-kernel decomposition w = w0 + w1 + w2 + w3 of
//   w_t - eps w_xx = f1 + f2 + h_x on (a, b),  w(0) = varphi,  w(a) = varphi(a),  w(b) = varphi(b),
// used as an independent lower-bound oracle for the density of viscous runs.
//
//   w2 = int int Gamma(x - xi, t - tau) f2 dxi dtau        (space-time quadrature)
//   w3 = int int Gamma_x(x - xi, t - tau) h dxi dtau       (space-time quadrature)
//   w0: heat flow from varphi with boundary values varphi - w2 - w3
//   w1: heat flow forced by f1 >= 0 with zero data

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sphvisc/control_params.hpp"
#include "sphvisc/entropy_analysis.hpp"
#include "sphvisc/errors.hpp"
#include "sphvisc/field.hpp"
#include "sphvisc/gas_core.hpp"
#include "sphvisc/initial_data.hpp"
#include "sphvisc/invariant_monitor.hpp"
#include "sphvisc/quadrature.hpp"
#include "sphvisc/viscous_solver.hpp"

namespace sphvisc {

struct KernelSample {
  double x_minus_xi = 0.0;
  double t_minus_tau = 0.0;
  double eps = 0.0;
  double value = 0.0;   // Gamma
  double dvalue = 0.0;  // Gamma_x
};

inline KernelSample heat_kernel(double dx, double dt, double eps) {
  if (!(eps > 0.0)) throw DomainError("heat_kernel: eps must be positive");
  KernelSample k{dx, dt, eps, 0.0, 0.0};
  if (dt <= 0.0) return k;
  k.value = std::exp(-dx * dx / (4.0 * eps * dt)) / std::sqrt(4.0 * M_PI * eps * dt);
  k.dvalue = -dx / (2.0 * eps * dt) * k.value;
  return k;
}

/// int Gamma(x - xi, dt) dxi over |x - xi| <= 12 sqrt(eps dt), composite Gauss-Legendre.
inline double kernel_mass(double dt, double eps, std::size_t panels = 48, std::size_t order = 16) {
  if (!(dt > 0.0)) return 0.0;
  const QuadratureRule gl = gauss_legendre(order);
  const double half = 12.0 * std::sqrt(eps * dt);
  const double h = 2.0 * half / static_cast<double>(panels);
  double s = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = -half + static_cast<double>(p) * h;
    s += gl.integrate([&](double y) { return heat_kernel(y, dt, eps).value; }, lo, lo + h);
  }
  return s;
}

struct KernelSampling {
  double dt_lo = 1e-6, dt_hi = 1.0;
  double dx_lo = 1e-6, dx_hi = 10.0;
  std::size_t n = 60;
  double box_T = 1.0;  // integrability box [0, T] x [-L, L]
  double box_L = 1.0;
};

struct KernelBoundCertificate {
  double alpha_k = 0.0;
  double max_ratio = 0.0;     // max |Gamma_x| dt^(3/2 - alpha) |dx|^(2 alpha - 1) over the samples
  double analytic_sup = 0.0;  // eps^(alpha - 3/2) (4 alpha / e)^alpha / (4 sqrt(pi))
  double box_integral = 0.0;  // quadrature of dt^(alpha - 3/2) |dx|^(1 - 2 alpha) over the box
  double box_integral_exact = 0.0;
  bool finite = false;
  bool integrable = false;

  bool pass() const { return finite && integrable; }
};

/// |Gamma_x| <= C / ((t - tau)^(3/2 - alpha) |x - xi|^(2 alpha - 1)) for 1/2 < alpha < 1.
inline KernelBoundCertificate kernel_bound_check(double eps, double alpha_k, const KernelSampling& smp = {}) {
  if (!(alpha_k > 0.5 && alpha_k < 1.0)) throw DomainError("kernel_bound_check: exponent must lie in (1/2, 1)");
  if (!(eps > 0.0)) throw DomainError("kernel_bound_check: eps must be positive");
  KernelBoundCertificate c;
  c.alpha_k = alpha_k;
  const auto dts = detail::logspace(smp.dt_lo, smp.dt_hi, smp.n);
  const auto dxs = detail::logspace(smp.dx_lo, smp.dx_hi, smp.n);
  for (double dt : dts) {
    for (double dx : dxs) {
      const KernelSample k = heat_kernel(dx, dt, eps);
      const double r = std::abs(k.dvalue) * std::pow(dt, 1.5 - alpha_k) * std::pow(dx, 2.0 * alpha_k - 1.0);
      c.max_ratio = std::max(c.max_ratio, r);
    }
  }
  c.analytic_sup = std::pow(eps, alpha_k - 1.5) * std::pow(4.0 * alpha_k / std::exp(1.0), alpha_k) / (4.0 * std::sqrt(M_PI));
  // Separable box integral; substitutions s = T v^p, y = L v^q make both integrands linear in v.
  const QuadratureRule gl = gauss_legendre(20);
  const double p = 2.0 / (alpha_k - 0.5), q = 2.0 / (2.0 - 2.0 * alpha_k);
  const double T = smp.box_T, L = smp.box_L;
  const double it = gl.integrate(
      [&](double v) { return v > 0.0 ? std::pow(T * std::pow(v, p), alpha_k - 1.5) * T * p * std::pow(v, p - 1.0) : 0.0; }, 0.0, 1.0);
  const double ix = 2.0 * gl.integrate(
      [&](double v) { return v > 0.0 ? std::pow(L * std::pow(v, q), 1.0 - 2.0 * alpha_k) * L * q * std::pow(v, q - 1.0) : 0.0; }, 0.0, 1.0);
  c.box_integral = it * ix;
  c.box_integral_exact = std::pow(T, alpha_k - 0.5) / (alpha_k - 0.5) * 2.0 * std::pow(L, 2.0 - 2.0 * alpha_k) / (2.0 - 2.0 * alpha_k);
  c.finite = std::isfinite(c.max_ratio) && c.max_ratio <= c.analytic_sup * (1.0 + 1e-9);
  c.integrable = std::isfinite(c.box_integral) &&
                 std::abs(c.box_integral - c.box_integral_exact) <= 1e-8 * c.box_integral_exact;
  return c;
}

// ---------------------------------------------------------------------------
// Sampled heat problem

/// Sources on a uniform grid at increasing times (piecewise linear in x, linear in t between rows).
struct SampledSources {
  Grid1D grid;
  double eps = 1.0;
  std::vector<double> times;
  std::vector<std::vector<double>> f1, f2, h;  // [time][node]
  std::vector<double> varphi;                  // initial values; boundary values are its end entries

  void validate() const {
    if (!(eps > 0.0)) throw PreconditionError("heat problem: eps must be positive");
    if (times.size() < 2 || times.front() != 0.0) throw PreconditionError("heat problem: need source rows from t = 0");
    for (std::size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1])) throw PreconditionError("heat problem: source times must increase");
    const std::size_t n = grid.nx;
    if (varphi.size() != n) throw PreconditionError("heat problem: varphi has the wrong length");
    for (const auto* tab : {&f1, &f2, &h}) {
      if (tab->size() != times.size()) throw PreconditionError("heat problem: source rows do not match times");
      for (const auto& row : *tab) {
        if (row.size() != n) throw PreconditionError("heat problem: source row has the wrong length");
        for (double v : row)
          if (!std::isfinite(v)) throw PreconditionError("heat problem: unbounded source detected");
      }
    }
    for (double v : varphi)
      if (!std::isfinite(v)) throw PreconditionError("heat problem: unbounded initial data detected");
    for (const auto& row : f1)
      for (double v : row)
        if (v < 0.0) throw PreconditionError("heat problem: f1 must be nonnegative");
  }
};

struct HeatSourceSpec {
  std::function<double(double, double)> f1, f2, h;
  std::function<double(double)> varphi;
  double a = 0.0, b = 1.0, eps = 1.0;
};

/// Samples a functional spec at the grid nodes and at n_times uniform times over [0, t_end].
inline SampledSources sample_sources(const HeatSourceSpec& spec, const Grid1D& grid, double t_end, std::size_t n_times = 41) {
  if (!(grid.x_lo == spec.a && grid.x_hi == spec.b)) throw PreconditionError("heat problem: grid must cover (a, b)");
  if (n_times < 2 || !(t_end > 0.0)) throw PreconditionError("heat problem: need t_end > 0 and two source times");
  SampledSources s;
  s.grid = grid;
  s.eps = spec.eps;
  auto eval = [](const std::function<double(double, double)>& f, double x, double t) { return f ? f(x, t) : 0.0; };
  for (std::size_t k = 0; k < n_times; ++k) {
    const double t = t_end * static_cast<double>(k) / static_cast<double>(n_times - 1);
    s.times.push_back(t);
    std::vector<double> a(grid.nx), b(grid.nx), c(grid.nx);
    for (std::size_t i = 0; i < grid.nx; ++i) {
      a[i] = eval(spec.f1, grid.x(i), t);
      b[i] = eval(spec.f2, grid.x(i), t);
      c[i] = eval(spec.h, grid.x(i), t);
    }
    s.f1.push_back(std::move(a));
    s.f2.push_back(std::move(b));
    s.h.push_back(std::move(c));
  }
  s.varphi.resize(grid.nx);
  for (std::size_t i = 0; i < grid.nx; ++i) s.varphi[i] = spec.varphi ? spec.varphi(grid.x(i)) : 0.0;
  return s;
}

struct HeatOracleOptions {
  std::size_t gauss_points = 8;
  double truncation = 12.0;  // kernel support in standard deviations
  double cfl = 0.4;
  std::size_t substeps = 8;  // minimum finite-difference steps per source interval
  std::size_t graded_panels = 12;
};

struct HeatLowerBoundReport {
  Grid1D grid;
  std::vector<double> times;
  std::vector<std::vector<double>> w_sum;     // w0 + w1 + w2 + w3
  std::vector<std::vector<double>> w_direct;  // finite-difference solve of the full equation
  double min_w = std::numeric_limits<double>::infinity();
  double min_w1 = std::numeric_limits<double>::infinity();
  double proof_bound = std::numeric_limits<double>::infinity();  // min(w0 + w2 + w3), dropping w1 >= 0
  double mismatch = 0.0;                                          // max |w_sum - w_direct|
  double lower_bound_C = 0.0;                                     // w >= -C

  /// Cumulative minimum of w_sum up to and including time index k.
  double min_up_to(std::size_t k) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= k && j < w_sum.size(); ++j)
      for (double v : w_sum[j]) m = std::min(m, v);
    return m;
  }
};

class HeatOracle {
 public:
  enum class Kernel { value, derivative };

  HeatOracle(SampledSources src, HeatOracleOptions opt = {}) : s_(std::move(src)), opt_(opt), gl_(gauss_legendre(opt.gauss_points)) {
    s_.validate();
  }

  const SampledSources& sources() const { return s_; }

  /// Blend of a source table at time t (linear between rows, constant after the last).
  std::vector<double> row_at(const std::vector<std::vector<double>>& tab, double t) const {
    const auto [k, lam] = locate(t);
    std::vector<double> out(s_.grid.nx);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - lam) * tab[k][i] + lam * tab[k + 1][i];
    return out;
  }

  /// w2 (Kernel::value with f2) or w3 (Kernel::derivative with h) at (x, t).
  double duhamel(double x, double t, Kernel kind) const {
    if (t <= 0.0) return 0.0;
    const auto& tab = kind == Kernel::value ? s_.f2 : s_.h;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < s_.times.size() && s_.times[k] < t; ++k) {
      const double t0 = s_.times[k], t1 = s_.times[k + 1];
      const double hi_tau = std::min(t1, t);
      const double sig_lo = std::sqrt(std::max(0.0, t - hi_tau));
      const double sig_hi = std::sqrt(t - t0);
      auto integrand = [&](double sig) {
        const double tau = t - sig * sig;
        const double lam = (tau - t0) / (t1 - t0);
        return 2.0 * sig * spatial(x, sig * sig, tab[k], tab[k + 1], lam, kind);
      };
      if (sig_lo > 0.0) {
        total += gl_.integrate(integrand, sig_lo, sig_hi);
      } else {
        // Near tau = t the boundary terms are steps in sig of width ~ dist / sqrt(eps): graded panels.
        double hi = sig_hi;
        for (std::size_t m = 0; m < opt_.graded_panels; ++m) {
          total += gl_.integrate(integrand, 0.5 * hi, hi);
          hi *= 0.5;
        }
        total += gl_.integrate(integrand, 0.0, hi);
      }
    }
    return total;
  }

  HeatLowerBoundReport solve() const {
    const Grid1D& g = s_.grid;
    const std::size_t n = g.nx;
    const double eps = s_.eps;
    HeatLowerBoundReport rep;
    rep.grid = g;
    rep.times = s_.times;

    // w2 + w3 at every node and output time by quadrature.
    std::vector<std::vector<double>> w23(s_.times.size(), std::vector<double>(n, 0.0));
    for (std::size_t k = 1; k < s_.times.size(); ++k)
      for (std::size_t i = 0; i < n; ++i)
        w23[k][i] = duhamel(g.x(i), s_.times[k], Kernel::value) + duhamel(g.x(i), s_.times[k], Kernel::derivative);

    const double phi_a = s_.varphi.front(), phi_b = s_.varphi.back();
    auto node_of = [&](double x) {
      return static_cast<std::size_t>(std::lround((x - g.x_lo) / g.dx()));
    };

    // (P0) in p, (P1) in q.
    GenericCoeffs split = GenericCoeffs::zeros();
    split.r2 = [&](const CoeffArgs& a) { return value_at(s_.f1, node_of(a.x), a.t); };
    PQBoundaryFn split_bc = [&](double t) {
      const double ta = duhamel(g.x_lo, t, Kernel::value) + duhamel(g.x_lo, t, Kernel::derivative);
      const double tb = duhamel(g.x_hi, t, Kernel::value) + duhamel(g.x_hi, t, Kernel::derivative);
      return std::pair<PQ, PQ>{{phi_a - ta, 0.0}, {phi_b - tb, 0.0}};
    };
    // Full equation in p.
    GenericCoeffs full = GenericCoeffs::zeros();
    full.r1 = [&](const CoeffArgs& a) {
      const std::size_t i = node_of(a.x);
      const double hx = (value_at(s_.h, i + 1, a.t) - value_at(s_.h, i - 1, a.t)) / (2.0 * g.dx());
      return value_at(s_.f1, i, a.t) + value_at(s_.f2, i, a.t) + hx;
    };
    PQBoundaryFn full_bc = [&](double) { return std::pair<PQ, PQ>{{phi_a, 0.0}, {phi_b, 0.0}}; };

    PQField sp(g), fu(g);
    for (std::size_t i = 0; i < n; ++i) {
      sp[i] = {s_.varphi[i], 0.0};
      fu[i] = {s_.varphi[i], 0.0};
    }
    const double dt_diff = opt_.cfl * g.dx() * g.dx() / (2.0 * eps);
    auto record = [&](std::size_t k) {
      std::vector<double> sum(n), direct(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double w0 = sp[i].p, w1 = sp[i].q;
        sum[i] = w0 + w1 + w23[k][i];
        direct[i] = fu[i].p;
        rep.min_w = std::min(rep.min_w, sum[i]);
        rep.min_w1 = std::min(rep.min_w1, w1);
        rep.proof_bound = std::min(rep.proof_bound, w0 + w23[k][i]);
        rep.mismatch = std::max(rep.mismatch, std::abs(sum[i] - direct[i]));
      }
      rep.w_sum.push_back(std::move(sum));
      rep.w_direct.push_back(std::move(direct));
    };
    record(0);
    for (std::size_t k = 0; k + 1 < s_.times.size(); ++k) {
      const double span = s_.times[k + 1] - s_.times[k];
      const std::size_t steps = std::max<std::size_t>(opt_.substeps, static_cast<std::size_t>(std::ceil(span / dt_diff)));
      const double dt = span / static_cast<double>(steps);
      for (std::size_t j = 0; j < steps; ++j) {
        sp = step_generic(sp, split, eps, dt, split_bc);
        fu = step_generic(fu, full, eps, dt, full_bc);
      }
      sp.time = fu.time = s_.times[k + 1];
      record(k + 1);
    }
    rep.lower_bound_C = -rep.min_w;
    return rep;
  }

 private:
  std::pair<std::size_t, double> locate(double t) const {
    const auto& ts = s_.times;
    if (t <= ts.front()) return {0, 0.0};
    if (t >= ts.back()) return {ts.size() - 2, 1.0};
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
    return {k, (t - ts[k]) / (ts[k + 1] - ts[k])};
  }

  double value_at(const std::vector<std::vector<double>>& tab, std::size_t i, double t) const {
    const auto [k, lam] = locate(t);
    return (1.0 - lam) * tab[k][i] + lam * tab[k + 1][i];
  }

  /// Exact integral over (a, b) of Gamma(x - xi, s) (or Gamma_x) against the piecewise-linear
  /// interpolant of (1 - lam) fa + lam fb.
  double spatial(double x, double s, const std::vector<double>& fa, const std::vector<double>& fb, double lam,
                 Kernel kind) const {
    const Grid1D& g = s_.grid;
    const std::size_t n = g.nx;
    const double h = g.dx();
    if (s <= 0.0) {
      if (kind == Kernel::derivative) return 0.0;
      // Limit s -> 0: the source value at x.
      const double pos = std::clamp((x - g.x_lo) / h, 0.0, static_cast<double>(n - 1));
      std::size_t j = std::min(static_cast<std::size_t>(pos), n - 2);
      const double w = pos - static_cast<double>(j);
      auto f = [&](std::size_t i) { return (1.0 - lam) * fa[i] + lam * fb[i]; };
      return (1.0 - w) * f(j) + w * f(j + 1);
    }
    const double sg = std::sqrt(2.0 * s_.eps * s);
    const double reach = opt_.truncation * sg;
    const double lo = std::max(g.x_lo, x - reach), hi = std::min(g.x_hi, x + reach);
    if (!(hi > lo)) return 0.0;
    std::size_t j0 = static_cast<std::size_t>(std::floor((lo - g.x_lo) / h));
    std::size_t j1 = static_cast<std::size_t>(std::ceil((hi - g.x_lo) / h));
    j0 = std::min(j0, n - 1);
    j1 = std::min(std::max(j1, j0 + 1), n - 1);
    if (j0 == j1) j0 = j1 - 1;
    const double inv = 1.0 / (std::sqrt(2.0) * sg);
    const double gnorm = 1.0 / (std::sqrt(2.0 * M_PI) * sg);
    auto f = [&](std::size_t i) { return (1.0 - lam) * fa[i] + lam * fb[i]; };
    auto gauss = [&](double xi) { return gnorm * std::exp(-(x - xi) * (x - xi) / (2.0 * sg * sg)); };
    double total = 0.0;
    double xi_l = g.x(j0);
    double E_l = 0.5 * std::erf((xi_l - x) * inv);
    double G_l = gauss(xi_l);
    for (std::size_t j = j0; j < j1; ++j) {
      const double xi_r = g.x(j + 1);
      const double E_r = 0.5 * std::erf((xi_r - x) * inv);
      const double G_r = gauss(xi_r);
      const double I0 = E_r - E_l;
      const double slope = (f(j + 1) - f(j)) / h;
      if (kind == Kernel::value) {
        total += f(j) * I0 + slope * ((x - xi_l) * I0 + sg * sg * (G_l - G_r));
      } else {
        total += slope * I0;
      }
      xi_l = xi_r;
      E_l = E_r;
      G_l = G_r;
    }
    if (kind == Kernel::derivative) {
      if (j0 == 0) total += gauss(g.x_lo) * f(0);
      if (j1 == n - 1) total -= gauss(g.x_hi) * f(n - 1);
    }
    return total;
  }

  SampledSources s_;
  HeatOracleOptions opt_;
  QuadratureRule gl_;
};

inline HeatLowerBoundReport solve_heat_with_sources(const SampledSources& src, const HeatOracleOptions& opt = {}) {
  return HeatOracle(src, opt).solve();
}

inline HeatLowerBoundReport solve_heat_with_sources(const HeatSourceSpec& spec, const Grid1D& grid, double t_end,
                                                    std::size_t n_times = 41, const HeatOracleOptions& opt = {}) {
  return HeatOracle(sample_sources(spec, grid, t_end, n_times), opt).solve();
}

// ---------------------------------------------------------------------------
// Density floor of a gas trajectory

struct FloorRow {
  double t = 0.0;
  double min_rho = 0.0;
  double oracle_floor = 0.0;
  bool verdict = false;
};

struct FloorOptions {
  std::size_t nodes = 200;  // oracle grid
  double tol = 0.05;        // relative slack on the floor
  std::size_t near_origin_nodes = 5;
  HeatOracleOptions heat{};
};

struct FloorReport {
  std::vector<FloorRow> rows;
  double min_rho = std::numeric_limits<double>::infinity();  // over the run (rho~ for the origin system)
  double oracle_floor = 0.0;                                  // exp(min w)
  double proof_floor = 0.0;                                   // exp(min(w0 + w2 + w3))
  double mismatch = 0.0;
  double min_w1 = 0.0;
  bool near_origin_ok = true;
  bool verdict = false;
  HeatLowerBoundReport heat;
};

/// Builds the log-density heat problem from a trajectory and compares the run's minimum density
/// with the oracle's floor. For the origin system the problem is posed for rho~ = rho x^-c in xi:
///   e_t - eps e_xixi = eps (e_xi - u/(2 eps))^2 - u^2/(4 eps) - k(x) u - u_xi,
/// k(x) = (N - 1 + d) x^(d - c - 1), u = m~/rho~; the exterior system is the case c = d = 0.
inline FloorReport density_floor_of_run(const Trajectory& traj, const FloorOptions& opt = {}) {
  traj.validate();
  const double eps = traj.eps;
  const bool origin = traj.system == GasSystem::scaled_origin;
  const double c = origin ? traj.ctrl.c : 0.0, d = origin ? traj.ctrl.d : 0.0;
  const XiMap map{c, d};
  const Grid1D& rg = traj.grid();
  const std::size_t rn = rg.nx;
  const double n1d = static_cast<double>(traj.ctrl.N_dim - 1) + d;

  FloorReport rep;
  std::vector<std::vector<double>> e_rows, u_rows;
  for (const GasField& f : traj.snapshots) {
    std::vector<double> e(rn), u(rn);
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rn; ++i) {
      if (!(f[i].rho > 0.0)) throw PositivityError("density_floor_of_run: non-positive density", i, rg.x(i), f.time);
      const GasState st = origin ? scale_state(f[i], rg.x(i), traj.ctrl) : f[i];
      e[i] = std::log(st.rho);
      u[i] = st.mom / st.rho;
      mn = std::min(mn, st.rho);
    }
    rep.rows.push_back({f.time, mn, 0.0, false});
    rep.min_rho = std::min(rep.min_rho, mn);
    e_rows.push_back(std::move(e));
    u_rows.push_back(std::move(u));
  }

  // Sources at run nodes.
  const double h = rg.dx();
  auto sources_at = [&](std::size_t k, std::vector<double>& f1, std::vector<double>& f2, std::vector<double>& hh) {
    const auto& e = e_rows[k];
    const auto& u = u_rows[k];
    f1.resize(rn);
    f2.resize(rn);
    hh.resize(rn);
    for (std::size_t i = 0; i < rn; ++i) {
      double ex;
      if (i == 0) ex = (e[1] - e[0]) / h;
      else if (i + 1 == rn) ex = (e[rn - 1] - e[rn - 2]) / h;
      else ex = (e[i + 1] - e[i - 1]) / (2.0 * h);
      const double x = rg.x(i);
      const double e_xi = ex * std::pow(x, d - c);  // dx/dxi = x^(d-c)
      const double q = e_xi - u[i] / (2.0 * eps);
      f1[i] = eps * q * q;
      f2[i] = -u[i] * u[i] / (4.0 * eps) - n1d * std::pow(x, d - c - 1.0) * u[i];
      hh[i] = -u[i];
    }
  };

  // Oracle grid, uniform in xi.
  const double xi_a = map.xi(rg.x_lo), xi_b = map.xi(rg.x_hi);
  SampledSources src;
  src.grid = Grid1D(xi_a, xi_b, opt.nodes);
  src.eps = eps;
  const double t0 = traj.t_begin();
  std::vector<double> xs(opt.nodes);
  for (std::size_t j = 0; j < opt.nodes; ++j) xs[j] = std::clamp(map.x(src.grid.x(j)), rg.x_lo, rg.x_hi);
  xs.front() = rg.x_lo;
  xs.back() = rg.x_hi;
  auto resample = [&](const std::vector<double>& v) {
    std::vector<double> out(opt.nodes);
    for (std::size_t j = 0; j < opt.nodes; ++j) {
      const double pos = std::clamp((xs[j] - rg.x_lo) / h, 0.0, static_cast<double>(rn - 1));
      const std::size_t i = std::min(static_cast<std::size_t>(pos), rn - 2);
      const double w = pos - static_cast<double>(i);
      out[j] = (1.0 - w) * v[i] + w * v[i + 1];
    }
    return out;
  };
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    std::vector<double> f1, f2, hh;
    sources_at(k, f1, f2, hh);
    src.times.push_back(traj.snapshots[k].time - t0);
    src.f1.push_back(resample(f1));
    src.f2.push_back(resample(f2));
    src.h.push_back(resample(hh));
  }
  src.varphi = resample(e_rows.front());

  rep.heat = solve_heat_with_sources(src, opt.heat);
  rep.oracle_floor = std::exp(rep.heat.min_w);
  rep.proof_floor = std::exp(rep.heat.proof_bound);
  rep.mismatch = rep.heat.mismatch;
  rep.min_w1 = rep.heat.min_w1;
  bool all = true;
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    rep.rows[k].oracle_floor = std::exp(rep.heat.min_up_to(k));
    rep.rows[k].verdict = rep.rows[k].min_rho >= rep.rows[k].oracle_floor * (1.0 - opt.tol);
    all = all && rep.rows[k].verdict;
  }
  if (origin) {
    for (const GasField& f : traj.snapshots)
      for (std::size_t i = 0; i < std::min(opt.near_origin_nodes, rn); ++i)
        if (f[i].rho < rep.oracle_floor * (1.0 - opt.tol) * std::pow(rg.x(i), c)) rep.near_origin_ok = false;
  }
  rep.verdict = all && rep.near_origin_ok && rep.min_rho >= rep.oracle_floor * (1.0 - opt.tol);
  return rep;
}

}  // namespace sphvisc
