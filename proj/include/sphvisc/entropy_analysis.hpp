#pragma once

// Discrete weak-form residuals, entropy production, dissipation integrals and
// Cauchy tables for families of viscous trajectories.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <limits>
#include <string>
#include <vector>

#include "sphvisc/control_params.hpp"
#include "sphvisc/errors.hpp"
#include "sphvisc/field.hpp"
#include "sphvisc/gas_core.hpp"
#include "sphvisc/quadrature.hpp"
#include "sphvisc/viscous_solver.hpp"

namespace sphvisc {

struct Trajectory {
  std::vector<GasField> snapshots;  // physical (rho, m), one shared grid
  EosParams eos;
  ControlParams ctrl;
  double eps = 0.0;
  GasSystem system = GasSystem::exterior;

  const Grid1D& grid() const { return snapshots.front().grid; }
  double t_begin() const { return snapshots.front().time; }
  double t_end() const { return snapshots.back().time; }

  void validate() const {
    if (snapshots.size() < 2) throw PreconditionError("trajectory needs at least two snapshots");
    const Grid1D& g = grid();
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
      const Grid1D& h = snapshots[k].grid;
      if (h.nx != g.nx || h.x_lo != g.x_lo || h.x_hi != g.x_hi) throw PreconditionError("trajectory snapshots must share one grid");
      if (k > 0 && !(snapshots[k].time > snapshots[k - 1].time)) throw PreconditionError("trajectory times must increase");
    }
  }

  /// Trapezoid weights over the snapshot times.
  std::vector<double> time_weights() const {
    std::vector<double> w(snapshots.size(), 0.0);
    for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
      const double h = snapshots[k + 1].time - snapshots[k].time;
      w[k] += 0.5 * h;
      w[k + 1] += 0.5 * h;
    }
    return w;
  }
};

// ---------------------------------------------------------------------------
// Test functions

/// amp * B((x - x0)/rx) B((t - t0)/rt), B(r) = e * exp(1/(r^2 - 1)) on |r| < 1 (peak value 1).
struct TestFunction {
  double x0 = 0.0, t0 = 0.0, rx = 1.0, rt = 1.0;
  double amp = 1.0;
  bool nonnegative = true;
  std::string id;

  static double b(double r) {
    const double r2 = r * r;
    return r2 < 1.0 ? std::exp(1.0 + 1.0 / (r2 - 1.0)) : 0.0;
  }
  static double db(double r) {
    const double r2 = r * r;
    if (!(r2 < 1.0)) return 0.0;
    const double q = r2 - 1.0;
    return b(r) * (-2.0 * r / (q * q));
  }

  double value(double x, double t) const { return amp * b((x - x0) / rx) * b((t - t0) / rt); }
  double d_x(double x, double t) const { return amp * db((x - x0) / rx) / rx * b((t - t0) / rt); }
  double d_t(double x, double t) const { return amp * b((x - x0) / rx) * db((t - t0) / rt) / rt; }

  bool inside_space(double lo, double hi) const { return x0 - rx > lo && x0 + rx < hi; }
};

/// The fixed family of 12 placements over [x_lo, x_hi] x [t_lo, t_hi]:
/// near-boundary interior, bulk, and late time.
inline std::vector<TestFunction> standard_test_functions(double x_lo, double x_hi, double t_lo, double t_hi) {
  struct P {
    double xf, tf, rxf, rtf;
    const char* id;
  };
  static const P placements[] = {
      {0.06, 0.50, 0.05, 0.30, "edge-left"},  {0.94, 0.50, 0.05, 0.30, "edge-right"},
      {0.10, 0.30, 0.08, 0.20, "near-left"},  {0.90, 0.70, 0.08, 0.20, "near-right"},
      {0.25, 0.50, 0.15, 0.40, "bulk-1"},     {0.50, 0.50, 0.20, 0.40, "bulk-2"},
      {0.75, 0.50, 0.15, 0.40, "bulk-3"},     {0.35, 0.30, 0.10, 0.25, "bulk-4"},
      {0.60, 0.60, 0.10, 0.30, "bulk-5"},     {0.30, 0.85, 0.20, 0.14, "late-1"},
      {0.50, 0.85, 0.30, 0.14, "late-2"},     {0.70, 0.85, 0.20, 0.14, "late-3"},
  };
  const double L = x_hi - x_lo, T = t_hi - t_lo;
  std::vector<TestFunction> out;
  for (const P& p : placements) {
    TestFunction f;
    f.x0 = x_lo + p.xf * L;
    f.t0 = t_lo + p.tf * T;
    f.rx = p.rxf * L;
    f.rt = p.rtf * T;
    f.id = p.id;
    out.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Source G(x, v) = (-(N-1) m / x, -(N-1) m^2 / (rho x)).

inline GasState geometric_source(const GasState& s, double x, int N_dim) {
  const double k = static_cast<double>(N_dim - 1) / x;
  return {-k * s.mom, -k * s.mom * s.mom / s.rho};
}

struct WeakResidual {
  double mass = 0.0;
  double momentum = 0.0;

  double magnitude() const { return std::hypot(mass, momentum); }
};

namespace detail {
inline void check_support(const Trajectory& traj, const TestFunction& phi, bool allow_initial) {
  const Grid1D& g = traj.grid();
  if (!phi.inside_space(g.x_lo, g.x_hi)) throw DomainError("test function " + phi.id + " leaves the spatial domain");
  if (phi.t0 + phi.rt > traj.t_end()) throw DomainError("test function " + phi.id + " extends past the last snapshot");
  if (!allow_initial && phi.t0 - phi.rt < traj.t_begin())
    throw DomainError("test function " + phi.id + " reaches the initial time");
}
}  // namespace detail

/// Trapezoidal evaluation of
///   int int (v Phi_t + F(v) Phi_x + G(x, v) Phi) dx dt + int v0 Phi(x, 0) dx
/// with v0 the first snapshot.
inline WeakResidual weak_residual(const Trajectory& traj, const TestFunction& phi) {
  traj.validate();
  detail::check_support(traj, phi, true);
  if (phi.amp == 0.0) return {};
  const Grid1D& g = traj.grid();
  const auto wx = trapezoid_weights(g.nx, g.dx());
  const auto wt = traj.time_weights();
  const int N = traj.ctrl.N_dim;
  WeakResidual r;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const GasField& f = traj.snapshots[k];
    const double t = f.time;
    if (std::abs(t - phi.t0) >= phi.rt && k != 0) continue;
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double x = g.x(i);
      if (std::abs(x - phi.x0) >= phi.rx) continue;
      const GasState& v = f[i];
      const double pt = phi.d_t(x, t), px = phi.d_x(x, t), p = phi.value(x, t);
      const GasState G = geometric_source(v, x, N);
      const double flux_m = v.mom * v.mom / v.rho + pressure(v.rho, traj.eos);
      r.mass += wt[k] * wx[i] * (v.rho * pt + v.mom * px + G.rho * p);
      r.momentum += wt[k] * wx[i] * (v.mom * pt + flux_m * px + G.mom * p);
      if (k == 0) {
        r.mass += wx[i] * v.rho * p;
        r.momentum += wx[i] * v.mom * p;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Entropy pairs

struct EntropyGenerator {
  std::string id;
  std::function<double(double)> g;
  std::function<double(double)> dg;
  bool convex = true;
};

struct EntropyPairSpec {
  std::string id = "mechanical";
  bool mechanical = true;
  EntropyGenerator gen;
};

inline EntropyPairSpec mechanical_pair() { return {}; }

inline EntropyPairSpec weak_pair(EntropyGenerator gen) {
  EntropyPairSpec s;
  s.id = "weak:" + gen.id;
  s.mechanical = false;
  s.gen = std::move(gen);
  return s;
}

/// Generating functions for weak entropies. "one" gives the linear entropy rho (times the
/// weight mass); "sin" is non-convex and informational only.
inline std::vector<EntropyGenerator> g_family(double delta = 0.1) {
  std::vector<EntropyGenerator> f;
  f.push_back({"one", [](double) { return 1.0; }, [](double) { return 0.0; }, true});
  f.push_back({"xi", [](double s) { return s; }, [](double) { return 1.0; }, true});
  f.push_back({"xi2", [](double s) { return s * s; }, [](double s) { return 2.0 * s; }, true});
  f.push_back({"exp", [](double s) { return std::exp(s); }, [](double s) { return std::exp(s); }, true});
  f.push_back({"exp_neg", [](double s) { return std::exp(-s); }, [](double s) { return -std::exp(-s); }, true});
  for (double k : {-0.5, 0.0, 0.5}) {
    const std::string id = "smooth_abs(" + std::to_string(k).substr(0, std::to_string(k).find('.') + 2) + ")";
    f.push_back({id, [k, delta](double s) { return std::sqrt((s - k) * (s - k) + delta * delta); },
                 [k, delta](double s) { return (s - k) / std::sqrt((s - k) * (s - k) + delta * delta); }, true});
  }
  f.push_back({"sin", [](double s) { return std::sin(s); }, [](double s) { return std::cos(s); }, false});
  return f;
}

struct PairValues {
  EntropyPair pair;
  EntropyGradient grad;
};

class EntropyEvaluator {
 public:
  EntropyEvaluator(const EntropyPairSpec& spec, const EosParams& eos) : spec_(spec), eos_(eos) {
    if (!spec.mechanical) rule_.emplace(eos);
  }

  PairValues operator()(const GasState& s) const {
    if (spec_.mechanical) return {mechanical_entropy(s, eos_), mechanical_entropy_gradient(s, eos_)};
    return {weak_entropy(s, *rule_, spec_.gen.g), weak_entropy_gradient(s, *rule_, spec_.gen.g, spec_.gen.dg)};
  }

 private:
  EntropyPairSpec spec_;
  EosParams eos_;
  std::optional<WeakEntropyRule> rule_;
};

/// D(Phi) = int int (eta Phi_t + q Phi_x + grad(eta) . G Phi) dx dt; nonnegative for entropy solutions.
inline double entropy_production(const Trajectory& traj, const EntropyPairSpec& pair, const TestFunction& phi) {
  traj.validate();
  if (!phi.nonnegative || phi.amp < 0.0) throw PreconditionError("entropy_production: test function must be nonnegative");
  detail::check_support(traj, phi, false);
  if (phi.amp == 0.0) return 0.0;
  const EntropyEvaluator eval(pair, traj.eos);
  const Grid1D& g = traj.grid();
  const auto wx = trapezoid_weights(g.nx, g.dx());
  const auto wt = traj.time_weights();
  const int N = traj.ctrl.N_dim;
  double D = 0.0;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const GasField& f = traj.snapshots[k];
    const double t = f.time;
    if (std::abs(t - phi.t0) >= phi.rt) continue;
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double x = g.x(i);
      if (std::abs(x - phi.x0) >= phi.rx) continue;
      const PairValues pv = eval(f[i]);
      const GasState G = geometric_source(f[i], x, N);
      D += wt[k] * wx[i] *
           (pv.pair.eta * phi.d_t(x, t) + pv.pair.q * phi.d_x(x, t) +
            (pv.grad.d_rho * G.rho + pv.grad.d_mom * G.mom) * phi.value(x, t));
    }
  }
  return D;
}

// ---------------------------------------------------------------------------
// Dissipation and convergence

struct Window {
  double x_lo = 0.0, x_hi = 0.0, t_lo = 0.0, t_hi = 0.0;
};

namespace detail {
/// Indices of grid nodes inside [lo, hi] and trapezoid weights restricted to them.
inline std::pair<std::size_t, std::size_t> node_range(const Grid1D& g, double lo, double hi) {
  std::size_t i0 = g.nx, i1 = 0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    if (x >= lo - 1e-12 && x <= hi + 1e-12) {
      i0 = std::min(i0, i);
      i1 = std::max(i1, i);
    }
  }
  if (i0 >= i1) throw DomainError("window contains fewer than two grid nodes");
  return {i0, i1};
}

inline std::vector<std::size_t> time_range(const Trajectory& traj, double lo, double hi) {
  std::vector<std::size_t> ks;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const double t = traj.snapshots[k].time;
    if (t >= lo - 1e-12 && t <= hi + 1e-12) ks.push_back(k);
  }
  if (ks.size() < 2) throw DomainError("window contains fewer than two snapshots");
  return ks;
}

inline std::vector<double> trapezoid_on(const std::vector<double>& pts) {
  std::vector<double> w(pts.size(), 0.0);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double h = pts[k + 1] - pts[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}
}  // namespace detail

/// int int eps (rho^(gamma-2) rho_x^2 + rho u_x^2) weight dx dt, weight x^(2(d-c)) for the origin system.
inline double dissipation_integral(const Trajectory& traj, const Window& win) {
  traj.validate();
  const Grid1D& g = traj.grid();
  if (!(win.x_lo > g.x_lo && win.x_hi < g.x_hi && win.x_hi > win.x_lo))
    throw DomainError("dissipation window must lie strictly inside the domain");
  const auto [i0, i1] = detail::node_range(g, win.x_lo, win.x_hi);
  const auto ks = detail::time_range(traj, win.t_lo, win.t_hi);
  std::vector<double> ts;
  for (std::size_t k : ks) ts.push_back(traj.snapshots[k].time);
  const auto wt = detail::trapezoid_on(ts);
  const auto wx = trapezoid_weights(i1 - i0 + 1, g.dx());
  const double dx2 = 2.0 * g.dx();
  const double k_w = 2.0 * (traj.ctrl.d - traj.ctrl.c);
  const bool weighted = traj.system == GasSystem::scaled_origin && k_w != 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < ks.size(); ++n) {
    const GasField& f = traj.snapshots[ks[n]];
    double row = 0.0;
    for (std::size_t i = i0; i <= i1; ++i) {
      const GasState& l = f[i - 1];
      const GasState& c = f[i];
      const GasState& r = f[i + 1];
      const double rho_x = (r.rho - l.rho) / dx2;
      const double u_x = (r.mom / r.rho - l.mom / l.rho) / dx2;
      double v = pow_fast(c.rho, traj.eos.gamma - 2.0) * rho_x * rho_x + c.rho * u_x * u_x;
      if (weighted) v *= std::pow(g.x(i), k_w);
      row += wx[i - i0] * v;
    }
    total += wt[n] * row;
  }
  return traj.eps * total;
}

struct CauchyTable {
  std::vector<double> eps;
  std::vector<double> differences;  // ||v_i - v_{i+1}||_{L^p(window)}
  bool decreasing = false;
};

/// Differences between consecutive runs, interpolated to the finest grid at the shared snapshot times.
inline CauchyTable convergence_study(const std::vector<Trajectory>& runs, const Window& win, double p = 1.0) {
  if (runs.size() < 3) throw PreconditionError("convergence_study: need at least three runs");
  if (!(p >= 1.0)) throw PreconditionError("convergence_study: exponent must be >= 1");
  for (const auto& r : runs) r.validate();
  std::size_t finest = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].grid().nx > runs[finest].grid().nx) finest = i;
  const Grid1D& g = runs[finest].grid();
  const auto [i0, i1] = detail::node_range(g, win.x_lo, win.x_hi);
  const auto wx = trapezoid_weights(i1 - i0 + 1, g.dx());
  CauchyTable table;
  for (const auto& r : runs) table.eps.push_back(r.eps);
  for (std::size_t m = 0; m + 1 < runs.size(); ++m) {
    const Trajectory& A = runs[m];
    const Trajectory& B = runs[m + 1];
    const auto ka = detail::time_range(A, win.t_lo, win.t_hi);
    const auto kb = detail::time_range(B, win.t_lo, win.t_hi);
    if (ka.size() != kb.size()) throw PreconditionError("convergence_study: runs must share snapshot times");
    std::vector<double> ts;
    for (std::size_t n = 0; n < ka.size(); ++n) {
      const double ta = A.snapshots[ka[n]].time, tb = B.snapshots[kb[n]].time;
      if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta)))
        throw PreconditionError("convergence_study: runs must share snapshot times");
      ts.push_back(ta);
    }
    const auto wt = detail::trapezoid_on(ts);
    double acc = 0.0;
    for (std::size_t n = 0; n < ka.size(); ++n) {
      const GasField& fa = A.snapshots[ka[n]];
      const GasField& fb = B.snapshots[kb[n]];
      double row = 0.0;
      for (std::size_t i = i0; i <= i1; ++i) {
        const double x = g.x(i);
        const GasState va = interpolate(fa, x), vb = interpolate(fb, x);
        row += wx[i - i0] * (std::pow(std::abs(va.rho - vb.rho), p) + std::pow(std::abs(va.mom - vb.mom), p));
      }
      acc += wt[n] * row;
    }
    table.differences.push_back(std::pow(acc, 1.0 / p));
  }
  table.decreasing = true;
  for (std::size_t m = 1; m < table.differences.size(); ++m)
    if (!(table.differences[m] < table.differences[m - 1])) table.decreasing = false;
  return table;
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("log_log_slope: need two or more paired points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace sphvisc
