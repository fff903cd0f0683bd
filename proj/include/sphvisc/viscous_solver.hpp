#pragma once

// Explicit finite-difference integration of the viscous gas systems and of the
// generic 2x2 parabolic system used for maximum-principle checks.
//
// All spatial derivatives are second-order central differences; time integration
// is the explicit midpoint rule. Boundary nodes are Dirichlet and are reassigned
// after every stage.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sphvisc/control_params.hpp"
#include "sphvisc/errors.hpp"
#include "sphvisc/field.hpp"
#include "sphvisc/gas_core.hpp"

namespace sphvisc {

enum class GasSystem {
  exterior,       // rho_t + m_x = -(N-1) m/x + eps rho_xx, momentum with the extra -2 eps alpha M2 x^(-alpha-1) rho_x
  scaled_origin,  // x-weighted viscosity obtained from eps (rho~_xixi, m~_xixi) in the scaled variables
};

struct Dirichlet {
  GasState left;
  GasState right;
};

struct SolverConfig {
  double eps = 1e-2;
  double cfl = 0.4;
  int N_dim = 3;
  double t_end = 1.0;
  Dirichlet boundary{};
  bool extra_visc_term = true;
  /// Optional time-dependent boundary values; overrides `boundary` when set.
  std::function<Dirichlet(double t)> boundary_fn;
  /// Optional additive forcing (rho, m) of the right-hand side, e.g. for manufactured solutions.
  std::function<GasState(double x, double t)> forcing;

  void validate() const {
    if (!(eps > 0.0)) throw DomainError("SolverConfig: eps must be positive");
    if (!(cfl > 0.0 && cfl <= 0.9)) throw DomainError("SolverConfig: cfl must lie in (0, 0.9]");
    if (N_dim < 1) throw DomainError("SolverConfig: dimension must be positive");
  }

  Dirichlet boundary_at(double t) const { return boundary_fn ? boundary_fn(t) : boundary; }
};

/// Per-node coefficients of one of the two gas systems on a fixed grid.
///
/// Density viscosity:  eps (vw rho_xx + vr1 rho_x + vr0 rho)
/// Momentum viscosity: eps (vw m_xx + vm1 m_x + vm0 m) - extra rho_x
class GasStepper {
 public:
  GasStepper(GasSystem system, const Grid1D& grid, const EosParams& eos, const SolverConfig& cfg,
             const ControlParams& ctrl)
      : system_(system), grid_(grid), eos_(eos), cfg_(cfg), ctrl_(ctrl) {
    cfg_.validate();
    const std::size_t n = grid.nx;
    x_.resize(n);
    geo_.resize(n);
    vw_.assign(n, 1.0);
    vr1_.assign(n, 0.0);
    vr0_.assign(n, 0.0);
    vm1_.assign(n, 0.0);
    vm0_.assign(n, 0.0);
    extra_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.x(i);
      if (!(x > 0.0)) throw DomainError("GasStepper: grid must lie in x > 0");
      x_[i] = x;
      geo_[i] = static_cast<double>(cfg_.N_dim - 1) / x;
      if (system == GasSystem::exterior) {
        if (cfg_.extra_visc_term) {
          extra_[i] = 2.0 * cfg_.eps * ctrl.alpha * ctrl.M2 * std::pow(x, -ctrl.alpha - 1.0);
        }
      } else {
        const double c = ctrl.c, d = ctrl.d;
        const double k = 2.0 * (d - c);
        vw_[i] = std::pow(x, k);
        vr1_[i] = (d - 3.0 * c) * std::pow(x, k - 1.0);
        vr0_[i] = c * (2.0 * c + 1.0 - d) * std::pow(x, k - 2.0);
        vm1_[i] = -(c + d) * std::pow(x, k - 1.0);
        vm0_[i] = d * (c + 1.0) * std::pow(x, k - 2.0);
      }
    }
    drho_.resize(n);
    dmom_.resize(n);
    flux_.resize(n);
  }

  GasSystem system() const { return system_; }
  const SolverConfig& config() const { return cfg_; }
  const Grid1D& grid() const { return grid_; }

  /// Largest stable step: cfl * min over nodes of min(dx / max|lambda|, dx^2 / (2 eps_eff)).
  double stable_dt(const GasField& f) const {
    const double dx = grid_.dx();
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.nx(); ++i) {
      const GasState& s = f[i];
      if (!(s.rho > 0.0)) throw PositivityError("stable_dt: non-positive density", i, x_[i], f.time);
      const double u = s.mom / s.rho;
      const double speed = std::abs(u) + eos_.theta * pow_fast(s.rho, eos_.theta);
      if (speed > 0.0) dt = std::min(dt, dx / speed);
      const double eff = cfg_.eps * vw_[i];
      if (eff > 0.0) dt = std::min(dt, dx * dx / (2.0 * eff));
    }
    return cfg_.cfl * dt;
  }

  /// One midpoint step in place. Throws CflError when dt exceeds stable_dt.
  void advance(GasField& f, double dt) {
    check_dt(f, dt);
    const double t0 = f.time;
    stage_ = f.data;
    rhs(f.data, t0);
    for (std::size_t i = 1; i + 1 < f.nx(); ++i) {
      stage_[i].rho += 0.5 * dt * drho_[i];
      stage_[i].mom += 0.5 * dt * dmom_[i];
    }
    apply_boundary(stage_, t0 + 0.5 * dt);
    check_positive(stage_, t0 + 0.5 * dt);
    rhs(stage_, t0 + 0.5 * dt);
    for (std::size_t i = 1; i + 1 < f.nx(); ++i) {
      f[i].rho += dt * drho_[i];
      f[i].mom += dt * dmom_[i];
    }
    f.time = t0 + dt;
    apply_boundary(f.data, f.time);
    check_positive(f.data, f.time);
  }

  /// Time derivative of the interior nodes (boundary entries are zero).
  std::pair<std::vector<double>, std::vector<double>> time_derivative(const GasField& f) {
    rhs(f.data, f.time);
    std::vector<double> r(drho_.begin(), drho_.end()), m(dmom_.begin(), dmom_.end());
    r.front() = r.back() = m.front() = m.back() = 0.0;
    return {r, m};
  }

  /// Steps until f.time == t_target, shortening the last step to land exactly.
  void advance_to(GasField& f, double t_target) {
    while (f.time < t_target) {
      double dt = stable_dt(f);
      const double remaining = t_target - f.time;
      if (dt >= remaining * (1.0 - 1e-12)) {
        dt = remaining;
        advance(f, dt);
        f.time = t_target;
      } else {
        // Avoid a vanishing final step.
        if (remaining - dt < 0.25 * dt) dt = 0.5 * remaining;
        advance(f, dt);
      }
    }
  }

 private:
  void check_dt(const GasField& f, double dt) const {
    if (!(dt > 0.0)) throw CflError("time step must be positive");
    const double limit = stable_dt(f);
    if (dt > limit * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "time step " << dt << " exceeds stability limit " << limit;
      throw CflError(os.str());
    }
  }

  void apply_boundary(std::vector<GasState>& u, double t) const {
    const Dirichlet bc = cfg_.boundary_at(t);
    u.front() = bc.left;
    u.back() = bc.right;
  }

  void check_positive(const std::vector<GasState>& u, double t) const {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(u[i].rho > 0.0)) {
        std::ostringstream os;
        os << "density lost positivity at node " << i << " (x = " << x_[i] << ", t = " << t
           << ", rho = " << u[i].rho << ")";
        throw PositivityError(os.str(), i, x_[i], t);
      }
    }
  }

  void rhs(const std::vector<GasState>& u, double t) {
    const std::size_t n = u.size();
    const double dx = grid_.dx();
    const double inv2dx = 0.5 / dx;
    const double invdx2 = 1.0 / (dx * dx);
    const double eps = cfg_.eps;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = u[i].rho;
      flux_[i] = u[i].mom * u[i].mom / r + eos_.p0 * pow_fast(r, eos_.gamma);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const GasState& l = u[i - 1];
      const GasState& c = u[i];
      const GasState& r = u[i + 1];
      const double rho_x = (r.rho - l.rho) * inv2dx;
      const double rho_xx = (r.rho - 2.0 * c.rho + l.rho) * invdx2;
      const double m_x = (r.mom - l.mom) * inv2dx;
      const double m_xx = (r.mom - 2.0 * c.mom + l.mom) * invdx2;
      const double visc_rho = vw_[i] * rho_xx + vr1_[i] * rho_x + vr0_[i] * c.rho;
      const double visc_mom = vw_[i] * m_xx + vm1_[i] * m_x + vm0_[i] * c.mom;
      drho_[i] = -m_x - geo_[i] * c.mom + eps * visc_rho;
      dmom_[i] = -(flux_[i + 1] - flux_[i - 1]) * inv2dx - geo_[i] * c.mom * c.mom / c.rho + eps * visc_mom -
                 extra_[i] * rho_x;
    }
    if (cfg_.forcing) {
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const GasState s = cfg_.forcing(x_[i], t);
        drho_[i] += s.rho;
        dmom_[i] += s.mom;
      }
    }
  }

  GasSystem system_;
  Grid1D grid_;
  EosParams eos_;
  SolverConfig cfg_;
  ControlParams ctrl_;
  std::vector<double> x_, geo_, vw_, vr1_, vr0_, vm1_, vm0_, extra_;
  std::vector<double> drho_, dmom_, flux_;
  std::vector<GasState> stage_;
};

/// One step of the exterior viscous system on [1, b].
inline GasField step_exterior(const GasField& f, const EosParams& eos, const SolverConfig& cfg,
                              const ControlParams& ctrl, double dt) {
  GasStepper stepper(GasSystem::exterior, f.grid, eos, cfg, ctrl);
  GasField out = f;
  stepper.advance(out, dt);
  return out;
}

/// One step of the origin-including viscous system written in (rho, m, x) on [a, b].
inline GasField step_scaled_origin(const GasField& f, const EosParams& eos, const SolverConfig& cfg,
                                   const ControlParams& ctrl, double dt) {
  GasStepper stepper(GasSystem::scaled_origin, f.grid, eos, cfg, ctrl);
  GasField out = f;
  stepper.advance(out, dt);
  return out;
}

/// Stability-limited step for a gas field; the scaled system includes the x^(2(d-c)) weight.
inline double cfl_dt(const GasField& f, const EosParams& eos, const SolverConfig& cfg,
                     GasSystem system = GasSystem::exterior, const ControlParams& ctrl = {}) {
  if (f.data.empty()) return std::numeric_limits<double>::infinity();
  return GasStepper(system, f.grid, eos, cfg, ctrl).stable_dt(f);
}

// ---------------------------------------------------------------------------
// Scaled variables on a uniform xi grid.

/// Map between x and xi = x^(c-d+1)/(c-d+1), or xi = ln x when c - d + 1 = 0.
struct XiMap {
  double c = 0.0;
  double d = 0.0;

  double k() const { return c - d + 1.0; }
  bool logarithmic() const { return std::abs(k()) < 1e-14; }
  double xi(double x) const {
    if (!(x > 0.0)) throw DomainError("XiMap: x must be positive");
    return logarithmic() ? std::log(x) : std::pow(x, k()) / k();
  }
  double x(double xi) const {
    if (logarithmic()) return std::exp(xi);
    const double base = k() * xi;
    if (!(base > 0.0)) throw DomainError("XiMap: xi outside the image of x > 0");
    return std::pow(base, 1.0 / k());
  }
};

/// One midpoint step of the scaled system in conservative form on a uniform xi grid:
///   rho~_t + m~_xi = -(N-1+d) x^(d-c-1) m~ + eps rho~_xixi
///   m~_t + (m~^2/rho~ + p(rho~))_xi = [-(2d-c+N-1) m~^2/rho~ - (2d-c) p(rho~)] x^(d-c-1) + eps m~_xixi
/// The field stores (rho~, m~); boundary nodes keep their values. cfg.forcing is evaluated at (xi, t).
inline GasField step_scaled_xi(const GasField& f, const EosParams& eos, const SolverConfig& cfg,
                               const ControlParams& ctrl, double dt) {
  cfg.validate();
  const XiMap map{ctrl.c, ctrl.d};
  const std::size_t n = f.nx();
  const double dxi = f.dx();
  const double nm1 = static_cast<double>(cfg.N_dim - 1);
  std::vector<double> src(n);
  for (std::size_t i = 0; i < n; ++i) src[i] = std::pow(map.x(f.x(i)), ctrl.d - ctrl.c - 1.0);
  auto rhs = [&](const std::vector<GasState>& u, double t, std::vector<GasState>& out) {
    std::vector<double> flux(n);
    for (std::size_t i = 0; i < n; ++i) flux[i] = u[i].mom * u[i].mom / u[i].rho + pressure(u[i].rho, eos);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double m_xi = (u[i + 1].mom - u[i - 1].mom) / (2.0 * dxi);
      const double r_xixi = (u[i + 1].rho - 2.0 * u[i].rho + u[i - 1].rho) / (dxi * dxi);
      const double m_xixi = (u[i + 1].mom - 2.0 * u[i].mom + u[i - 1].mom) / (dxi * dxi);
      const double m2r = u[i].mom * u[i].mom / u[i].rho;
      out[i].rho = -m_xi - (nm1 + ctrl.d) * src[i] * u[i].mom + cfg.eps * r_xixi;
      out[i].mom = -(flux[i + 1] - flux[i - 1]) / (2.0 * dxi) +
                   (-(2.0 * ctrl.d - ctrl.c + nm1) * m2r - (2.0 * ctrl.d - ctrl.c) * pressure(u[i].rho, eos)) * src[i] +
                   cfg.eps * m_xixi;
      if (cfg.forcing) {
        const GasState g = cfg.forcing(f.x(i), t);
        out[i].rho += g.rho;
        out[i].mom += g.mom;
      }
    }
  };
  std::vector<GasState> k(n), stage = f.data;
  rhs(f.data, f.time, k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    stage[i].rho += 0.5 * dt * k[i].rho;
    stage[i].mom += 0.5 * dt * k[i].mom;
  }
  rhs(stage, f.time + 0.5 * dt, k);
  GasField out = f;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i].rho += dt * k[i].rho;
    out[i].mom += dt * k[i].mom;
    if (!(out[i].rho > 0.0)) throw PositivityError("step_scaled_xi: density lost positivity", i, f.x(i), f.time + dt);
  }
  out.time = f.time + dt;
  return out;
}

// ---------------------------------------------------------------------------
// Generic 2x2 system p_t + mu1 p_x = D p_xx + a11 p + a12 q + R1 (and likewise for q).

struct CoeffArgs {
  double x = 0.0;
  double t = 0.0;
  double p = 0.0;
  double q = 0.0;
  double p_x = 0.0;
  double q_x = 0.0;
};

using CoeffFn = std::function<double(const CoeffArgs&)>;

struct GenericCoeffs {
  CoeffFn mu1, mu2, a11, a12, a21, a22, r1, r2;

  static CoeffFn zero() {
    return [](const CoeffArgs&) { return 0.0; };
  }
  static GenericCoeffs zeros() { return {zero(), zero(), zero(), zero(), zero(), zero(), zero(), zero()}; }
};

namespace detail {
inline double eval_coeff(const CoeffFn& fn, const CoeffArgs& a, const char* name) {
  const double v = fn ? fn(a) : 0.0;
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "generic coefficient " << name << " is not finite at x = " << a.x << ", t = " << a.t;
    throw CoefficientError(os.str());
  }
  return v;
}
}  // namespace detail

using PQBoundaryFn = std::function<std::pair<PQ, PQ>(double t)>;

/// One midpoint step of the generic system with diffusion coefficient `diffusion`.
/// Boundary nodes take `boundary(t)` when given, otherwise keep their current values.
inline PQField step_generic(const PQField& f, const GenericCoeffs& co, double diffusion, double dt,
                            const PQBoundaryFn& boundary = {}) {
  if (!(dt > 0.0)) throw CflError("step_generic: time step must be positive");
  const std::size_t n = f.nx();
  const double dx = f.dx();
  auto rhs = [&](const std::vector<PQ>& u, double t, std::vector<PQ>& out) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      CoeffArgs a;
      a.x = f.x(i);
      a.t = t;
      a.p = u[i].p;
      a.q = u[i].q;
      a.p_x = (u[i + 1].p - u[i - 1].p) / (2.0 * dx);
      a.q_x = (u[i + 1].q - u[i - 1].q) / (2.0 * dx);
      const double p_xx = (u[i + 1].p - 2.0 * u[i].p + u[i - 1].p) / (dx * dx);
      const double q_xx = (u[i + 1].q - 2.0 * u[i].q + u[i - 1].q) / (dx * dx);
      const double mu1 = detail::eval_coeff(co.mu1, a, "mu1");
      const double mu2 = detail::eval_coeff(co.mu2, a, "mu2");
      const double a11 = detail::eval_coeff(co.a11, a, "a11");
      const double a12 = detail::eval_coeff(co.a12, a, "a12");
      const double a21 = detail::eval_coeff(co.a21, a, "a21");
      const double a22 = detail::eval_coeff(co.a22, a, "a22");
      const double r1 = detail::eval_coeff(co.r1, a, "R1");
      const double r2 = detail::eval_coeff(co.r2, a, "R2");
      out[i].p = -mu1 * a.p_x + diffusion * p_xx + a11 * a.p + a12 * a.q + r1;
      out[i].q = -mu2 * a.q_x + diffusion * q_xx + a21 * a.p + a22 * a.q + r2;
    }
  };
  auto set_boundary = [&](std::vector<PQ>& u, double t) {
    if (boundary) {
      const auto [l, r] = boundary(t);
      u.front() = l;
      u.back() = r;
    } else {
      u.front() = f.data.front();
      u.back() = f.data.back();
    }
  };
  std::vector<PQ> k(n), stage = f.data;
  rhs(f.data, f.time, k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    stage[i].p += 0.5 * dt * k[i].p;
    stage[i].q += 0.5 * dt * k[i].q;
  }
  set_boundary(stage, f.time + 0.5 * dt);
  rhs(stage, f.time + 0.5 * dt, k);
  PQField out = f;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i].p += dt * k[i].p;
    out[i].q += dt * k[i].q;
  }
  out.time = f.time + dt;
  set_boundary(out.data, out.time);
  return out;
}

/// Stability-limited step for the generic system given bounds on |mu| and |a_ij|.
inline double generic_stable_dt(const Grid1D& grid, double diffusion, double mu_max, double a_max, double cfl = 0.4) {
  const double dx = grid.dx();
  double dt = dx * dx / (2.0 * diffusion);
  if (mu_max > 0.0) dt = std::min(dt, dx / mu_max);
  if (a_max > 0.0) dt = std::min(dt, 1.0 / a_max);
  return cfl * dt;
}

}  // namespace sphvisc
