#pragma once

// Control functions, the admissible alpha range, and runtime checks of the
// invariant regions and of the sign conditions R1 <= 0, R2 >= 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sphvisc/control_params.hpp"
#include "sphvisc/errors.hpp"
#include "sphvisc/field.hpp"
#include "sphvisc/gas_core.hpp"

namespace sphvisc {

struct AlphaBounds {
  double min = 0.0;
  double max = 0.0;
  bool max_infinite = false;

  bool contains(double alpha) const { return alpha >= min && (max_infinite || alpha <= max); }
};

/// (N-1) theta / (1 + sqrt theta)^2 <= alpha <= (N-1) theta / (1 - sqrt theta)^2.
inline AlphaBounds alpha_bounds(int N_dim, const EosParams& eos) {
  if (!(eos.gamma > 1.0 && eos.gamma <= 3.0)) throw DomainError("alpha_bounds: gamma must lie in (1, 3]");
  if (N_dim < 2) throw DomainError("alpha_bounds: dimension must be at least 2");
  const double th = eos.theta, sq = std::sqrt(th), n1 = static_cast<double>(N_dim - 1);
  AlphaBounds b;
  b.min = n1 * th / ((1.0 + sq) * (1.0 + sq));
  if (th >= 1.0) {
    b.max = std::numeric_limits<double>::infinity();
    b.max_infinite = true;
  } else {
    b.max = n1 * th / ((1.0 - sq) * (1.0 - sq));
  }
  return b;
}

/// g(beta) = beta^2 (1-theta)^2 - 2 beta (1+theta) + 1.
inline double beta_poly(double beta, double theta) {
  return beta * beta * (1.0 - theta) * (1.0 - theta) - 2.0 * beta * (1.0 + theta) + 1.0;
}

struct BetaRoots {
  double beta1 = 0.0;
  double beta2 = 0.0;
  bool beta2_infinite = false;
  double g1 = 0.0;  // g(beta1)
  double g2 = 0.0;  // g(beta2), 0 when beta2 is infinite
  bool nonpositive_between = false;
  bool certified = false;
};

inline BetaRoots beta_roots(const EosParams& eos, double root_tol = 1e-10) {
  const double th = eos.theta;
  if (!(th > 0.0) || th > 1.0) throw DomainError("beta_roots: theta must lie in (0, 1]");
  const double sq = std::sqrt(th);
  BetaRoots r;
  r.beta1 = 1.0 / ((1.0 + sq) * (1.0 + sq));
  r.g1 = beta_poly(r.beta1, th);
  if (th >= 1.0) {
    r.beta2 = std::numeric_limits<double>::infinity();
    r.beta2_infinite = true;
  } else {
    r.beta2 = 1.0 / ((1.0 - sq) * (1.0 - sq));
    r.g2 = beta_poly(r.beta2, th);
  }
  // Sample the open interval; with an infinite right end, sample [beta1, beta1 + 1e3].
  const double hi = r.beta2_infinite ? r.beta1 + 1e3 : r.beta2;
  r.nonpositive_between = true;
  for (int k = 1; k < 200; ++k) {
    const double b = r.beta1 + (hi - r.beta1) * k / 200.0;
    if (beta_poly(b, th) > 0.0) r.nonpositive_between = false;
  }
  const double scale1 = std::max(1.0, r.beta1 * r.beta1);
  const double scale2 = r.beta2_infinite ? 1.0 : std::max(1.0, r.beta2 * r.beta2);
  r.certified = std::abs(r.g1) <= root_tol * scale1 && std::abs(r.g2) <= root_tol * scale2 && r.nonpositive_between;
  return r;
}

struct ControlFunctionSample {
  double phi = 0.0, psi = 0.0;
  double phi_x = 0.0, psi_x = 0.0;
  double phi_xx = 0.0, psi_xx = 0.0;
  double phi_t = 0.0, psi_t = 0.0;
};

/// phi = M1 - M2 x^-alpha + eps e^(Ct), psi = M2 x^-alpha + eps e^(Ct), and derivatives.
inline ControlFunctionSample control_sample_exterior(double x, double t, const ControlParams& ctrl) {
  const double decay = ctrl.M2 * std::pow(x, -ctrl.alpha);
  const double grow = ctrl.eps * std::exp(ctrl.C * t);
  ControlFunctionSample s;
  s.phi = ctrl.M1 - decay + grow;
  s.psi = decay + grow;
  s.phi_x = ctrl.alpha * decay / x;
  s.psi_x = -s.phi_x;
  s.phi_xx = -ctrl.alpha * (ctrl.alpha + 1.0) * decay / (x * x);
  s.psi_xx = -s.phi_xx;
  s.phi_t = ctrl.C * grow;
  s.psi_t = s.phi_t;
  return s;
}

/// True while eps e^(Ct) <= sqrt(eps), the window in which the control bound is meaningful.
inline bool control_valid(double t, const ControlParams& ctrl) {
  return std::sqrt(ctrl.eps) * std::exp(ctrl.C * t) <= 1.0;
}

struct MonitorReport {
  double t = 0.0;
  double max_wbar = -std::numeric_limits<double>::infinity();
  double min_zbar = std::numeric_limits<double>::infinity();
  double worst_x = 0.0;
  std::size_t worst_node = 0;
  double tol = 0.0;
  bool control_expired = false;
  /// Near-origin decay-rate checks (origin monitor only).
  bool rates_checked = false;
  bool rates_ok = true;
  double max_rate_rho = 0.0;  // max rho^theta / x^(c theta)
  double min_rate_u = 0.0;    // min u / x^(c theta)
  double max_rate_u = 0.0;    // max u / x^(c theta)
  bool verdict = false;

  bool pass() const { return verdict; }
};

namespace detail {
inline void track_worst(MonitorReport& r, double wbar, double zbar, double x, std::size_t i) {
  const double excess = std::max(wbar, -zbar);
  const double current = std::max(r.max_wbar, -r.min_zbar);
  if (excess > current) {
    r.worst_x = x;
    r.worst_node = i;
  }
  r.max_wbar = std::max(r.max_wbar, wbar);
  r.min_zbar = std::min(r.min_zbar, zbar);
}
}  // namespace detail

/// w_bar = w - phi, z_bar = z + psi at every node; pass iff max w_bar <= tol and min z_bar >= -tol.
inline MonitorReport monitor_exterior(const GasField& f, const ControlParams& ctrl, const EosParams& eos, double tol) {
  MonitorReport r;
  r.t = f.time;
  r.tol = tol;
  r.control_expired = !control_valid(f.time, ctrl);
  for (std::size_t i = 0; i < f.nx(); ++i) {
    const double x = f.x(i);
    const RiemannPair rp = riemann_invariants(f[i], eos);
    const ControlFunctionSample c = control_sample_exterior(x, f.time, ctrl);
    detail::track_worst(r, rp.w - c.phi, rp.z + c.psi, x, i);
  }
  r.verdict = r.max_wbar <= tol && r.min_zbar >= -tol;
  return r;
}

struct OriginMonitorOptions {
  double tol = 1e-8;
  /// Allowed initial deficit of z~ below 0 (the momentum cutoff near x = a forces z~ < 0 there).
  double z_floor = 0.0;
  std::size_t rate_nodes = 5;
};

/// Checks w~ <= M3 + 2 eps + tol and z~ >= -(tol + z_floor) on a physical field over [a, b],
/// plus rho^theta / x^(c theta) <= M3/2 + eps + tol and u / x^(c theta) in [-tol, M3 + 2 eps + tol]
/// at the innermost nodes. Reported w_bar = w~ - (M3 + 2 eps), z_bar = z~.
inline MonitorReport monitor_origin(const GasField& f, const ControlParams& ctrl, const EosParams& eos,
                                    const OriginMonitorOptions& opt = {}) {
  MonitorReport r;
  r.t = f.time;
  r.tol = opt.tol;
  const double top = ctrl.M3 + 2.0 * ctrl.eps;
  r.rates_checked = true;
  r.max_rate_rho = -std::numeric_limits<double>::infinity();
  r.min_rate_u = std::numeric_limits<double>::infinity();
  r.max_rate_u = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.nx(); ++i) {
    const double x = f.x(i);
    const double scale = std::pow(x, ctrl.c * eos.theta);
    const double s = pow_fast(f[i].rho, eos.theta) / scale;  // rho~^theta
    const double u = f[i].mom / f[i].rho / scale;               // m~ / rho~
    detail::track_worst(r, u + s - top, u - s, x, i);
    if (i < opt.rate_nodes) {
      r.max_rate_rho = std::max(r.max_rate_rho, s);
      r.min_rate_u = std::min(r.min_rate_u, u);
      r.max_rate_u = std::max(r.max_rate_u, u);
    }
  }
  r.rates_ok = r.max_rate_rho <= 0.5 * ctrl.M3 + ctrl.eps + opt.tol && r.min_rate_u >= -opt.tol &&
               r.max_rate_u <= top + opt.tol;
  r.verdict = r.max_wbar <= opt.tol && r.min_zbar >= -(opt.tol + opt.z_floor) && r.rates_ok;
  return r;
}

// ---------------------------------------------------------------------------
// Sign conditions

/// R1 and R2 of the modified-invariant system, exterior problem; s = rho^theta.
inline double r1_exterior(double x, double t, double s, double rho_x, const ControlParams& ctrl, const EosParams& eos) {
  const ControlFunctionSample c = control_sample_exterior(x, t, ctrl);
  const double th = eos.theta, n1 = static_cast<double>(ctrl.N_dim - 1);
  const double rho = std::pow(s, 1.0 / th);
  const double visc = (s > 0.0 && rho_x != 0.0) ? ctrl.eps * th * (th + 1.0) * std::pow(rho, th - 2.0) * rho_x * rho_x : 0.0;
  return -c.phi_t - (c.phi + (th - 1.0) * s) * c.phi_x + ctrl.eps * c.phi_xx - visc + th * n1 / x * s * c.psi -
         th * n1 / x * s * s;
}

inline double r2_exterior(double x, double t, double s, double rho_x, const ControlParams& ctrl, const EosParams& eos) {
  const ControlFunctionSample c = control_sample_exterior(x, t, ctrl);
  const double th = eos.theta, n1 = static_cast<double>(ctrl.N_dim - 1);
  const double rho = std::pow(s, 1.0 / th);
  const double visc = (s > 0.0 && rho_x != 0.0) ? ctrl.eps * th * (th + 1.0) * std::pow(rho, th - 2.0) * rho_x * rho_x : 0.0;
  return c.psi_t + (-c.psi + (1.0 - th) * s) * c.psi_x - ctrl.eps * c.psi_xx + visc - th * n1 / x * s * c.psi +
         th * n1 / x * s * s;
}

/// Origin problem, scaled variables: s = rho~^theta, u = m~/rho~, rho_xi = d rho~ / d xi.
inline double r1_origin(double x, double s, double u, double rho_xi, const ControlParams& ctrl, const EosParams& eos) {
  const double th = eos.theta, n1 = static_cast<double>(ctrl.N_dim - 1), c = ctrl.c, d = ctrl.d;
  const double rho = std::pow(s, 1.0 / th);
  const double visc = (s > 0.0 && rho_xi != 0.0) ? ctrl.eps * th * (th + 1.0) * std::pow(rho, th - 2.0) * rho_xi * rho_xi : 0.0;
  return ((c - d) * u * u - th * (n1 + d) * s * s - th * th * c * s * s) * std::pow(x, d - c - 1.0) - visc;
}

inline double r2_origin(double x, double s, double u, double rho_xi, const ControlParams& ctrl, const EosParams& eos) {
  const double th = eos.theta, n1 = static_cast<double>(ctrl.N_dim - 1), c = ctrl.c, d = ctrl.d;
  const double rho = std::pow(s, 1.0 / th);
  const double w = u + s;
  const double visc = (s > 0.0 && rho_xi != 0.0) ? ctrl.eps * th * (th + 1.0) * std::pow(rho, th - 2.0) * rho_xi * rho_xi : 0.0;
  return 0.25 * ((c - d) + th * (n1 + d) - th * th * c) * w * w * std::pow(x, d - c - 1.0) + visc;
}

enum class SignCase { exterior, origin };

struct SignSampling {
  SignCase which = SignCase::exterior;
  std::size_t n = 20;   // points per sampled dimension
  double x_lo = 1.0;    // exterior: 1; origin: a(eps)
  double x_hi = 0.0;    // 0 selects b(eps) = 1 + 1/sqrt(eps)
  std::optional<double> t_max;  // exterior only; default: largest T with sqrt(eps) e^(CT) <= 0.99, capped at 10
  double grad_max = 10.0;       // |rho_x| range
};

struct SignViolation {
  int which = 1;  // 1: R1 > 0, 2: R2 < 0
  double x = 0.0, t = 0.0, s = 0.0, aux = 0.0, value = 0.0;
};

struct SignReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_r1 = -std::numeric_limits<double>::infinity();
  double min_r2 = std::numeric_limits<double>::infinity();
  std::vector<SignViolation> examples;  // first few violations
  bool alpha_in_range = true;
  std::string note;

  bool pass() const { return violations == 0; }
};

namespace detail {
inline void record_sign(SignReport& rep, int which, double value, double x, double t, double s, double aux) {
  ++rep.samples;
  const bool bad = which == 1 ? value > 0.0 : value < 0.0;
  if (which == 1) rep.max_r1 = std::max(rep.max_r1, value);
  else rep.min_r2 = std::min(rep.min_r2, value);
  if (bad) {
    ++rep.violations;
    if (rep.examples.size() < 8) rep.examples.push_back({which, x, t, s, aux, value});
  }
}
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}
inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
  for (double& e : v) e = std::exp(e);
  return v;
}
}  // namespace detail

/// Evaluates R1 (at w_bar = 0) and R2 (at z_bar = 0) over a grid of (x, t, rho^theta, rho_x)
/// inside the invariant region, plus the targeted minimizer of the R2 quadratic in rho^theta.
/// An alpha outside alpha_bounds is evaluated and flagged, not rejected.
inline SignReport verify_R_signs(const ControlParams& ctrl, const EosParams& eos, const SignSampling& smp = {}) {
  if (!(ctrl.eps > 0.0)) throw PreconditionError("verify_R_signs: eps > 0 is required");
  if (smp.n < 2) throw PreconditionError("verify_R_signs: need at least 2 samples per dimension");
  SignReport rep;
  const double th = eos.theta, n1 = static_cast<double>(ctrl.N_dim - 1);
  const double x_hi = smp.x_hi > 0.0 ? smp.x_hi : default_outer_radius(ctrl.eps);
  if (!(x_hi > smp.x_lo) || !(smp.x_lo > 0.0)) throw PreconditionError("verify_R_signs: need 0 < x_lo < x_hi");
  const auto grads = detail::linspace(-smp.grad_max, smp.grad_max, smp.n);

  if (smp.which == SignCase::exterior) {
    const AlphaBounds ab = alpha_bounds(ctrl.N_dim, eos);
    rep.alpha_in_range = ab.contains(ctrl.alpha);
    if (!rep.alpha_in_range) rep.note = "alpha outside [(N-1)theta/(1+sqrt theta)^2, (N-1)theta/(1-sqrt theta)^2]";
    if (!(ctrl.M1 > ctrl.M2 && ctrl.M2 > 0.0)) throw PreconditionError("verify_R_signs: M1 > M2 > 0 is required");
    if (!(ctrl.C > 0.0)) throw PreconditionError("verify_R_signs: C > 0 is required");
    double t_max;
    if (smp.t_max) {
      t_max = *smp.t_max;
      if (!(std::sqrt(ctrl.eps) * std::exp(ctrl.C * t_max) < 1.0))
        throw PreconditionError("verify_R_signs: sqrt(eps) e^(C T) < 1 is violated");
    } else {
      t_max = std::min(10.0, std::log(0.99 / std::sqrt(ctrl.eps)) / ctrl.C);
      if (!(t_max > 0.0)) throw PreconditionError("verify_R_signs: sqrt(eps) < 1 is required");
    }
    auto xs = detail::logspace(smp.x_lo, x_hi, smp.n);
    // For large alpha the decay term lives in a thin layer near x_lo; also sample uniformly in M2 x^-alpha.
    for (std::size_t k = 1; k <= smp.n; ++k) {
      const double x = std::pow(static_cast<double>(k) / static_cast<double>(smp.n), -1.0 / ctrl.alpha);
      if (x > smp.x_lo && x < x_hi) xs.push_back(x);
    }
    const auto ts = detail::linspace(0.0, t_max, smp.n);
    const double beta = ctrl.alpha / (th * n1);
    for (double x : xs) {
      for (double t : ts) {
        const ControlFunctionSample c = control_sample_exterior(x, t, ctrl);
        const double s_max = 0.5 * (c.phi + c.psi);
        auto ss = detail::linspace(0.0, s_max, smp.n);
        const double s_star = 0.5 * (beta * (1.0 - th) + 1.0) * c.psi;  // minimizer of the R2 quadratic
        if (s_star <= s_max) ss.push_back(s_star);
        for (double s : ss) {
          for (double g : grads) {
            detail::record_sign(rep, 1, r1_exterior(x, t, s, g, ctrl, eos), x, t, s, g);
            detail::record_sign(rep, 2, r2_exterior(x, t, s, g, ctrl, eos), x, t, s, g);
          }
        }
      }
    }
  } else {
    if (!(ctrl.c >= 0.0)) throw PreconditionError("verify_R_signs: c >= 0 is required");
    if (std::abs(ctrl.d - (th + 1.0) * ctrl.c) > 1e-12 * std::max(1.0, ctrl.c))
      throw PreconditionError("verify_R_signs: d = (theta + 1) c is required");
    const auto xs = detail::logspace(smp.x_lo, x_hi, smp.n);
    const double top = ctrl.M3 + 2.0 * ctrl.eps;
    const auto ss = detail::linspace(0.0, 0.5 * top, smp.n);
    for (double x : xs) {
      for (double s : ss) {
        for (double g : grads) {
          // w~ = top on the R1 face, z~ = 0 on the R2 face.
          detail::record_sign(rep, 1, r1_origin(x, s, top - s, g, ctrl, eos), x, 0.0, s, g);
          detail::record_sign(rep, 2, r2_origin(x, s, s, g, ctrl, eos), x, 0.0, s, g);
        }
      }
    }
  }
  return rep;
}

struct ChosenConstants {
  double M1 = 0.0;
  double C = 0.0;
  int escalations = 0;
};

/// Closed-form sufficient constants:
///   M1 = M2 + (alpha M2^2 + M2^2 [alpha(1-theta) + theta(N-1)]^2 / (2 theta (N-1))) / (alpha M2) + 1
///   C  = theta(N-1)/2 + alpha(alpha+1) M2 + alpha(M2+1) + 1
inline ChosenConstants sufficient_constants(double M2, const EosParams& eos, int N_dim, double alpha) {
  const double th = eos.theta, n1 = static_cast<double>(N_dim - 1);
  const double k = alpha * (1.0 - th) + th * n1;
  ChosenConstants out;
  out.M1 = M2 + (alpha * M2 * M2 + M2 * M2 * k * k / (2.0 * th * n1)) / (alpha * M2) + 1.0;
  out.C = th * n1 / 2.0 + alpha * (alpha + 1.0) * M2 + alpha * (M2 + 1.0) + 1.0;
  return out;
}

/// sufficient_constants, certified by verify_R_signs; both constants doubled up to 10 times on failure.
inline ChosenConstants choose_constants(double M2, const EosParams& eos, int N_dim, double alpha, double eps = 1e-2,
                                        std::optional<double> t_max = std::nullopt, std::size_t samples = 12) {
  if (!(M2 > 0.0)) throw DomainError("choose_constants: M2 must be positive");
  const AlphaBounds ab = alpha_bounds(N_dim, eos);
  if (!ab.contains(alpha)) {
    std::ostringstream os;
    os << "choose_constants: alpha = " << alpha << " violates " << ab.min << " <= alpha <= " << ab.max;
    throw DomainError(os.str());
  }
  ChosenConstants cc = sufficient_constants(M2, eos, N_dim, alpha);
  for (int k = 0; k <= 10; ++k) {
    ControlParams ctrl;
    ctrl.M1 = cc.M1;
    ctrl.M2 = M2;
    ctrl.alpha = alpha;
    ctrl.C = cc.C;
    ctrl.eps = eps;
    ctrl.N_dim = N_dim;
    SignSampling smp;
    smp.n = samples;
    smp.t_max = t_max;
    if (verify_R_signs(ctrl, eos, smp).pass()) {
      cc.escalations = k;
      return cc;
    }
    cc.M1 *= 2.0;
    cc.C *= 2.0;
  }
  throw CoefficientError("choose_constants: constants failed certification after 10 doublings");
}

}  // namespace sphvisc
