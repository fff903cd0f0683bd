#pragma once

// Equation of state, characteristic speeds, Riemann invariants and entropy pairs
// for isentropic gas dynamics with p = p0 rho^gamma, p0 = theta^2 / gamma.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "sphvisc/errors.hpp"
#include "sphvisc/quadrature.hpp"

namespace sphvisc {

/// Densities at or below this are treated as vacuum when a velocity is needed.
inline constexpr double kDefaultRhoEps = 1e-300;

struct EosParams {
  double gamma = 2.0;
  double theta = 0.5;     // (gamma - 1) / 2
  double p0 = 0.125;      // theta^2 / gamma
  double lambda_w = 0.5;  // (3 - gamma) / (2 (gamma - 1)), weak-entropy weight exponent

  static EosParams from_gamma(double gamma) {
    if (!(gamma > 1.0) || !std::isfinite(gamma)) {
      throw DomainError("EosParams: adiabatic exponent must satisfy gamma > 1, got " + std::to_string(gamma));
    }
    EosParams e;
    e.gamma = gamma;
    e.theta = 0.5 * (gamma - 1.0);
    e.p0 = e.theta * e.theta / gamma;
    e.lambda_w = (3.0 - gamma) / (2.0 * (gamma - 1.0));
    return e;
  }
};

struct GasState {
  double rho = 0.0;
  double mom = 0.0;

  double velocity(double rho_eps = kDefaultRhoEps) const {
    if (!(rho > rho_eps)) throw VacuumError("velocity requested at vacuum state");
    return mom / rho;
  }
};

struct RiemannPair {
  double w = 0.0;
  double z = 0.0;
};

struct EntropyPair {
  double eta = 0.0;
  double q = 0.0;
};

struct EntropyGradient {
  double d_rho = 0.0;
  double d_mom = 0.0;
};

struct CharacteristicSpeeds {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// rho^e with exact fast paths for the exponents that occur for gamma = 2 and 3.
inline double pow_fast(double base, double e) {
  if (e == 1.0) return base;
  if (e == 2.0) return base * base;
  if (e == 0.5) return std::sqrt(base);
  if (e == 3.0) return base * base * base;
  if (e == 0.0) return 1.0;
  return std::pow(base, e);
}

inline double pressure(double rho, const EosParams& eos) {
  if (rho < 0.0) throw DomainError("pressure: negative density");
  return eos.p0 * pow_fast(rho, eos.gamma);
}

/// dp/drho = theta^2 rho^(gamma-1); its square root theta rho^theta is the sound speed.
inline double sound_speed(double rho, const EosParams& eos) {
  if (rho < 0.0) throw DomainError("sound_speed: negative density");
  return eos.theta * pow_fast(rho, eos.theta);
}

/// (w, z) = (u + rho^theta, u - rho^theta). At rho = 0 a velocity must be supplied.
inline RiemannPair riemann_invariants(const GasState& s, const EosParams& eos,
                                      std::optional<double> vacuum_velocity = std::nullopt,
                                      double rho_eps = kDefaultRhoEps) {
  if (s.rho < 0.0) throw DomainError("riemann_invariants: negative density");
  if (!(s.rho > rho_eps)) {
    if (!vacuum_velocity) throw VacuumError("riemann_invariants: vacuum state without a supplied velocity");
    return {*vacuum_velocity, *vacuum_velocity};
  }
  const double u = s.mom / s.rho;
  const double c = pow_fast(s.rho, eos.theta);
  return {u + c, u - c};
}

/// Inverse of riemann_invariants: rho = ((w - z)/2)^(1/theta), m = rho (w + z)/2.
inline GasState from_riemann(const RiemannPair& r, const EosParams& eos) {
  if (r.w < r.z) throw DomainError("from_riemann: w < z has no gas state");
  const double rho = std::pow(0.5 * (r.w - r.z), 1.0 / eos.theta);
  return {rho, rho * 0.5 * (r.w + r.z)};
}

inline CharacteristicSpeeds eigenvalues(const GasState& s, const EosParams& eos,
                                        double rho_eps = kDefaultRhoEps) {
  if (!(s.rho > rho_eps)) throw VacuumError("eigenvalues: vacuum state");
  const double u = s.mom / s.rho;
  const double c = eos.theta * pow_fast(s.rho, eos.theta);
  return {u - c, u + c};
}

/// Mechanical energy pair: eta = m^2/(2 rho) + p0 rho^gamma/(gamma-1),
/// q = m^3/(2 rho^2) + gamma p0 rho^(gamma-1) m/(gamma-1).
inline EntropyPair mechanical_entropy(const GasState& s, const EosParams& eos,
                                      double rho_eps = kDefaultRhoEps) {
  if (!(s.rho > rho_eps)) throw VacuumError("mechanical_entropy: vacuum state");
  const double u = s.mom / s.rho;
  const double rg1 = pow_fast(s.rho, eos.gamma - 1.0);
  const double eta = 0.5 * s.mom * u + eos.p0 * rg1 * s.rho / (eos.gamma - 1.0);
  const double q = 0.5 * s.mom * u * u + eos.gamma * eos.p0 * rg1 * s.mom / (eos.gamma - 1.0);
  return {eta, q};
}

inline EntropyGradient mechanical_entropy_gradient(const GasState& s, const EosParams& eos,
                                                   double rho_eps = kDefaultRhoEps) {
  if (!(s.rho > rho_eps)) throw VacuumError("mechanical_entropy_gradient: vacuum state");
  const double u = s.mom / s.rho;
  const double d_rho = -0.5 * u * u + eos.gamma * eos.p0 * pow_fast(s.rho, eos.gamma - 1.0) / (eos.gamma - 1.0);
  return {d_rho, u};
}

/// Quadrature for the weak-entropy integrals, weight (1 - s^2)^lambda_w.
class WeakEntropyRule {
 public:
  static constexpr std::size_t kDefaultNodes = 32;

  explicit WeakEntropyRule(const EosParams& eos, std::size_t nodes = kDefaultNodes) : eos_(eos) {
    if (!(eos.gamma < 3.0)) {
      throw DomainError("weak_entropy: gamma >= 3 gives a degenerate or singular kernel weight");
    }
    rule_ = gauss_jacobi_symmetric(nodes, eos.lambda_w);
  }

  const QuadratureRule& rule() const { return rule_; }
  const EosParams& eos() const { return eos_; }
  double mass() const { return symmetric_jacobi_mass(eos_.lambda_w); }

 private:
  EosParams eos_;
  QuadratureRule rule_;
};

namespace detail {
inline double checked(double v) {
  if (!std::isfinite(v)) throw CoefficientError("weak_entropy: generating function returned a non-finite value");
  return v;
}
}  // namespace detail

/// Weak entropy pair generated by g:
///   eta = rho * int g(u + rho^theta s) (1-s^2)^lambda ds,
///   q   = rho * int (u + theta rho^theta s) g(u + rho^theta s) (1-s^2)^lambda ds.
/// Both vanish at vacuum.
template <class G>
EntropyPair weak_entropy(const GasState& s, const WeakEntropyRule& rule, G&& g,
                         double rho_eps = kDefaultRhoEps) {
  if (s.rho < 0.0) throw DomainError("weak_entropy: negative density");
  if (!(s.rho > rho_eps)) return {0.0, 0.0};
  const EosParams& eos = rule.eos();
  const double u = s.mom / s.rho;
  const double c = pow_fast(s.rho, eos.theta);
  const QuadratureRule& qr = rule.rule();
  double eta = 0.0;
  double q = 0.0;
  for (std::size_t k = 0; k < qr.size(); ++k) {
    const double sk = qr.nodes[k];
    const double gv = detail::checked(g(u + c * sk));
    eta += qr.weights[k] * gv;
    q += qr.weights[k] * (u + eos.theta * c * sk) * gv;
  }
  return {s.rho * eta, s.rho * q};
}

/// Gradient (d/drho, d/dm) of the weak entropy generated by g, given g'.
template <class DG, class G>
EntropyGradient weak_entropy_gradient(const GasState& s, const WeakEntropyRule& rule, G&& g, DG&& dg,
                                      double rho_eps = kDefaultRhoEps) {
  if (!(s.rho > rho_eps)) throw VacuumError("weak_entropy_gradient: vacuum state");
  const EosParams& eos = rule.eos();
  const double u = s.mom / s.rho;
  const double c = pow_fast(s.rho, eos.theta);
  const QuadratureRule& qr = rule.rule();
  double ig = 0.0, idg = 0.0, isdg = 0.0;
  for (std::size_t k = 0; k < qr.size(); ++k) {
    const double sk = qr.nodes[k];
    const double xi = u + c * sk;
    ig += qr.weights[k] * detail::checked(g(xi));
    const double d = detail::checked(dg(xi));
    idg += qr.weights[k] * d;
    isdg += qr.weights[k] * sk * d;
  }
  // d/dm:   int g'(xi) w ds
  // d/drho: int g w ds + rho int g' (-u/rho + theta rho^(theta-1) s) w ds
  return {ig - u * idg + eos.theta * c * isdg, idg};
}

}  // namespace sphvisc
