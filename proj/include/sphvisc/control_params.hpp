#pragma once

#include <cmath>

namespace sphvisc {

/// Constants of the control functions, the bound constants, and the origin scaling.
///
/// Exterior problem: phi = M1 - M2 x^-alpha + eps e^(C t), psi = M2 x^-alpha + eps e^(C t).
/// Origin problem: rho = rho~ x^c, m = m~ x^d with d = (theta + 1) c, invariant region
/// w~ <= M3 + 2 eps, z~ >= 0.
struct ControlParams {
  double M1 = 0.0;
  double M2 = 1.0;
  double M3 = 1.0;
  double alpha = 1.0;
  double C = 1.0;
  double eps = 1e-2;
  double c = 0.0;
  double d = 0.0;
  int N_dim = 3;

  /// Sets d = (theta + 1) c.
  void couple_decay_rates(double theta) { d = (theta + 1.0) * c; }
};

/// b(eps) = 1 + 1/sqrt(eps): right end of the truncated domain.
inline double default_outer_radius(double eps) { return 1.0 + 1.0 / std::sqrt(eps); }

/// a(eps) = -1/ln(eps): inner radius of the origin-including problem.
inline double default_inner_radius(double eps) { return -1.0 / std::log(eps); }

}  // namespace sphvisc
