#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sphvisc/errors.hpp"

namespace sphvisc {

/// Nodes and weights of a fixed-node quadrature rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  /// Integral of f over [lo, hi] after affine mapping of the rule.
  template <class F>
  double integrate(F&& f, double lo, double hi) const {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * f(mid + half * nodes[k]);
    return half * sum;
  }
};

/// Integral of (1 - s^2)^lambda over [-1, 1], i.e. B(1/2, lambda + 1).
inline double symmetric_jacobi_mass(double lambda) {
  return std::exp(0.5 * std::log(M_PI) + std::lgamma(lambda + 1.0) - std::lgamma(lambda + 1.5));
}

/// Gauss rule for the weight (1 - s^2)^lambda on [-1, 1] (Golub-Welsch).
///
/// The symmetric Jacobi (Gegenbauer) three-term recurrence has zero diagonal and
/// off-diagonal entries sqrt(n (n + 2 lambda) / ((2n + 2 lambda + 1)(2n + 2 lambda - 1))).
/// The rule is exact for polynomials of degree 2n - 1 against the weight.
inline QuadratureRule gauss_jacobi_symmetric(std::size_t n, double lambda) {
  if (n == 0) throw DomainError("gauss_jacobi_symmetric: need at least one node");
  if (!(lambda > -1.0)) throw DomainError("gauss_jacobi_symmetric: weight exponent must exceed -1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd off(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double b = (k == 1) ? 1.0 / (3.0 + 2.0 * lambda)
                              : kk * (kk + 2.0 * lambda) /
                                    ((2.0 * kk + 2.0 * lambda + 1.0) * (2.0 * kk + 2.0 * lambda - 1.0));
    off(static_cast<Eigen::Index>(k - 1)) = std::sqrt(b);
  }
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mass = symmetric_jacobi_mass(lambda);
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = mass;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    rule.nodes[k] = solver.eigenvalues()(kk);
    const double v0 = solver.eigenvectors()(0, kk);
    rule.weights[k] = mass * v0 * v0;
  }
  // Symmetrize to remove eigen-solver noise.
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t j = n - 1 - k;
    const double node = 0.5 * (rule.nodes[j] - rule.nodes[k]);
    const double weight = 0.5 * (rule.weights[j] + rule.weights[k]);
    rule.nodes[k] = -node;
    rule.nodes[j] = node;
    rule.weights[k] = rule.weights[j] = weight;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

inline QuadratureRule gauss_legendre(std::size_t n) { return gauss_jacobi_symmetric(n, 0.0); }

/// Composite Simpson weights for an even number of intervals of width h.
inline std::vector<double> simpson_weights(std::size_t intervals, double h) {
  if (intervals == 0 || intervals % 2 != 0) throw DomainError("simpson_weights: interval count must be even");
  std::vector<double> w(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] = c * h / 3.0;
  }
  return w;
}

/// Trapezoid weights on a uniform grid of n points with spacing h.
inline std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n, h);
  if (n > 0) {
    w.front() *= 0.5;
    w.back() *= 0.5;
  }
  return w;
}

}  // namespace sphvisc
