#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sphvisc/gas_core.hpp"
#include "sphvisc/quadrature.hpp"

using namespace sphvisc;

namespace {

// Composite Simpson in s = sin(phi): int_{-1}^{1} f(s) (1-s^2)^lam ds = int cos^(2 lam + 1)(phi) f(sin phi) dphi.
template <class F>
double beta_weighted(F&& f, double lam, int n = 20000) {
  const double a = -M_PI / 2, b = M_PI / 2, h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double ph = a + i * h;
    const double c = std::max(0.0, std::cos(ph));
    const double v = std::pow(c, 2 * lam + 1) * f(std::sin(ph));
    s += v * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
  }
  return s * h / 3;
}

}  // namespace

TEST(EosParams, DerivedConstants) {
  const EosParams e = EosParams::from_gamma(2.0);
  EXPECT_DOUBLE_EQ(e.theta, 0.5);
  EXPECT_DOUBLE_EQ(e.p0, 0.125);
  EXPECT_DOUBLE_EQ(e.lambda_w, 0.5);
  const EosParams e3 = EosParams::from_gamma(3.0);
  EXPECT_DOUBLE_EQ(e3.theta, 1.0);
  EXPECT_NEAR(e3.p0, 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(e3.lambda_w, 0.0);
  EXPECT_THROW(EosParams::from_gamma(1.0), DomainError);
}

TEST(Pressure, Examples) {
  for (double g : {1.4, 2.0, 3.0}) EXPECT_EQ(pressure(0.0, EosParams::from_gamma(g)), 0.0);
  EXPECT_DOUBLE_EQ(pressure(1.0, EosParams::from_gamma(2.0)), 0.125);
  EXPECT_NEAR(pressure(2.0, EosParams::from_gamma(3.0)), 8.0 / 3.0, 1e-14);
}

TEST(Pressure, NegativeDensityRejected) {
  EXPECT_THROW(pressure(-1e-3, EosParams::from_gamma(2.0)), DomainError);
}

TEST(RiemannInvariants, Examples) {
  const EosParams e = EosParams::from_gamma(2.0);
  auto r = riemann_invariants({1.0, 0.0}, e);
  EXPECT_DOUBLE_EQ(r.w, 1.0);
  EXPECT_DOUBLE_EQ(r.z, -1.0);
  r = riemann_invariants({1.0, 1.0}, e);
  EXPECT_DOUBLE_EQ(r.w, 2.0);
  EXPECT_DOUBLE_EQ(r.z, 0.0);
}

TEST(RiemannInvariants, VacuumLimitAtFixedVelocity) {
  const EosParams e = EosParams::from_gamma(2.0);
  const double u = 0.7;
  for (double rho : {1e-4, 1e-8, 1e-12}) {
    const auto r = riemann_invariants({rho, rho * u}, e);
    EXPECT_NEAR(r.w, u, 2 * std::sqrt(rho));
    EXPECT_NEAR(r.z, u, 2 * std::sqrt(rho));
  }
}

TEST(RiemannInvariants, RoundTripProperty) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> R(1e-3, 5.0), U(-3.0, 3.0), G(1.05, 3.0);
  for (int k = 0; k < 500; ++k) {
    const EosParams e = EosParams::from_gamma(G(rng));
    const GasState s{R(rng), 0.0};
    const GasState s2{s.rho, s.rho * U(rng)};
    const GasState back = from_riemann(riemann_invariants(s2, e), e);
    EXPECT_NEAR(back.rho, s2.rho, 1e-10 * s2.rho);
    EXPECT_NEAR(back.mom, s2.mom, 1e-10 * (1 + std::abs(s2.mom)));
  }
}

TEST(Eigenvalues, Examples) {
  auto l = eigenvalues({1.0, 0.0}, EosParams::from_gamma(2.0));
  EXPECT_DOUBLE_EQ(l.lambda1, -0.5);
  EXPECT_DOUBLE_EQ(l.lambda2, 0.5);
  l = eigenvalues({4.0, 4.0}, EosParams::from_gamma(3.0));
  EXPECT_DOUBLE_EQ(l.lambda1, -3.0);
  EXPECT_DOUBLE_EQ(l.lambda2, 5.0);
}

TEST(Eigenvalues, SpreadIsTwiceThetaSoundProperty) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> R(1e-6, 10.0), U(-5.0, 5.0), G(1.01, 3.0);
  for (int k = 0; k < 500; ++k) {
    const EosParams e = EosParams::from_gamma(G(rng));
    const double rho = R(rng);
    const auto l = eigenvalues({rho, rho * U(rng)}, e);
    EXPECT_GE(l.lambda2 - l.lambda1, 0.0);
    EXPECT_NEAR(l.lambda2 - l.lambda1, 2 * e.theta * std::pow(rho, e.theta), 1e-12 * (1 + std::pow(rho, e.theta)));
  }
}

TEST(MechanicalEntropy, Examples) {
  const EosParams e = EosParams::from_gamma(2.0);
  auto p = mechanical_entropy({1.0, 0.0}, e);
  EXPECT_DOUBLE_EQ(p.eta, 0.125);
  EXPECT_DOUBLE_EQ(p.q, 0.0);
  p = mechanical_entropy({1.0, 1.0}, e);
  EXPECT_DOUBLE_EQ(p.eta, 0.625);
  EXPECT_DOUBLE_EQ(p.q, 0.75);
  for (double rho : {0.1, 2.0, 7.0}) EXPECT_EQ(mechanical_entropy({rho, 0.0}, e).q, 0.0);
}

TEST(MechanicalEntropy, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> R(0.2, 3.0), U(-2.0, 2.0), G(1.1, 3.0);
  for (int k = 0; k < 100; ++k) {
    const EosParams e = EosParams::from_gamma(G(rng));
    const GasState s{R(rng), 0.0};
    const GasState st{s.rho, s.rho * U(rng)};
    const auto g = mechanical_entropy_gradient(st, e);
    const double h = 1e-6;
    const double dr = (mechanical_entropy({st.rho + h, st.mom}, e).eta - mechanical_entropy({st.rho - h, st.mom}, e).eta) / (2 * h);
    const double dm = (mechanical_entropy({st.rho, st.mom + h}, e).eta - mechanical_entropy({st.rho, st.mom - h}, e).eta) / (2 * h);
    EXPECT_NEAR(g.d_rho, dr, 1e-6 * (1 + std::abs(dr)));
    EXPECT_NEAR(g.d_mom, dm, 1e-6 * (1 + std::abs(dm)));
  }
}

// q_x = grad(eta) . f(U)_x for smooth U: checks the flux is the entropy flux of the Euler system.
TEST(MechanicalEntropy, FluxCompatibility) {
  const EosParams e = EosParams::from_gamma(1.6);
  auto flux = [&](GasState s) { return GasState{s.mom, s.mom * s.mom / s.rho + pressure(s.rho, e)}; };
  const GasState a{1.3, 0.4};
  const GasState dir{0.37, -0.81};
  const double h = 1e-5;
  const GasState ap{a.rho + h * dir.rho, a.mom + h * dir.mom}, am{a.rho - h * dir.rho, a.mom - h * dir.mom};
  const double dq = (mechanical_entropy(ap, e).q - mechanical_entropy(am, e).q) / (2 * h);
  const GasState fp = flux(ap), fm = flux(am);
  const auto g = mechanical_entropy_gradient(a, e);
  const double rhs = g.d_rho * (fp.rho - fm.rho) / (2 * h) + g.d_mom * (fp.mom - fm.mom) / (2 * h);
  EXPECT_NEAR(dq, rhs, 1e-7);
}

TEST(Quadrature, GaussJacobiMassMatchesBetaIntegral) {
  for (double lam : {0.0, 0.25, 0.5, 1.0, 2.5}) {
    const QuadratureRule q = gauss_jacobi_symmetric(32, lam);
    double m = 0.0;
    for (double w : q.weights) m += w;
    EXPECT_NEAR(m, symmetric_jacobi_mass(lam), 1e-12);
    EXPECT_NEAR(m, beta_weighted([](double) { return 1.0; }, lam), 1e-9);
  }
}

TEST(Quadrature, ExactForPolynomialsUpToDegree2nMinus1) {
  const QuadratureRule q = gauss_jacobi_symmetric(6, 0.5);
  for (int deg = 0; deg <= 11; ++deg) {
    double v = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) v += q.weights[k] * std::pow(q.nodes[k], deg);
    const double ref = beta_weighted([deg](double s) { return std::pow(s, deg); }, 0.5);
    EXPECT_NEAR(v, ref, 1e-9) << "degree " << deg;
  }
}

TEST(WeakEntropy, VacuumIsZero) {
  const WeakEntropyRule rule(EosParams::from_gamma(2.0));
  const auto p = weak_entropy({0.0, 0.0}, rule, [](double v) { return v * v; });
  EXPECT_EQ(p.eta, 0.0);
  EXPECT_EQ(p.q, 0.0);
}

TEST(WeakEntropy, ConstantGeneratorGivesHalfPiRho) {
  const WeakEntropyRule rule(EosParams::from_gamma(2.0));
  for (double rho : {0.3, 1.0, 4.0}) {
    const auto p = weak_entropy({rho, 0.2 * rho}, rule, [](double) { return 1.0; });
    EXPECT_NEAR(p.eta, rho * M_PI / 2, 1e-12);
  }
}

TEST(WeakEntropy, LinearGeneratorGivesMomentumTimesMass) {
  for (double g : {1.4, 2.0, 2.6}) {
    const EosParams e = EosParams::from_gamma(g);
    const WeakEntropyRule rule(e);
    const GasState s{1.7, -0.9};
    const auto p = weak_entropy(s, rule, [](double v) { return v; });
    EXPECT_NEAR(p.eta, s.mom * beta_weighted([](double) { return 1.0; }, e.lambda_w), 1e-8);
  }
}

TEST(WeakEntropy, MatchesIndependentQuadratureForGenericGenerator) {
  const EosParams e = EosParams::from_gamma(1.8);
  const WeakEntropyRule rule(e);
  const GasState s{0.8, 0.5};
  const double u = s.mom / s.rho, c = std::pow(s.rho, e.theta);
  auto g = [](double v) { return std::exp(0.7 * v) + v * v * v; };
  const auto p = weak_entropy(s, rule, g);
  const double eta = s.rho * beta_weighted([&](double t) { return g(u + c * t); }, e.lambda_w);
  const double q = s.rho * beta_weighted([&](double t) { return (u + e.theta * c * t) * g(u + c * t); }, e.lambda_w);
  EXPECT_NEAR(p.eta, eta, 1e-8);
  EXPECT_NEAR(p.q, q, 1e-8);
}

TEST(WeakEntropy, NonFiniteGeneratorRaises) {
  const WeakEntropyRule rule(EosParams::from_gamma(2.0));
  EXPECT_THROW(weak_entropy({1.0, 0.0}, rule, [](double) { return std::nan(""); }), CoefficientError);
}

TEST(WeakEntropy, GradientMatchesFiniteDifferences) {
  const EosParams e = EosParams::from_gamma(2.0);
  const WeakEntropyRule rule(e);
  auto g = [](double v) { return std::exp(v); };
  const GasState s{1.2, 0.3};
  const auto gr = weak_entropy_gradient(s, rule, g, g);
  const double h = 1e-6;
  const double dr = (weak_entropy({s.rho + h, s.mom}, rule, g).eta - weak_entropy({s.rho - h, s.mom}, rule, g).eta) / (2 * h);
  const double dm = (weak_entropy({s.rho, s.mom + h}, rule, g).eta - weak_entropy({s.rho, s.mom - h}, rule, g).eta) / (2 * h);
  EXPECT_NEAR(gr.d_rho, dr, 1e-7);
  EXPECT_NEAR(gr.d_mom, dm, 1e-7);
}

// A convex generator yields an entropy convex in (rho, m): second differences along random directions are >= 0.
TEST(WeakEntropy, ConvexGeneratorGivesConvexEntropyProperty) {
  const EosParams e = EosParams::from_gamma(2.0);
  const WeakEntropyRule rule(e);
  auto g = [](double v) { return v * v + std::exp(-v); };
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> R(0.2, 3.0), U(-2.0, 2.0), D(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double rho = R(rng);
    const GasState s{rho, rho * U(rng)};
    const double dr = D(rng), dm = D(rng), h = 1e-3;
    const double f0 = weak_entropy(s, rule, g).eta;
    const double fp = weak_entropy({s.rho + h * dr, s.mom + h * dm}, rule, g).eta;
    const double fm = weak_entropy({s.rho - h * dr, s.mom - h * dm}, rule, g).eta;
    EXPECT_GE(fp - 2 * f0 + fm, -1e-10);
  }
}

// g(v) = v^2: eta = rho (u^2 m0 + rho^(2 theta) m2) with the Beta moments m0, m2.
TEST(WeakEntropy, QuadraticGeneratorIsProportionalToMechanicalEntropy) {
  const EosParams e = EosParams::from_gamma(2.0);
  const WeakEntropyRule rule(e);
  const double lam = e.lambda_w;
  const double m0 = beta_weighted([](double) { return 1.0; }, lam);
  const double m2 = beta_weighted([](double s) { return s * s; }, lam);
  const GasState s{1.5, 0.6};
  const double u = s.mom / s.rho, c = std::pow(s.rho, e.theta);
  const auto p = weak_entropy(s, rule, [](double v) { return v * v; });
  EXPECT_NEAR(p.eta, s.rho * (u * u * m0 + c * c * m2), 1e-10);
}
