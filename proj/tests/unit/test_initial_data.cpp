#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "sphvisc/initial_data.hpp"
#include "sphvisc/invariant_monitor.hpp"

using namespace sphvisc;

namespace {

const EosParams kEos = EosParams::from_gamma(2.0);

InitialProfile constant_profile(double rho, double mom) {
  return {[rho](double) { return rho; }, [mom](double) { return mom; }, "constant"};
}

ControlParams origin_ctrl(double c, double eps = 1e-2) {
  ControlParams ctrl;
  ctrl.c = c;
  ctrl.eps = eps;
  ctrl.M3 = 2.0;
  ctrl.couple_decay_rates(kEos.theta);
  return ctrl;
}

}  // namespace

TEST(Mollifier, UnitMassAndSymmetry) {
  const Mollifier j(1e-2);
  EXPECT_NEAR(j.mass(), 1.0, 1e-15);
  const std::size_t n = j.weights.size();
  for (std::size_t k = 0; k < n; ++k) {
    EXPECT_NEAR(j.offsets[k], -j.offsets[n - 1 - k], 1e-15);
    EXPECT_NEAR(j.weights[k], j.weights[n - 1 - k], 1e-15);
    EXPECT_GE(j.weights[k], 0.0);
  }
}

TEST(MollifyExterior, ConstantProfileGetsFloor) {
  const double eps = 1e-2;
  const Grid1D g(1.0, 11.0, 201);
  const MollifiedData m = mollify_exterior(constant_profile(1.0, 0.0), kEos, eps, g);
  for (const GasState& s : m.field.data) {
    EXPECT_NEAR(s.rho, 1.0 + std::pow(eps, 2.0 / kEos.theta), 1e-14);
    EXPECT_EQ(s.mom, 0.0);
  }
}

TEST(MollifyExterior, DensityAboveFloorProperty) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> A(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = A(rng), b = A(rng), x0 = 1.0 + 9.0 * A(rng);
    const InitialProfile p{[=](double x) { return x < x0 ? 0.0 : a * std::abs(std::sin(b * x)); },
                           [](double) { return 0.0; }, "rough"};
    const double eps = 1e-2;
    const MollifiedData m = mollify_exterior(p, kEos, eps, Grid1D(1.0, 11.0, 301));
    for (const GasState& s : m.field.data) EXPECT_GE(s.rho, vacuum_floor(eps, kEos) * (1 - 1e-14));
  }
}

TEST(MollifyExterior, StepProfileTransitionWidthAndMass) {
  const double eps = 1e-2, floor = vacuum_floor(eps, kEos);
  const double h = 2 * eps / Mollifier::kIntervals;
  // Nodes midway between the shifted copies of the jump: trapezoid sums are exact for the resulting staircase.
  const double step = h / 2;
  const double first = 2.0 - eps + h / 4;
  const std::size_t back = static_cast<std::size_t>(std::round(0.5 / step));
  const double lo = first - back * step;
  const std::size_t n = 2 * back + 1;
  const Grid1D g(lo, lo + (n - 1) * step, n);
  const InitialProfile p = make_profile("step", {{"rho_lo", 1.0}, {"rho_hi", 2.0}, {"x0", 2.0}}, kEos, ControlParams{});
  const MollifiedData m = mollify_exterior(p, kEos, eps, g);

  double x_first = 1e300, x_last = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = m.field[i].rho - floor;
    if (r > 1.0 + 1e-12 && r < 2.0 - 1e-12) {
      x_first = std::min(x_first, g.x(i));
      x_last = std::max(x_last, g.x(i));
    }
  }
  EXPECT_LE(x_last - x_first, 2 * eps);

  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) mass += (i == 0 || i + 1 == n ? 0.5 : 1.0) * step * (m.field[i].rho - floor);
  const double exact = (2.0 - g.x_lo) * 1.0 + (g.x_hi - 2.0) * 2.0;
  EXPECT_NEAR(mass, exact, 1e-6);
}

TEST(MollifyExterior, LeftBoundaryMomentumVanishes) {
  const Grid1D g(1.0, 11.0, 101);
  const MollifiedData m = mollify_exterior(constant_profile(1.0, 0.5), kEos, 1e-2, g);
  EXPECT_EQ(m.field[0].mom, 0.0);
  EXPECT_EQ(m.boundary.left.mom, 0.0);
  EXPECT_GT(m.field[1].mom, 0.0);
}

TEST(MollifyOrigin, ZeroMomentumProfileGivesNonnegativeMomentum) {
  const double eps = 1e-2;
  const ControlParams ctrl = origin_ctrl(1.0, eps);
  const double a = default_inner_radius(eps);
  const Grid1D g(a, 3.0, 601);
  const InitialProfile p{[](double x) { return 0.5 * x; }, [](double) { return 0.0; }, "rest"};
  const MollifiedData m = mollify_origin(p, kEos, eps, g, ctrl);
  const double floor = vacuum_floor(eps, kEos);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    EXPECT_GE(m.field[i].mom, 0.0);
    if (x >= 2 * a + eps && x <= 3.0 - eps) {
      EXPECT_NEAR(m.field[i].mom, eps * (0.5 + floor), 1e-12);
    }
    if (x <= 2 * a - eps) {
      EXPECT_EQ(m.field[i].mom, 0.0);
    }
  }
}

TEST(MollifyOrigin, ConstantScaledDensityUnscalesToLinearProfile) {
  const double eps = 1e-2;
  const ControlParams ctrl = origin_ctrl(1.0, eps);
  const Grid1D g(default_inner_radius(eps), 3.0, 401);
  const InitialProfile p{[](double x) { return x; }, [](double) { return 0.0; }, "linear"};
  const MollifiedData m = mollify_origin(p, kEos, eps, g, ctrl);
  const GasField phys = unscale_field(m.field, ctrl);
  const double floor = vacuum_floor(eps, kEos);
  for (std::size_t i = 0; i < g.nx; ++i) EXPECT_NEAR(phys[i].rho, (1.0 + floor) * g.x(i), 1e-12);
}

TEST(CheckAdmissibleExterior, RestStateFailsBeyondCrossover) {
  const double eps = 1e-2;
  ControlParams ctrl;
  ctrl.M1 = 10.0;
  ctrl.M2 = 1.0;
  ctrl.alpha = 1.0;
  ctrl.eps = eps;
  const Grid1D g(1.0, 3.0, 201);
  GasField f(g);
  for (auto& s : f.data) s = {1.0, 0.0};
  const AdmissibilityReport r = check_admissible_exterior(f, ctrl, kEos);
  EXPECT_FALSE(r.verdict);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    if (x > 1.0 / (1.0 - eps) + 1e-9) {
      EXPECT_LT(r.z_margin[i], 0.0) << x;
    }
    if (i > 0 && x < 1.0 / (1.0 - eps) - 1e-9) {
      EXPECT_GE(r.z_margin[i], 0.0) << x;
    }
  }
}

TEST(CheckAdmissibleExterior, InwardProfileAdmissibleForLargeM1) {
  ControlParams ctrl;
  ctrl.M1 = 10.0;
  ctrl.M2 = 1.0;
  ctrl.alpha = alpha_bounds(3, kEos).min;
  const Grid1D g(1.0, 11.0, 401);
  const MollifiedData m = mollify_exterior(make_profile("inward", {}, kEos, ctrl), kEos, ctrl.eps, g);
  const AdmissibilityReport r = check_admissible_exterior(m.field, ctrl, kEos);
  EXPECT_TRUE(r.verdict);
  EXPECT_GT(r.min_w_margin, 0.0);
  EXPECT_GT(r.min_z_margin, 0.0);
}

TEST(CheckAdmissibleExterior, FloorViolationFlagged) {
  ControlParams ctrl;
  ctrl.M1 = 10.0;
  const Grid1D g(1.0, 2.0, 11);
  GasField f(g);
  for (auto& s : f.data) s = {0.5, 0.0};
  f[4].rho = 0.5 * vacuum_floor(ctrl.eps, kEos);
  const AdmissibilityReport r = check_admissible_exterior(f, ctrl, kEos);
  EXPECT_FALSE(r.verdict);
  EXPECT_TRUE(r.floor_violation);
  EXPECT_FALSE(r.floor_ok[4]);
}

TEST(CheckAdmissibleOrigin, RestStateHasNegativeZ) {
  const ControlParams ctrl = origin_ctrl(1.0);
  const Grid1D g(0.5, 2.0, 31);
  GasField f(g);
  for (std::size_t i = 0; i < g.nx; ++i) f[i] = {0.1 * g.x(i), 0.0};
  const AdmissibilityReport r = check_admissible_origin(f, ctrl, kEos);
  EXPECT_GT(r.min_w_margin, 0.0);
  EXPECT_LT(r.min_z_margin, 0.0);
  EXPECT_FALSE(r.verdict);
}

TEST(CheckAdmissibleOrigin, EscapeSpeedIsOnTheBoundary) {
  ControlParams ctrl = origin_ctrl(0.0);
  ctrl.M3 = 10.0;
  const Grid1D g(0.5, 2.0, 4);
  GasField f(g);
  const double rho[] = {0.25, 1.0, 4.0, 0.0625};
  for (std::size_t i = 0; i < 4; ++i) f[i] = {rho[i], rho[i] * std::sqrt(rho[i])};
  const AdmissibilityReport r = check_admissible_origin(f, ctrl, kEos);
  EXPECT_EQ(r.min_z_margin, 0.0);
  EXPECT_TRUE(r.verdict);
}

TEST(CheckAdmissibleOrigin, MollifiedCompliantProfileAdmissibleOutsideCutoffLayer) {
  const double eps = 1e-2;
  const ControlParams ctrl = origin_ctrl(1.0, eps);
  const double a = default_inner_radius(eps);
  const Grid1D g(a, 3.0, 801);
  const InitialProfile p = make_profile("power_blast", {{"A", 0.5}, {"k", 8.0}, {"U", 0.2}}, kEos, ctrl);
  const MollifiedData m = mollify_origin(p, kEos, eps, g, ctrl);
  OriginAdmissibilityOptions opt;
  opt.z_exempt_below = 2 * a + eps;
  const AdmissibilityReport r = check_admissible_origin(unscale_field(m.field, ctrl), ctrl, kEos, opt);
  EXPECT_TRUE(r.verdict);
  // Without the exemption the cutoff layer near a shows z < 0.
  EXPECT_FALSE(check_admissible_origin(unscale_field(m.field, ctrl), ctrl, kEos).verdict);
}

TEST(ScaleTransform, ZeroExponentsAreIdentity) {
  const ControlParams ctrl = origin_ctrl(0.0);
  const Grid1D g(0.3, 2.0, 11);
  GasField f(g);
  for (std::size_t i = 0; i < g.nx; ++i) f[i] = {1.0 + g.x(i), -0.3 * g.x(i)};
  const ScaledField s = scale_transform(f, ctrl);
  for (std::size_t i = 0; i < g.nx; ++i) {
    EXPECT_EQ(s.xi[i], g.x(i));
    EXPECT_EQ(s.data[i].rho, f[i].rho);
    EXPECT_EQ(s.data[i].mom, f[i].mom);
  }
}

TEST(ScaleTransform, LogarithmicCoordinateExample) {
  ControlParams ctrl;
  ctrl.c = 2.0;
  ctrl.couple_decay_rates(kEos.theta);
  EXPECT_DOUBLE_EQ(ctrl.d, 3.0);
  GasField f(Grid1D(2.0, 4.0, 3));
  for (std::size_t i = 0; i < 3; ++i) f[i] = {std::pow(f.x(i), 2.0), std::pow(f.x(i), 3.0)};
  const ScaledField s = scale_transform(f, ctrl);
  EXPECT_NEAR(s.data[0].rho, 1.0, 1e-15);
  EXPECT_NEAR(s.data[0].mom, 1.0, 1e-15);
  EXPECT_NEAR(s.xi[0], std::log(2.0), 1e-15);
  EXPECT_NEAR(s.xi[2], std::log(4.0), 1e-15);
}

TEST(ScaleTransform, RoundTripProperty) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> C(0.0, 3.0), R(0.01, 5.0), M(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    ControlParams ctrl;
    ctrl.c = C(rng);
    ctrl.couple_decay_rates(EosParams::from_gamma(1.0 + 2.0 * C(rng) / 3.0 + 1e-3).theta);
    const Grid1D g(0.05, 4.0, 37);
    GasField f(g);
    for (auto& s : f.data) s = {R(rng), M(rng)};
    const auto back = inverse_scale_transform(scale_transform(f, ctrl), ctrl);
    for (std::size_t i = 0; i < g.nx; ++i) {
      EXPECT_NEAR(back[i].first, g.x(i), 1e-13 * g.x(i));
      EXPECT_NEAR(back[i].second.rho, f[i].rho, 1e-13 * f[i].rho);
      EXPECT_NEAR(back[i].second.mom, f[i].mom, 1e-13 * std::abs(f[i].mom));
    }
  }
}

TEST(FloorMonotonicityCertificate, Examples) {
  const FloorCertificate a = floor_monotonicity_certificate(kEos, 1e-2);
  EXPECT_TRUE(a.holds);
  EXPECT_TRUE(a.in_regime);
  const double eps = 1e-2;
  const FloorCertificate b = floor_monotonicity_certificate(EosParams::from_gamma(3.0), eps);
  EXPECT_TRUE(b.holds);
  EXPECT_NEAR(b.f0, eps - eps * eps, 1e-16);
  EXPECT_NEAR(b.min_derivative, 0.0, 1e-15);
  const FloorCertificate c = floor_monotonicity_certificate(kEos, 0.5);
  EXPECT_FALSE(c.in_regime);
}

TEST(Profiles, UnknownNameListsValidNames) {
  try {
    make_profile("nope", {}, kEos, ControlParams{});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("power_blast"), std::string::npos);
  }
}

TEST(Profiles, TableRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "sphvisc_profile_table.csv";
  {
    std::ofstream out(path);
    out << "x,rho,mom\n1,1,0\n2,3,1\n4,1,-1\n";
  }
  const InitialProfile p = make_profile("table", {}, kEos, ControlParams{}, path.string());
  EXPECT_DOUBLE_EQ(p.rho0(1.5), 2.0);
  EXPECT_DOUBLE_EQ(p.mom0(3.0), 0.0);
  EXPECT_DOUBLE_EQ(p.rho0(10.0), 1.0);
  std::filesystem::remove(path);
}

TEST(Profiles, BlastVelocityVanishesAtInnerBoundary) {
  const InitialProfile p = make_profile("blast", {}, kEos, ControlParams{});
  EXPECT_NEAR(p.mom0(1.0), 0.0, 1e-15);
  EXPECT_GT(p.mom0(1.5), 0.0);
}
