// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support/manufactured.hpp"
#include "sphvisc/density_floor.hpp"
#include "sphvisc/experiment.hpp"

using namespace sphvisc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double max_excess(const RunReport& r) {
  double v = -1e300;
  for (const auto& m : r.monitor) v = std::max({v, m.max_wbar, -m.min_zbar});
  return v;
}

bool all_monitors_pass(const RunReport& r) {
  for (const auto& m : r.monitor)
    if (!m.pass()) return false;
  return !r.monitor.empty();
}

// Order of e against dx between consecutive refinements.
std::vector<double> orders(const std::vector<double>& dx, const std::vector<double>& e) {
  std::vector<double> o;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) o.push_back(std::log(e[k] / e[k + 1]) / std::log(dx[k] / dx[k + 1]));
  return o;
}

Outcome exterior_invariant_region() {
  Outcome out{true, ""};
  for (const char* name : {"exterior-rest", "exterior-inward", "exterior-blast"}) {
    std::vector<double> K;
    double t800 = 0.0;
    bool monitors = true;
    for (std::size_t nx : {200u, 400u, 800u}) {
      RunConfig c = fixture(name);
      c.nx = nx;
      const ResolvedRun rr = resolve(c);
      if (!(std::sqrt(c.eps) * std::exp(rr.ctrl.C * c.t_end) < 1.0)) monitors = false;
      if (rr.grid.x_lo != 1.0 || rr.grid.x_hi != 11.0) monitors = false;
      const auto t0 = std::chrono::steady_clock::now();
      const RunReport rep = run(c, RunOptions{false});
      if (nx == 800) t800 = seconds_since(t0);
      monitors = monitors && all_monitors_pass(rep);
      const double dx = rr.grid.dx();
      K.push_back(std::max(0.0, max_excess(rep) - c.tol_atol) / (dx * dx));
    }
    const double coarse = std::max(K[0], K[1]);
    const bool bounded = std::isfinite(K[2]) && (K[2] == 0.0 || K[2] <= 2.0 * coarse);
    const bool ok = monitors && bounded && t800 <= 120.0;
    out.pass = out.pass && ok;
    out.detail += std::string(name) + ": K=" + num(K[0]) + "/" + num(K[1]) + "/" + num(K[2]) + " nx800 " + num(t800, 3) +
                  " s" + (ok ? "" : " [fail]") + "; ";
  }
  return out;
}

Outcome origin_invariant_region() {
  const RunConfig c = fixture("origin-blast-c1");
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport rep = run(c, RunOptions{false});
  const double t = seconds_since(t0);
  bool rates = true;
  double worst_rho = -1e300, min_u = 1e300, max_u = -1e300;
  for (const auto& m : rep.monitor) {
    rates = rates && m.rates_checked && m.rates_ok;
    worst_rho = std::max(worst_rho, m.max_rate_rho);
    min_u = std::min(min_u, m.min_rate_u);
    max_u = std::max(max_u, m.max_rate_u);
  }
  const bool ok = c.nx == 800 && all_monitors_pass(rep) && rates && t <= 180.0;
  return {ok, "nx=" + std::to_string(c.nx) + " rows=" + std::to_string(rep.monitor.size()) + " max rho^th/x^(c th)=" +
                  num(worst_rho) + " (<= " + num(0.5 * c.M3 + c.eps) + ") u/x^(c th) in [" + num(min_u) + ", " + num(max_u) +
                  "] runtime " + num(t, 3) + " s"};
}

Outcome maximum_principle() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::size_t> nxs{100, 200, 400};
  std::vector<double> dx, tol;
  for (std::size_t nx : nxs) {
    dx.push_back(1.0 / static_cast<double>(nx - 1));
    tol.push_back(1e-8 + 10.0 * dx.back() * dx.back());
  }
  const double tol_order = orders(dx, tol).back();
  bool ok = tol_order >= 1.5;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const GenericCase gc = random_generic_case(seed);
    for (std::size_t k = 0; k < nxs.size(); ++k) {
      const double v = run_generic(gc, nxs[k], 0.1).violation();
      worst = std::max(worst, v / tol[k]);
      ok = ok && v <= tol[k];
    }
  }
  const double neg = run_generic(random_generic_case(1, true), nxs[0], 0.1).violation();
  ok = ok && neg > tol[0];
  const double t = seconds_since(t0);
  ok = ok && t <= 60.0;
  return {ok, "tol order " + num(tol_order, 3) + ", worst violation/tol " + num(worst) + ", negative control violation " +
                  num(neg) + " (tol " + num(tol[0]) + "), runtime " + num(t, 3) + " s"};
}

Outcome parameter_formulas() {
  const EosParams e2 = EosParams::from_gamma(2.0);
  const AlphaBounds ab = alpha_bounds(3, e2);
  bool ok = std::abs(ab.min - 0.343146) <= 1e-5 && std::abs(ab.max - 11.65685) <= 1e-5;
  for (double th : {0.1, 0.5, 0.9}) {
    const BetaRoots br = beta_roots(EosParams::from_gamma(2.0 * th + 1.0));
    ok = ok && br.certified && std::abs(br.g1) <= 1e-10 && std::abs(br.g2) <= 1e-10;
  }
  const BetaRoots b1 = beta_roots(EosParams::from_gamma(3.0));
  ok = ok && b1.certified && b1.beta1 == 0.25 && b1.beta2_infinite;
  auto signs = [&](double alpha) {
    ControlParams ctrl;
    ctrl.alpha = alpha;
    ctrl.M2 = 1.0;
    ctrl.eps = 1e-4;
    const ChosenConstants cc = sufficient_constants(1.0, e2, 3, alpha);
    ctrl.M1 = cc.M1;
    ctrl.C = cc.C;
    return verify_R_signs(ctrl, e2).violations;
  };
  std::string d = "alpha bounds (" + num(ab.min, 7) + ", " + num(ab.max, 7) + "); violations at min/mid/max:";
  for (double a : {ab.min, 0.5 * (ab.min + ab.max), ab.max * (1.0 - 1e-6)}) {
    const std::size_t v = signs(a);
    ok = ok && v == 0;
    d += " " + std::to_string(v);
  }
  const std::size_t above = signs(1.05 * ab.max);
  ok = ok && above >= 1;
  d += "; at 1.05 max: " + std::to_string(above);
  return {ok, d};
}

struct SweepBundle {
  SweepReport exterior, origin;
  double exterior_s = 0.0, origin_s = 0.0;
};

const std::vector<double> kSweepEps{4e-3, 2e-3, 1e-3};

Outcome entropy_inequality(const SweepBundle& s) {
  bool ok = true;
  std::string d;
  for (const auto* rep : {&s.exterior, &s.origin}) {
    const RunConfig& base = rep->runs.front().config;
    // D >= -(K_visc eps + K_dx dx^2) with K_visc = K_dx is K <= K_visc.
    bool within = true;
    for (double K : rep->entropy_K) within = within && K <= base.K_visc && base.K_visc == base.K_dx;
    const bool stable = rep->entropy_K_ratio <= 2.0;
    ok = ok && within && stable;
    d += base.name.substr(0, base.name.find("-eps")) + ": K=";
    for (double K : rep->entropy_K) d += num(K) + " ";
    d += "ratio " + num(rep->entropy_K_ratio) + "; ";
  }
  d += "sweep runtime " + num(s.exterior_s + s.origin_s, 3) + " s";
  ok = ok && s.exterior_s + s.origin_s <= 600.0;
  return {ok, d};
}

Outcome weak_consistency(const SweepBundle& s) {
  const auto& w = s.exterior.weak_residual;
  bool decreasing = true;
  for (std::size_t i = 1; i < w.size(); ++i) decreasing = decreasing && w[i] < w[i - 1];
  const bool ok = decreasing && s.exterior.weak_order >= 0.8;
  return {ok, "residual " + num(w[0]) + " / " + num(w[1]) + " / " + num(w[2]) + ", order " + num(s.exterior.weak_order, 3)};
}

Outcome dissipation_uniformity(const SweepBundle& s) {
  const auto& d = s.exterior.dissipation;
  const double ratio = s.exterior.dissipation_ratio;
  return {ratio <= 3.0, "integral " + num(d[0]) + " / " + num(d[1]) + " / " + num(d[2]) + ", max/min " + num(ratio, 3) +
                            ", bound constant " + num(*std::max_element(d.begin(), d.end()))};
}

Outcome density_floor() {
  RunConfig c = fixture("exterior-blast");
  c.diag_floor = true;
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport rep = run(c, RunOptions{true});
  const double t = seconds_since(t0);
  Trajectory traj = rep.trajectory;
  FloorOptions fo;
  fo.nodes = c.floor_nodes;
  fo.tol = c.floor_tol;
  const FloorReport fr = density_floor_of_run(traj, fo);
  const double dxo = (traj.grid().x_hi - traj.grid().x_lo) / static_cast<double>(fo.nodes - 1);
  const double mtol = 5.0 * (dxo * dxo + 1e-8);
  double mass_err = 0.0;
  for (double eps : {1e-3, 1e-2, 1.0})
    for (double dt : {1e-6, 1e-3, 1.0}) mass_err = std::max(mass_err, std::abs(kernel_mass(dt, eps) - 1.0));
  const KernelBoundCertificate kb = kernel_bound_check(1.0, 2.0 / 3.0);
  const bool ok = c.eps == 1e-2 && fr.verdict && fr.min_rho >= fr.oracle_floor * (1.0 - 0.05) && fr.mismatch < mtol &&
                  mass_err <= 1e-12 && kb.finite && t <= 180.0;
  return {ok, "min rho " + num(fr.min_rho, 6) + " >= 0.95 * floor " + num(fr.oracle_floor, 6) + "; mismatch " + num(fr.mismatch) +
                  " < " + num(mtol) + "; kernel mass error " + num(mass_err, 2) + "; ratio sup " + num(kb.max_ratio) +
                  "; runtime " + num(t, 3) + " s"};
}

Outcome reductions() {
  const EosParams eos = EosParams::from_gamma(2.0);
  bool ok = true;
  std::string d;

  // c = 0 origin stepping against exterior stepping without the extra viscous term.
  ControlParams ctrl;
  ctrl.alpha = alpha_bounds(3, eos).min;
  ctrl.c = 0.0;
  ctrl.couple_decay_rates(eos.theta);
  const Grid1D g(1.0, 11.0, 401);
  MollifiedData m = mollify_exterior(make_profile("blast", {}, eos, ctrl), eos, ctrl.eps, g);
  SolverConfig cfg;
  cfg.boundary = m.boundary;
  cfg.extra_visc_term = false;
  double step_diff = 0.0;
  GasField a = m.field;
  for (int k = 0; k < 10; ++k) {
    const double dt = cfl_dt(a, eos, cfg);
    const GasField ea = step_exterior(a, eos, cfg, ctrl, dt);
    const GasField ob = step_scaled_origin(a, eos, cfg, ctrl, dt);
    for (std::size_t i = 0; i < g.nx; ++i)
      step_diff = std::max({step_diff, std::abs(ea[i].rho - ob[i].rho), std::abs(ea[i].mom - ob[i].mom)});
    a = ea;
  }
  ok = ok && step_diff <= 1e-12;
  d += "c=0 step difference " + num(step_diff, 2);

  // Round trip of the scaling transform.
  double rt = 0.0;
  for (double c : {0.5, 1.0, 2.0}) {
    ControlParams sc;
    sc.c = c;
    sc.couple_decay_rates(eos.theta);
    const GasField phys = m.field;
    const auto back = inverse_scale_transform(scale_transform(phys, sc), sc);
    for (std::size_t i = 0; i < phys.nx(); ++i) {
      rt = std::max(rt, std::abs(back[i].first - phys.x(i)) / phys.x(i));
      rt = std::max(rt, std::abs(back[i].second.rho - phys[i].rho) / std::abs(phys[i].rho));
      if (phys[i].mom != 0.0) rt = std::max(rt, std::abs(back[i].second.mom - phys[i].mom) / std::abs(phys[i].mom));
    }
  }
  ok = ok && rt <= 1e-13;
  d += "; round trip " + num(rt, 2);

  // Identity and vacuum cases.
  bool trivial = true;
  trivial = trivial && pressure(0.0, eos) == 0.0 && pressure(1.0, eos) == 0.125;
  trivial = trivial && std::abs(pressure(2.0, EosParams::from_gamma(3.0)) - 8.0 / 3.0) < 1e-15;
  const RiemannPair r1 = riemann_invariants({1.0, 0.0}, eos), r2 = riemann_invariants({1.0, 1.0}, eos);
  trivial = trivial && r1.w == 1.0 && r1.z == -1.0 && r2.w == 2.0 && r2.z == 0.0;
  const CharacteristicSpeeds sp = eigenvalues({4.0, 4.0}, EosParams::from_gamma(3.0));
  trivial = trivial && sp.lambda1 == -3.0 && sp.lambda2 == 5.0;
  ControlParams zero;
  zero.c = 0.0;
  zero.couple_decay_rates(eos.theta);
  const ScaledField id = scale_transform(m.field, zero);
  for (std::size_t i = 0; i < g.nx; ++i)
    trivial = trivial && id.xi[i] == g.x(i) && id.data[i].rho == m.field[i].rho && id.data[i].mom == m.field[i].mom;
  ControlParams log_map;
  log_map.c = 2.0;
  log_map.couple_decay_rates(eos.theta);
  const GasState s = scale_state({4.0, 8.0}, 2.0, log_map);
  trivial = trivial && std::abs(s.rho - 1.0) < 1e-15 && std::abs(s.mom - 1.0) < 1e-15 &&
            std::abs(XiMap{log_map.c, log_map.d}.xi(2.0) - std::log(2.0)) < 1e-15;
  const GasField rest = [&] {
    GasField f(g);
    for (auto& v : f.data) v = {0.7, 0.0};
    return f;
  }();
  SolverConfig rc;
  rc.boundary = {rest[0], rest[g.nx - 1]};
  const GasField rest1 = step_exterior(rest, eos, rc, ctrl, 0.5 * cfl_dt(rest, eos, rc));
  for (std::size_t i = 0; i < g.nx; ++i) trivial = trivial && rest1[i].rho == 0.7 && rest1[i].mom == 0.0;
  ok = ok && trivial;
  d += std::string("; identity and vacuum cases ") + (trivial ? "hold" : "FAIL");
  return {ok, d};
}

Outcome manufactured_convergence() {
  const EosParams eos = EosParams::from_gamma(2.0);
  ControlParams ext;
  ext.alpha = alpha_bounds(3, eos).min;
  const ChosenConstants cc = sufficient_constants(1.0, eos, 3, ext.alpha);
  ext.M1 = cc.M1;
  ext.C = cc.C;
  ControlParams org;
  org.c = 1.0;
  org.couple_decay_rates(eos.theta);
  const XiMap map{org.c, org.d};
  struct Case {
    const char* name;
    mms::Form form;
    double lo, hi;
    const ControlParams* ctrl;
  };
  const Case cases[] = {{"exterior", mms::Form::exterior, 1.0, 3.0, &ext},
                        {"origin (x)", mms::Form::origin_x, 0.5, 2.5, &org},
                        {"origin (xi)", mms::Form::origin_xi, map.xi(0.5), map.xi(2.5), &org}};
  bool ok = true;
  std::string d;
  for (const Case& c : cases) {
    std::vector<double> dx, err;
    for (std::size_t nx : {100u, 200u, 400u}) {
      dx.push_back((c.hi - c.lo) / static_cast<double>(nx - 1));
      err.push_back(mms::manufactured_error(c.form, nx, c.lo, c.hi, 0.2, 0.05, *c.ctrl, eos));
    }
    const auto o = orders(dx, err);
    ok = ok && o[0] >= 1.9 && o[1] >= 1.9;
    d += std::string(c.name) + " " + num(o[0], 4) + "/" + num(o[1], 4) + "; ";
  }
  return {ok, d};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << id << " [" << title << "]: " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ("
              << num(seconds_since(t0), 3) << " s)" << std::endl;
  };

  report(1, "invariant region, exterior", exterior_invariant_region);
  report(2, "invariant region and decay rates, origin", origin_invariant_region);
  report(3, "maximum principle", maximum_principle);
  report(4, "parameter formulas", parameter_formulas);

  SweepBundle sweeps;
  bool sweeps_ok = true;
  std::string sweep_error;
  try {
    auto t0 = std::chrono::steady_clock::now();
    sweeps.exterior = sweep(fixture("exterior-blast"), kSweepEps);
    sweeps.exterior_s = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    sweeps.origin = sweep(fixture("origin-blast-c1"), kSweepEps);
    sweeps.origin_s = seconds_since(t0);
  } catch (const std::exception& e) {
    sweeps_ok = false;
    sweep_error = e.what();
  }
  auto guarded = [&](Outcome (*fn)(const SweepBundle&)) {
    return [&, fn]() -> Outcome {
      if (!sweeps_ok) return {false, "sweep error: " + sweep_error};
      return fn(sweeps);
    };
  };
  report(5, "entropy inequality", guarded(entropy_inequality));
  report(6, "weak-form consistency", guarded(weak_consistency));
  report(7, "dissipation uniformity", guarded(dissipation_uniformity));
  report(8, "density floor", density_floor);
  report(9, "reductions", reductions);
  report(10, "manufactured-solution convergence", manufactured_convergence);

  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
