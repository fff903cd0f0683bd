// sphvisc: run, sweep and emit viscous spherically symmetric gas experiments.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sphvisc/experiment.hpp"

using namespace sphvisc;

namespace {

struct Source {
  std::string config;
  std::string fixture;
};

RunConfig load(const Source& src) {
  if (!src.config.empty() && !src.fixture.empty()) throw ConfigError("give either --config or --fixture, not both");
  if (!src.config.empty()) return load_config(src.config);
  if (!src.fixture.empty()) return fixture(src.fixture);
  throw ConfigError("one of --config or --fixture is required");
}

std::vector<double> parse_eps_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(detail::parse_double("--eps", tok));
  }
  return out;
}

void print_run(const RunReport& rep) {
  std::size_t mf = 0, df = 0, ff = 0;
  for (const auto& m : rep.monitor) mf += m.verdict ? 0 : 1;
  for (const auto& d : rep.diagnostics) df += d.verdict ? 0 : 1;
  for (const auto& f : rep.floor) ff += f.verdict ? 0 : 1;
  double worst_w = -1e300, worst_z = 1e300;
  for (const auto& m : rep.monitor) {
    worst_w = std::max(worst_w, m.max_wbar);
    worst_z = std::min(worst_z, m.min_zbar);
  }
  std::cout << rep.config.name << " [" << to_string(rep.config.scenario) << "] hash=" << rep.hash << "\n"
            << "  nx=" << rep.resolved.grid.nx << " dx=" << rep.resolved.grid.dx() << " eps=" << rep.config.eps
            << " t_end=" << rep.config.t_end << "\n"
            << "  monitor: " << rep.monitor.size() << " rows, " << mf << " failed, max wbar=" << worst_w
            << " min zbar=" << worst_z << "\n"
            << "  diagnostics: " << rep.diagnostics.size() << " rows, " << df << " failed\n"
            << "  floor: " << rep.floor.size() << " rows, " << ff << " failed\n";
  for (const auto& w : rep.warnings) std::cout << "  warning: " << w << "\n";
  std::cout << "  wall clock " << rep.wall_clock << " s\n"
            << "  verdict: " << (rep.verdict ? "pass" : "fail") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vanishing-viscosity experiments for spherically symmetric isentropic flow"};
  app.require_subcommand(1);

  Source src;
  std::string out_dir, eps_list, what = "all";
  bool strict = false;
  double eps_override = 0.0;

  auto add_source = [&](CLI::App* sub) {
    sub->add_option("--config", src.config, "INI run configuration");
    sub->add_option("--fixture", src.fixture, "bundled fixture name");
  };

  auto* run_cmd = app.add_subcommand("run", "run one configuration");
  add_source(run_cmd);
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--eps", eps_override, "override the viscosity");
  run_cmd->add_flag("--strict", strict, "fail on any monitor warning");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a decreasing viscosity sweep");
  add_source(sweep_cmd);
  sweep_cmd->add_option("--eps", eps_list, "comma-separated, strictly decreasing viscosities")->required();
  sweep_cmd->add_option("--out", out_dir, "output directory");
  sweep_cmd->add_flag("--strict", strict, "fail on any monitor warning");

  auto* emit_cmd = app.add_subcommand("emit", "run a configuration and write plot tables");
  add_source(emit_cmd);
  emit_cmd->add_option("--what", what, "profiles | margins | all");
  emit_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* fix_cmd = app.add_subcommand("fixtures", "bundled fixtures");
  fix_cmd->require_subcommand(1);
  auto* fix_list = fix_cmd->add_subcommand("list", "list fixture names");
  std::string show_name;
  auto* fix_show = fix_cmd->add_subcommand("show", "print a fixture as INI");
  fix_show->add_option("name", show_name)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fix_list) {
      for (const auto& n : fixture_names()) std::cout << n << "\n";
      return 0;
    }
    if (*fix_show) {
      std::cout << to_ini(fixture(show_name));
      return 0;
    }
    RunConfig cfg = load(src);
    if (*run_cmd) {
      if (eps_override > 0.0) cfg.eps = eps_override;
      const RunReport rep = run(cfg);
      if (!out_dir.empty()) write_reports(rep, out_dir);
      print_run(rep);
      return (strict ? rep.strict_verdict() : rep.verdict) ? 0 : 1;
    }
    if (*sweep_cmd) {
      const auto list = parse_eps_list(eps_list);
      const SweepReport s = sweep(cfg, list);
      bool ok = s.verdict;
      for (const auto& r : s.runs) {
        if (!out_dir.empty()) write_reports(r, std::filesystem::path(out_dir) / r.config.name);
        print_run(r);
        if (strict) ok = ok && r.strict_verdict();
      }
      if (!out_dir.empty()) write_sweep_report(s, cfg, out_dir);
      std::cout << "sweep: cauchy decreasing=" << (s.cauchy.decreasing ? "yes" : "no")
                << " dissipation max/min=" << s.dissipation_ratio << " entropy K max/min=" << s.entropy_K_ratio
                << " weak residual order=" << s.weak_order << "\n"
                << "sweep verdict: " << (ok ? "pass" : "fail") << "\n";
      return ok ? 0 : 1;
    }
    if (*emit_cmd) {
      const RunReport rep = run(cfg);
      const auto files = emit_plotdata(rep, what, out_dir);
      std::cout << "wrote " << files.size() << " files to " << out_dir << "\n";
      return rep.verdict ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
