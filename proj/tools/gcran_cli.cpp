#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gcran/model.hpp"
#include "gcran/report_io.hpp"
#include "gcran/runner.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  double rho = 1.0;
  bool adaptive_rho = false;
  double outer_tol = 1e-4;
  double admm_tol_abs = 1e-4;
  double admm_tol_rel = 1e-3;
  int max_outer = 30;
  int max_admm_iter = 500;
  bool greedy = false;
  bool no_polish = false;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--config", a.config, "Scenario file (JSON); defaults to the built-in scenario");
  app->add_option("--seed", a.seed, "Override the scenario seed");
  app->add_option("--out", a.out, "Output file (stdout when omitted)");
  app->add_option("--rho", a.rho, "ADMM penalty parameter")->check(CLI::PositiveNumber);
  app->add_flag("--adaptive-rho", a.adaptive_rho, "Rebalance rho from the residual ratio");
  app->add_option("--outer-tol", a.outer_tol, "Relative objective change that ends the outer loop");
  app->add_option("--admm-tol-abs", a.admm_tol_abs, "Absolute ADMM residual tolerance");
  app->add_option("--admm-tol-rel", a.admm_tol_rel, "Relative ADMM residual tolerance");
  app->add_option("--max-outer", a.max_outer, "Outer WMMSE iteration budget")->check(CLI::NonNegativeNumber);
  app->add_option("--max-admm-iter", a.max_admm_iter, "ADMM iteration budget")->check(CLI::PositiveNumber);
  app->add_flag("--greedy-topology", a.greedy, "Greedy topology update instead of enumeration");
  app->add_flag("--no-polish", a.no_polish, "Skip fixed-topology refinement of ADMM points");
}

gcran::ScenarioConfig load_scenario(const CommonArgs& a, bool small) {
  gcran::ScenarioConfig cfg;
  if (a.config.empty()) {
    cfg = small ? gcran::default_small_scenario() : gcran::default_scenario();
    gcran::default_harvest_profile(cfg);
  } else {
    cfg = gcran::load_config(a.config);
  }
  if (a.seed) cfg.rng_seed = *a.seed;
  cfg.validate();
  return cfg;
}

gcran::RunOptions run_options(const CommonArgs& a) {
  gcran::RunOptions o;
  o.admm.rho = a.rho;
  o.admm.adaptive_rho = a.adaptive_rho;
  o.admm.tol_abs = a.admm_tol_abs;
  o.admm.tol_rel = a.admm_tol_rel;
  o.admm.max_iter = a.max_admm_iter;
  o.admm.greedy_topology = a.greedy;
  o.outer_tol = a.outer_tol;
  o.max_outer = a.max_outer;
  o.polish = !a.no_polish;
  return o;
}

template <typename Write>
void emit(const std::string& path, Write write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write(f);
}

void summarize(const gcran::RunReport& rep) {
  std::cerr << "status " << gcran::status_name(rep.status) << ", cost " << rep.cost << ", outer "
            << rep.outer_iterations << ", admm " << rep.admm_iterations_total << ", " << rep.elapsed_seconds
            << " s\n";
  if (!rep.message.empty()) std::cerr << rep.message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Green C-RAN energy-trading optimizer"};
  app.require_subcommand(1);

  CommonArgs solve_args, sweep_args, trace_args;
  auto* solve = app.add_subcommand("solve", "Solve one instance and write the JSON report");
  add_common(solve, solve_args);

  auto* sweep = app.add_subcommand("sweep", "Sweep the arrival rate of all users and write a CSV table");
  add_common(sweep, sweep_args);
  std::string grid = "1.5:8.5:0.5";
  int realizations = 1;
  sweep->add_option("--lambda-grid", grid, "start:stop:step in Mbit/s");
  sweep->add_option("--realizations", realizations, "Channel realizations averaged per point")
      ->check(CLI::PositiveNumber);

  auto* trace = app.add_subcommand("trace", "Write the ADMM residual trace of every outer iteration");
  add_common(trace, trace_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      const auto cfg = load_scenario(solve_args, false);
      const auto ch = gcran::generate_channels(cfg, cfg.rng_seed);
      const auto rep = gcran::wmmse_admm(cfg, ch, run_options(solve_args));
      emit(solve_args.out, [&](std::ostream& os) { os << gcran::report_to_json(rep); });
      summarize(rep);
      return gcran::exit_code(rep.status);
    }
    if (*sweep) {
      const auto cfg = load_scenario(sweep_args, false);
      gcran::SweepOptions opts;
      opts.run = run_options(sweep_args);
      opts.realizations = realizations;
      const auto rows = gcran::sweep_arrival_rates(cfg, gcran::parse_grid(grid), cfg.rng_seed, opts);
      emit(sweep_args.out, [&](std::ostream& os) { gcran::write_sweep_csv(os, rows); });
      bool any_feasible = false, all_converged = true;
      for (const auto& r : rows) {
        any_feasible = any_feasible || r.feasible;
        all_converged = all_converged && r.status != gcran::RunStatus::NotConverged;
      }
      if (!any_feasible) return 2;
      return all_converged ? 0 : 3;
    }
    const auto cfg = load_scenario(trace_args, true);
    const auto ch = gcran::generate_channels(cfg, cfg.rng_seed);
    const auto rep = gcran::wmmse_admm(cfg, ch, run_options(trace_args));
    emit(trace_args.out, [&](std::ostream& os) { gcran::write_traces_csv(os, rep); });
    summarize(rep);
    return gcran::exit_code(rep.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
