#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "pipenet/io.hpp"
#include "pipenet/scenario.hpp"

namespace {

using namespace pipenet;

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir = ".";
  int cells = 0;       // 0: keep scenario value
  double cfl = 0.0;    // 0: keep scenario value
  std::uint64_t seed = 0;
  bool parallel = false;
};

Scenario load_with_overrides(const CommonArgs& args) {
  Scenario s = load_scenario(args.scenario_path);
  if (args.cells > 0) s.set_cells(args.cells);
  if (args.cfl > 0.0) s.solver.cfl = args.cfl;
  if (args.parallel) s.solver.mode = RunMode::Parallel;
  return s;
}

int run_check(const CommonArgs& args) {
  const Scenario s = load_with_overrides(args);
  bool ok = true;

  try {
    validate_scenario(s);
    std::cout << "scenario: " << s.name << "  [parse OK]\n";
  } catch (const SolverError& e) {
    std::cout << "FAIL scenario validation: " << e.what() << "\n";
    return 1;
  }

  const auto& cond = s.model.coupling;
  const double det = transversality_det(cond, s.model.pipes, cond.reference);
  const double det_fd =
      transversality_det_fd(cond, s.model.pipes, cond.reference);
  std::cout << "transversality det (analytic) = " << fmt17(det) << "\n";
  std::cout << "transversality det (fin.diff) = " << fmt17(det_fd) << "\n";
  if (det == 0.0 || !std::isfinite(det)) {
    std::cout << "FAIL transversality\n";
    ok = false;
  }

  for (std::size_t l = 0; l < s.model.n_pipes(); ++l) {
    const auto& u = cond.reference[l];
    const auto lam = eigenvalues(s.model.pipes[l], u);
    const double c = sound_speed(s.model.pipes[l].law, u.density);
    std::cout << "pipe " << l << ": lambda = [" << fmt17(lam[0]) << ", "
              << fmt17(lam[1]) << "], subsonic margin = "
              << fmt17(c - std::abs(u.velocity())) << "\n";
    if (!(lam[0] < 0.0 && lam[1] > 0.0)) {
      std::cout << "FAIL subsonic check on pipe " << l << "\n";
      ok = false;
    }

    const auto report = validate_source(s.model.pipes[l], u);
    std::cout << "pipe " << l << ": source validation "
              << (report.passed() ? "PASS" : "FAIL")
              << " (mu = " << fmt17(report.mu_total)
              << ", L_hat = " << fmt17(report.lipschitz_hat) << ")\n";
    if (!report.passed()) {
      std::cout << "  " << report.detail << "\n";
      ok = false;
    }
  }

  const NetworkState state = build_initial_state(s);
  std::cout << "CFL estimate: dt = " << fmt17(cfl_dt(s.model, state, s.solver.cfl))
            << " at cfl = " << fmt17(s.solver.cfl) << "\n";

  const auto psi_val = psi(cond, s.model.pipes, cond.reference);
  const auto& Pi0 = s.control.value_at(0.0);
  double mismatch = 0.0;
  for (std::size_t k = 0; k < psi_val.size(); ++k)
    mismatch += std::abs(psi_val[k] - Pi0[k]);
  std::cout << "||Psi(u_bar) - Pi(0)||_1 = " << fmt17(mismatch) << "\n";

  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

int run_simulate(const CommonArgs& args) {
  Scenario s = load_with_overrides(args);
  validate_scenario(s);
  std::filesystem::create_directories(args.out_dir);

  const NetworkState initial = build_initial_state(s);
  const Trajectory traj = evolve(s.model, initial, s.solver);

  const auto out = [&](const std::string& name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };
  write_trajectory_csv(out("trajectory.csv"), s.model, traj);
  write_functional_series_csv(out("functionals.csv"), s.model, traj, s.control,
                              FunctionalConfig{});
  write_junction_csv(out("junction.csv"), traj);
  save_scenario(out("scenario_echo.json"), s);

  std::cout << "simulated " << s.name << " to t = "
            << fmt17(traj.snapshots.back().time) << " (" << traj.steps.size()
            << " steps), mass error " << fmt17(traj.mass_max_rel_error)
            << ", max TV " << fmt17(traj.tv_max) << "\n";
  return 0;
}

int run_optimize(const CommonArgs& args) {
  Scenario s = load_with_overrides(args);
  validate_scenario(s);
  if (!s.has_optimization || !s.has_cost) {
    std::cerr << "scenario has no optimization/cost block\n";
    return 1;
  }
  std::filesystem::create_directories(args.out_dir);

  const NetworkState initial = build_initial_state(s);
  const Objective objective =
      make_objective(s.model, initial, s.solver, s.cost);
  const OptResult result = minimize(objective, s.opt, s.opt_budget);

  const auto out = [&](const std::string& name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };
  write_optimization_csv(out("optimization.csv"), result);

  Scenario best = s;
  best.control = result.best_control;
  save_scenario(out("best_control.json"), best);

  NetworkState final_state = initial;
  final_state.control = result.best_control;
  const Trajectory traj = evolve(s.model, final_state, s.solver);
  write_trajectory_csv(out("trajectory.csv"), s.model, traj);
  write_junction_csv(out("junction.csv"), traj);

  std::cout << "optimize " << s.name << ": evaluations = "
            << result.log.size() << ", best J = "
            << fmt17(result.best_cost.total) << " (J_o = "
            << fmt17(result.best_cost.J_o) << ", J_1 = "
            << fmt17(result.best_cost.J_1_integral) << ")\n";
  return 0;
}

int run_probe(const CommonArgs& args, int pairs, double scale) {
  Scenario s = load_with_overrides(args);
  validate_scenario(s);
  std::filesystem::create_directories(args.out_dir);

  const auto out_path =
      (std::filesystem::path(args.out_dir) / "lipschitz.csv").string();
  std::ofstream out(out_path);
  out << "scale,cells,pair,u_gap,pi_gap,final_gap,ratio\n";

  for (double sc : {scale, 0.1 * scale}) {
    for (int cells : {s.model.grid.cells, 2 * s.model.grid.cells}) {
      Scenario graded = s;
      graded.set_cells(cells);
      const NetworkState initial = build_initial_state(graded);
      const auto samples = lipschitz_harness(graded.model, initial,
                                             graded.solver, pairs, sc,
                                             args.seed);
      double max_ratio = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& smp = samples[i];
        max_ratio = std::max(max_ratio, smp.ratio);
        out << fmt17(sc) << ',' << cells << ',' << i << ','
            << fmt17(smp.u_gap) << ',' << fmt17(smp.pi_gap) << ','
            << fmt17(smp.final_gap) << ',' << fmt17(smp.ratio) << '\n';
      }
      std::cout << "scale " << sc << ", cells " << cells
                << ": max ratio = " << fmt17(max_ratio) << "\n";
    }
  }

  const NetworkState initial = build_initial_state(s);
  const auto causal = causality_probe(s.model, initial, s.solver, 0.5);
  std::cout << "control perturbation after T: final gap = "
            << fmt17(causal.final_gap) << " (ratio " << fmt17(causal.ratio)
            << ")\n";
  return causal.final_gap == 0.0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Junction network simulator and control optimizer"};
  app.require_subcommand(1);

  CommonArgs args;
  int pairs = 25;
  double scale = 1e-3;

  const auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("scenario", args.scenario_path, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_out) cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--cells", args.cells, "override grid cell count");
    cmd->add_option("--cfl", args.cfl, "override CFL number");
    cmd->add_option("--seed", args.seed, "random seed");
    cmd->add_flag("--parallel", args.parallel, "use the OpenMP kernels");
  };

  CLI::App* check = app.add_subcommand("check", "validate a scenario");
  add_common(check, false);
  CLI::App* simulate = app.add_subcommand("simulate", "run and emit CSVs");
  add_common(simulate, true);
  CLI::App* optimize = app.add_subcommand("optimize", "minimize the cost");
  add_common(optimize, true);
  CLI::App* probe =
      app.add_subcommand("probe-lipschitz", "empirical stability ratios");
  add_common(probe, true);
  probe->add_option("--pairs", pairs, "perturbation pairs per combination");
  probe->add_option("--scale", scale, "base perturbation scale");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check(args);
    if (simulate->parsed()) return run_simulate(args);
    if (optimize->parsed()) return run_optimize(args);
    if (probe->parsed()) return run_probe(args, pairs, scale);
  } catch (const pipenet::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
