#pragma once

#include <string>

#include <json.hpp>

#include "pipenet/functionals.hpp"
#include "pipenet/netsolver.hpp"
#include "pipenet/optimize.hpp"

namespace pipenet {

enum class InitialKind { Constant, Riemann, Tabulated };

// Everything a run needs, as read from a scenario file: the network, the
// initial data recipe, solver settings, the control schedule and (optionally)
// the cost / optimization blocks.
struct Scenario {
  std::string name;
  NetworkModel model;

  InitialKind initial_kind = InitialKind::Constant;
  std::vector<FluidState> initial_states;  // per pipe (Constant / Riemann background)
  int riemann_pipe = 0;
  FluidState riemann_left, riemann_right;
  double riemann_split = 0.0;
  std::vector<std::vector<FluidState>> tabulated;

  SolverConfig solver;
  ControlSchedule control;

  bool has_cost = false;
  CostSpec cost;

  bool has_optimization = false;
  ControlParam opt;
  int opt_budget = 0;

  // Rebuilds dx from a new cell count, keeping the physical length.
  void set_cells(int cells);
};

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& s);

// Instantiates the initial extended state (cells + control) on the grid.
NetworkState build_initial_state(const Scenario& s);

// Hard feasibility checks mirrored by the `check` subcommand: pipe counts,
// subsonic data, transversality at the reference.
void validate_scenario(const Scenario& s);

}  // namespace pipenet
