#include "pipenet/scenario.hpp"

#include <fstream>

namespace pipenet {

using nlohmann::json;

namespace {

json state_to_json(const FluidState& u) {
  return json::array({u.density, u.momentum});
}

FluidState state_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    fail(ErrorCode::BadScenario, "fluid state must be [density, momentum]");
  return {j[0].get<double>(), j[1].get<double>()};
}

const char* variant_name(CouplingVariant v) {
  switch (v) {
    case CouplingVariant::Compressor: return "compressor";
    case CouplingVariant::UnderflowGate: return "underflow_gate";
    case CouplingVariant::MultiValve: return "multi_valve";
    case CouplingVariant::PumpingStation: return "pumping_station";
  }
  return "?";
}

CouplingVariant variant_from_name(const std::string& s) {
  if (s == "compressor") return CouplingVariant::Compressor;
  if (s == "underflow_gate") return CouplingVariant::UnderflowGate;
  if (s == "multi_valve") return CouplingVariant::MultiValve;
  if (s == "pumping_station") return CouplingVariant::PumpingStation;
  fail(ErrorCode::BadScenario, "unknown coupling variant: " + s);
}

const char* cost_name(CostVariant v) {
  switch (v) {
    case CostVariant::CompressorTarget: return "compressor_target";
    case CostVariant::GateSmoothing: return "gate_smoothing";
    case CostVariant::ValveOverflow: return "valve_overflow";
    case CostVariant::PumpCost: return "pump_cost";
  }
  return "?";
}

CostVariant cost_from_name(const std::string& s) {
  if (s == "compressor_target") return CostVariant::CompressorTarget;
  if (s == "gate_smoothing") return CostVariant::GateSmoothing;
  if (s == "valve_overflow") return CostVariant::ValveOverflow;
  if (s == "pump_cost") return CostVariant::PumpCost;
  fail(ErrorCode::BadScenario, "unknown cost variant: " + s);
}

json law_to_json(const PressureLaw& law) {
  if (law.kind == LawKind::ShallowWater)
    return json{{"kind", "shallow_water"}, {"g", law.g}};
  return json{{"kind", "gamma_law"},
              {"p_star", law.p_star},
              {"rho_star", law.rho_star},
              {"gamma", law.gamma}};
}

PressureLaw law_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "shallow_water")
    return PressureLaw::shallow_water(j.at("g").get<double>());
  if (kind == "gamma_law")
    return PressureLaw::gamma_law(j.at("p_star").get<double>(),
                                  j.at("rho_star").get<double>(),
                                  j.at("gamma").get<double>());
  fail(ErrorCode::BadScenario, "unknown pressure law: " + kind);
}

json pipe_to_json(const PipeModel& p) {
  return json{{"law", law_to_json(p.law)},
              {"width", p.width},
              {"friction", p.friction},
              {"gravity", p.gravity},
              {"incline",
               {{"breakpoints", p.incline.breakpoints},
                {"values", p.incline.values}}},
              {"active_length", p.active_length},
              {"orientation", p.orientation == Orientation::TowardJunction
                                  ? "toward_junction"
                                  : "away_from_junction"},
              {"rho_min", p.rho_min}};
}

PipeModel pipe_from_json(const json& j) {
  PipeModel p;
  p.law = law_from_json(j.at("law"));
  p.width = j.value("width", 1.0);
  p.friction = j.value("friction", 0.0);
  p.gravity = j.value("gravity", 9.81);
  if (j.contains("incline")) {
    p.incline.breakpoints =
        j["incline"].value("breakpoints", std::vector<double>{});
    p.incline.values = j["incline"].value("values", std::vector<double>{0.0});
    if (p.incline.values.size() != p.incline.breakpoints.size() + 1)
      fail(ErrorCode::BadScenario, "incline needs breakpoints+1 values");
  }
  p.active_length = j.value("active_length", 1.0);
  p.orientation = j.value("orientation", std::string("toward_junction")) ==
                          "toward_junction"
                      ? Orientation::TowardJunction
                      : Orientation::AwayFromJunction;
  p.rho_min = j.value("rho_min", 1e-8);
  return p;
}

json control_to_json(const ControlSchedule& c) {
  return json{{"horizon", c.horizon},
              {"breakpoints", c.breakpoints},
              {"values", c.values}};
}

ControlSchedule control_from_json(const json& j) {
  ControlSchedule c;
  c.horizon = j.at("horizon").get<double>();
  c.breakpoints = j.value("breakpoints", std::vector<double>{});
  c.values = j.at("values").get<std::vector<std::vector<double>>>();
  c.validate();
  return c;
}

}  // namespace

void Scenario::set_cells(int cells) {
  if (cells <= 0) fail(ErrorCode::BadScenario, "cell count must be positive");
  const double length = model.grid.length();
  model.grid.cells = cells;
  model.grid.dx = length / cells;
  if (initial_kind == InitialKind::Tabulated)
    fail(ErrorCode::BadScenario, "cannot re-grid a tabulated initial datum");
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;

  json coupling{{"variant", variant_name(s.model.coupling.variant)},
                {"widths", s.model.coupling.widths}};
  if (s.model.coupling.variant == CouplingVariant::Compressor)
    coupling["gamma"] = s.model.coupling.gamma;
  json reference = json::array();
  for (const auto& u : s.model.coupling.reference)
    reference.push_back(state_to_json(u));
  coupling["reference"] = reference;
  j["coupling"] = coupling;

  json pipes = json::array();
  for (const auto& p : s.model.pipes) pipes.push_back(pipe_to_json(p));
  j["pipes"] = pipes;

  j["grid"] = json{{"cells", s.model.grid.cells},
                   {"length", s.model.grid.length()}};

  json initial;
  switch (s.initial_kind) {
    case InitialKind::Constant: {
      initial["kind"] = "constant";
      json states = json::array();
      for (const auto& u : s.initial_states) states.push_back(state_to_json(u));
      initial["states"] = states;
      break;
    }
    case InitialKind::Riemann: {
      initial["kind"] = "riemann";
      initial["pipe"] = s.riemann_pipe;
      initial["left"] = state_to_json(s.riemann_left);
      initial["right"] = state_to_json(s.riemann_right);
      initial["split"] = s.riemann_split;
      json states = json::array();
      for (const auto& u : s.initial_states) states.push_back(state_to_json(u));
      initial["states"] = states;
      break;
    }
    case InitialKind::Tabulated: {
      initial["kind"] = "tabulated";
      json pipes_data = json::array();
      for (const auto& pipe : s.tabulated) {
        json cells = json::array();
        for (const auto& u : pipe) cells.push_back(state_to_json(u));
        pipes_data.push_back(cells);
      }
      initial["cells"] = pipes_data;
      break;
    }
  }
  j["initial"] = initial;

  j["solver"] = json{
      {"cfl", s.solver.cfl},
      {"splitting", s.solver.splitting == Splitting::Lie ? "lie" : "strang"},
      {"flux", s.solver.flux == FluxScheme::Hll ? "hll" : "exact"},
      {"t_end", s.solver.t_end},
      {"snapshot_dt", s.solver.snapshot_dt},
      {"junction_tol", s.solver.junction_tol},
      {"tv_budget", s.solver.tv_budget},
      {"parallel", s.solver.mode == RunMode::Parallel}};

  j["control"] = control_to_json(s.control);

  if (s.has_cost) {
    json cost{{"variant", cost_name(s.cost.variant)}, {"pipe", s.cost.pipe}};
    switch (s.cost.variant) {
      case CostVariant::CompressorTarget:
        cost["p_bar"] = s.cost.p_bar;
        cost["x_a"] = s.cost.x_a;
        cost["x_b"] = s.cost.x_b;
        break;
      case CostVariant::GateSmoothing:
        cost["phi"] = json{{"breakpoints", s.cost.phi.breakpoints},
                           {"values", s.cost.phi.values}};
        break;
      case CostVariant::ValveOverflow:
      case CostVariant::PumpCost:
        cost["c"] = s.cost.c;
        cost["h_bar"] = s.cost.h_bar;
        cost["length"] = s.cost.length;
        break;
    }
    j["cost"] = cost;
  }

  if (s.has_optimization) {
    j["optimization"] =
        json{{"intervals", s.opt.intervals},
             {"free_components", s.opt.free_components},
             {"fixed_value", s.opt.fixed_value},
             {"initial", s.opt.initial_values},
             {"lower", s.opt.lower},
             {"upper", s.opt.upper},
             {"tv_budget", s.opt.tv_budget},
             {"initial_step", s.opt.initial_step},
             {"step_tol", s.opt.step_tol},
             {"budget", s.opt_budget}};
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.name = j.value("name", "scenario");

  const json& jc = j.at("coupling");
  s.model.coupling.variant = variant_from_name(jc.at("variant").get<std::string>());
  s.model.coupling.widths = jc.at("widths").get<std::vector<double>>();
  s.model.coupling.gamma = jc.value("gamma", 1.4);
  for (const auto& ju : jc.at("reference"))
    s.model.coupling.reference.push_back(state_from_json(ju));

  for (const auto& jp : j.at("pipes"))
    s.model.pipes.push_back(pipe_from_json(jp));

  const json& jg = j.at("grid");
  s.model.grid.cells = jg.at("cells").get<int>();
  s.model.grid.dx = jg.at("length").get<double>() / s.model.grid.cells;

  const json& ji = j.at("initial");
  const std::string kind = ji.at("kind").get<std::string>();
  if (ji.contains("states"))
    for (const auto& ju : ji["states"])
      s.initial_states.push_back(state_from_json(ju));
  else
    s.initial_states = s.model.coupling.reference;
  if (kind == "constant") {
    s.initial_kind = InitialKind::Constant;
  } else if (kind == "riemann") {
    s.initial_kind = InitialKind::Riemann;
    s.riemann_pipe = ji.at("pipe").get<int>();
    s.riemann_left = state_from_json(ji.at("left"));
    s.riemann_right = state_from_json(ji.at("right"));
    s.riemann_split = ji.at("split").get<double>();
  } else if (kind == "tabulated") {
    s.initial_kind = InitialKind::Tabulated;
    for (const auto& jp : ji.at("cells")) {
      std::vector<FluidState> pipe;
      for (const auto& ju : jp) pipe.push_back(state_from_json(ju));
      s.tabulated.push_back(std::move(pipe));
    }
  } else {
    fail(ErrorCode::BadScenario, "unknown initial kind: " + kind);
  }

  if (j.contains("solver")) {
    const json& js = j["solver"];
    s.solver.cfl = js.value("cfl", 0.45);
    s.solver.splitting = js.value("splitting", std::string("strang")) == "lie"
                             ? Splitting::Lie
                             : Splitting::Strang;
    s.solver.flux = js.value("flux", std::string("exact")) == "hll"
                        ? FluxScheme::Hll
                        : FluxScheme::ExactGodunov;
    s.solver.t_end = js.value("t_end", 1.0);
    s.solver.snapshot_dt = js.value("snapshot_dt", 0.0);
    s.solver.junction_tol = js.value("junction_tol", 1e-10);
    s.solver.tv_budget = js.value("tv_budget",
                                  std::numeric_limits<double>::infinity());
    s.solver.mode =
        js.value("parallel", false) ? RunMode::Parallel : RunMode::Serial;
  }

  s.control = control_from_json(j.at("control"));

  if (j.contains("cost")) {
    s.has_cost = true;
    const json& jcost = j["cost"];
    s.cost.variant = cost_from_name(jcost.at("variant").get<std::string>());
    s.cost.pipe = jcost.value("pipe", -1);
    s.cost.p_bar = jcost.value("p_bar", 1.0);
    s.cost.x_a = jcost.value("x_a", 0.0);
    s.cost.x_b = jcost.value("x_b", 1.0);
    if (jcost.contains("phi")) {
      s.cost.phi.breakpoints =
          jcost["phi"].value("breakpoints", std::vector<double>{});
      s.cost.phi.values = jcost["phi"].value("values", std::vector<double>{1.0});
    }
    s.cost.c = jcost.value("c", std::vector<double>{});
    s.cost.h_bar = jcost.value("h_bar", 1.0);
    s.cost.length = jcost.value("length", 1.0);
  }

  if (j.contains("optimization")) {
    s.has_optimization = true;
    const json& jo = j["optimization"];
    s.opt.intervals = jo.at("intervals").get<int>();
    s.opt.components = s.model.coupling.n_pipes();
    s.opt.free_components =
        jo.value("free_components", std::vector<std::size_t>{1});
    s.opt.fixed_value = jo.value("fixed_value",
                                 std::vector<double>(s.opt.components, 0.0));
    s.opt.initial_values =
        jo.at("initial").get<std::vector<std::vector<double>>>();
    s.opt.lower = jo.value("lower", 0.0);
    s.opt.upper = jo.value("upper", 10.0);
    s.opt.tv_budget = jo.value("tv_budget",
                               std::numeric_limits<double>::infinity());
    s.opt.initial_step = jo.value("initial_step", 0.1);
    s.opt.step_tol = jo.value("step_tol", 1e-6);
    s.opt.horizon = s.control.horizon;
    s.opt_budget = jo.value("budget", 200);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::BadScenario, "cannot open " + path);
  json j;
  in >> j;
  return scenario_from_json(j);
}

void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::BadScenario, "cannot write " + path);
  out << scenario_to_json(s).dump(2) << '\n';
}

NetworkState build_initial_state(const Scenario& s) {
  NetworkState state;
  state.time = 0.0;
  state.control = s.control;
  const int N = s.model.grid.cells;
  const std::size_t n = s.model.n_pipes();

  switch (s.initial_kind) {
    case InitialKind::Constant:
    case InitialKind::Riemann: {
      if (s.initial_states.size() != n)
        fail(ErrorCode::BadScenario, "initial states must cover all pipes");
      for (std::size_t l = 0; l < n; ++l)
        state.cells.emplace_back(N, s.initial_states[l]);
      if (s.initial_kind == InitialKind::Riemann) {
        if (s.riemann_pipe < 0 || s.riemann_pipe >= static_cast<int>(n))
          fail(ErrorCode::BadScenario, "riemann pipe index out of range");
        auto& cells = state.cells[s.riemann_pipe];
        for (int i = 0; i < N; ++i)
          cells[i] = s.model.grid.center(i) < s.riemann_split ? s.riemann_left
                                                              : s.riemann_right;
      }
      break;
    }
    case InitialKind::Tabulated: {
      if (s.tabulated.size() != n)
        fail(ErrorCode::BadScenario, "tabulated data must cover all pipes");
      for (const auto& pipe : s.tabulated)
        if (pipe.size() != static_cast<std::size_t>(N))
          fail(ErrorCode::BadScenario, "tabulated data must match the grid");
      state.cells = s.tabulated;
      break;
    }
  }
  return state;
}

void validate_scenario(const Scenario& s) {
  s.model.validate();
  s.control.validate();
  if (s.control.components() != s.model.coupling.n_pipes())
    fail(ErrorCode::BadScenario, "control dimension must match the coupling");
  if (s.has_cost) {
    if (s.cost.variant == CostVariant::CompressorTarget &&
        !(s.cost.x_a > 0.0 && s.cost.x_a < s.cost.x_b))
      fail(ErrorCode::BadScenario, "cost window needs 0 < x_a < x_b");
    for (double c : s.cost.c)
      if (c < 0.0) fail(ErrorCode::BadScenario, "operation costs must be nonnegative");
    for (double v : s.cost.phi.values)
      if (v < 0.0) fail(ErrorCode::BadScenario, "cost weight phi must be nonnegative");
  }
  if (s.model.coupling.variant == CouplingVariant::Compressor)
    for (const auto& v : s.control.values)
      if (v[1] < 0.0)
        fail(ErrorCode::InvalidControl, "compressor power must be nonnegative");
  const NetworkState state = build_initial_state(s);
  for (std::size_t l = 0; l < s.model.n_pipes(); ++l)
    for (const auto& u : state.cells[l])
      if (!is_subsonic(s.model.pipes[l], u))
        fail(ErrorCode::BadScenario, "initial datum must be subsonic");
}

}  // namespace pipenet
