#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pipenet/functionals.hpp"
#include "pipenet/netsolver.hpp"

namespace pipenet {

// Parametrization of the feasible control set: piecewise-constant Pi on
// [0, horizon] with `intervals` equal pieces, the listed components free and
// the rest pinned to `fixed_value` (the mass-balance row stays 0). Feasibility
// is a box per free component plus a TV budget.
struct ControlParam {
  int intervals = 1;
  std::size_t components = 2;
  std::vector<std::size_t> free_components{1};
  std::vector<double> fixed_value{0.0, 0.0};
  std::vector<std::vector<double>> initial_values;  // intervals x free
  double lower = 0.0;
  double upper = 10.0;
  double tv_budget = std::numeric_limits<double>::infinity();
  double horizon = 1.0;
  double initial_step = 0.1;
  double step_tol = 1e-6;
};

// Schedule built from the free values; breakpoints at k horizon / m.
ControlSchedule make_schedule(const ControlParam& param,
                              const std::vector<std::vector<double>>& free_values);

// Box clip followed by a TV shrink toward the componentwise mean; leaves
// already-feasible controls untouched.
std::vector<std::vector<double>> project_feasible(
    const ControlParam& param, std::vector<std::vector<double>> free_values);

struct EvalOutcome {
  CostBreakdown cost;
  bool feasible = true;
  std::string error;
};

using Objective = std::function<EvalOutcome(const ControlSchedule&)>;

struct EvalRecord {
  int index = 0;
  double J = 0.0;
  double J_o = 0.0;
  double J_1 = 0.0;
  double best_so_far = 0.0;
  bool accepted = false;
  bool feasible = true;
};

enum class Termination { BudgetExhausted, StepTolerance, EmptyBudget };

struct OptResult {
  ControlSchedule best_control;
  CostBreakdown best_cost;
  std::vector<EvalRecord> log;
  Termination reason = Termination::BudgetExhausted;
};

// Deterministic compass search over the free interval values with shrinking
// step and TV-budget projection after every move. Infeasible evaluations
// (solver failures) are rejected moves. Throws NoFeasibleStart when the
// initial control itself cannot be evaluated.
OptResult minimize(const Objective& objective, const ControlParam& param,
                   int budget);

// Solver-backed objective: evolve + cost_J; solver errors become infeasible
// outcomes instead of escaping. The model is captured by reference and must
// outlive the objective; the other arguments are copied.
Objective make_objective(const NetworkModel& model, const NetworkState& initial,
                         const SolverConfig& config, const CostSpec& spec);

EvalOutcome evaluate_control(const NetworkModel& model,
                             const NetworkState& initial,
                             const ControlSchedule& control,
                             const SolverConfig& config, const CostSpec& spec);

struct LipschitzSample {
  double u_gap = 0.0;      // ||u_o - u~_o||_L1
  double pi_gap = 0.0;     // int ||Pi - Pi~|| dt over [0, T]
  double final_gap = 0.0;  // ||u(T) - u~(T)||_L1
  double ratio = 0.0;
};

// Random perturbation ensemble around a base point; each sample perturbs the
// initial datum, the control, or both at the given L1 scale and reports the
// final-time amplification ratio.
std::vector<LipschitzSample> lipschitz_harness(const NetworkModel& model,
                                               const NetworkState& base,
                                               const SolverConfig& config,
                                               int n_pairs, double scale,
                                               std::uint64_t seed);

// Control perturbation strictly after t_end; the returned sample must have
// final_gap == 0 (the estimate only sees Pi restricted to [0, T]).
LipschitzSample causality_probe(const NetworkModel& model,
                                const NetworkState& base,
                                const SolverConfig& config, double bump);

}  // namespace pipenet
