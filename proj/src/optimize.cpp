#include "pipenet/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pipenet {

ControlSchedule make_schedule(const ControlParam& param,
                              const std::vector<std::vector<double>>& free_values) {
  ControlSchedule s;
  s.horizon = param.horizon;
  for (int k = 1; k < param.intervals; ++k)
    s.breakpoints.push_back(param.horizon * k / param.intervals);
  for (int k = 0; k < param.intervals; ++k) {
    std::vector<double> v = param.fixed_value;
    v.resize(param.components, 0.0);
    for (std::size_t c = 0; c < param.free_components.size(); ++c)
      v[param.free_components[c]] = free_values[k][c];
    s.values.push_back(std::move(v));
  }
  return s;
}

std::vector<std::vector<double>> project_feasible(
    const ControlParam& param, std::vector<std::vector<double>> free_values) {
  for (auto& interval : free_values)
    for (double& v : interval) v = std::clamp(v, param.lower, param.upper);

  const std::size_t m = free_values.size();
  const std::size_t f = free_values.empty() ? 0 : free_values.front().size();
  double tv = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k)
    for (std::size_t c = 0; c < f; ++c)
      tv += std::abs(free_values[k + 1][c] - free_values[k][c]);
  if (tv <= param.tv_budget || tv == 0.0) return free_values;

  // Shrink toward the componentwise mean; TV scales linearly with s.
  const double s = param.tv_budget / tv;
  std::vector<double> mean(f, 0.0);
  for (const auto& interval : free_values)
    for (std::size_t c = 0; c < f; ++c) mean[c] += interval[c] / m;
  for (auto& interval : free_values)
    for (std::size_t c = 0; c < f; ++c)
      interval[c] = mean[c] + s * (interval[c] - mean[c]);
  return free_values;
}

OptResult minimize(const Objective& objective, const ControlParam& param,
                   int budget) {
  if (param.initial_values.size() != static_cast<std::size_t>(param.intervals))
    fail(ErrorCode::BadScenario, "initial control values must cover all intervals");

  auto theta = project_feasible(param, param.initial_values);
  OptResult result;
  result.best_control = make_schedule(param, theta);

  if (budget <= 0) {
    result.reason = Termination::EmptyBudget;
    return result;
  }

  int evals = 0;
  const auto evaluate = [&](const std::vector<std::vector<double>>& values,
                            EvalOutcome* out) {
    *out = objective(make_schedule(param, values));
    ++evals;
  };

  EvalOutcome incumbent;
  evaluate(theta, &incumbent);
  if (!incumbent.feasible)
    fail(ErrorCode::NoFeasibleStart, "initial control evaluation failed: " +
                                         incumbent.error);
  result.log.push_back({1, incumbent.cost.total, incumbent.cost.J_o,
                        incumbent.cost.J_1_integral, incumbent.cost.total, true,
                        true});

  double step = param.initial_step;
  result.reason = Termination::StepTolerance;
  while (step > param.step_tol) {
    if (evals >= budget) {
      result.reason = Termination::BudgetExhausted;
      break;
    }
    bool improved = false;
    for (int k = 0; k < param.intervals && !improved; ++k) {
      for (std::size_t c = 0; c < param.free_components.size() && !improved; ++c) {
        for (double sign : {+1.0, -1.0}) {
          if (evals >= budget) break;
          auto trial = theta;
          trial[k][c] += sign * step;
          trial = project_feasible(param, trial);
          EvalOutcome out;
          evaluate(trial, &out);
          const bool accept =
              out.feasible && out.cost.total < incumbent.cost.total;
          result.log.push_back({evals, out.cost.total, out.cost.J_o,
                                out.cost.J_1_integral,
                                accept ? out.cost.total : incumbent.cost.total,
                                accept, out.feasible});
          if (accept) {
            theta = trial;
            incumbent = out;
            improved = true;
            break;
          }
        }
      }
    }
    if (evals >= budget && !improved) {
      result.reason = Termination::BudgetExhausted;
      break;
    }
    if (!improved) step *= 0.5;
  }

  result.best_control = make_schedule(param, theta);
  result.best_cost = incumbent.cost;
  return result;
}

EvalOutcome evaluate_control(const NetworkModel& model,
                             const NetworkState& initial,
                             const ControlSchedule& control,
                             const SolverConfig& config, const CostSpec& spec) {
  EvalOutcome out;
  try {
    NetworkState state = initial;
    state.control = control;
    const Trajectory traj = evolve(model, state, config);
    out.cost = cost_J(model, traj, control, spec);
  } catch (const SolverError& e) {
    out.feasible = false;
    out.error = e.what();
    out.cost.J_o = out.cost.J_1_integral = out.cost.total =
        std::numeric_limits<double>::infinity();
  }
  return out;
}

Objective make_objective(const NetworkModel& model, const NetworkState& initial,
                         const SolverConfig& config, const CostSpec& spec) {
  return [=, &model](const ControlSchedule& control) {
    return evaluate_control(model, initial, control, config, spec);
  };
}

namespace {

double bump(double s) {
  const double w = 1.0 - s * s;
  return w > 0.0 ? w * w : 0.0;
}

// Adds a smooth density bump of L1 size `scale` centered at xc.
void perturb_initial(const NetworkModel& model, NetworkState& state,
                     std::size_t pipe, double xc, double scale) {
  const double w = 0.1 * model.grid.length();
  double mass = 0.0;
  for (int i = 0; i < model.grid.cells; ++i)
    mass += bump((model.grid.center(i) - xc) / w) * model.grid.dx;
  if (mass <= 0.0) return;
  const double eps = scale / mass;
  for (int i = 0; i < model.grid.cells; ++i)
    state.cells[pipe][i].density +=
        eps * bump((model.grid.center(i) - xc) / w);
}

}  // namespace

std::vector<LipschitzSample> lipschitz_harness(const NetworkModel& model,
                                               const NetworkState& base,
                                               const SolverConfig& config,
                                               int n_pairs, double scale,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Trajectory base_traj = evolve(model, base, config);
  const auto& base_final = base_traj.final_snapshot().cells;

  std::vector<LipschitzSample> samples;
  samples.reserve(n_pairs);
  for (int p = 0; p < n_pairs; ++p) {
    NetworkState perturbed = base;
    LipschitzSample sample;

    const int mode = p % 3;  // 0: u only, 1: Pi only, 2: both
    if (mode != 1) {
      const std::size_t pipe = rng() % model.n_pipes();
      const double xc =
          model.grid.length() * (0.2 + 0.6 * unit(rng));
      NetworkState before = perturbed;
      perturb_initial(model, perturbed, pipe, xc, scale);
      sample.u_gap = l1_distance(model.grid, before.cells, perturbed.cells);
    }
    if (mode != 0) {
      // Bump one free component on one control interval.
      auto& values = perturbed.control.values;
      const std::size_t k = rng() % values.size();
      const std::size_t comp = values[k].size() > 1 ? 1 + rng() % (values[k].size() - 1) : 0;
      double t0 = k == 0 ? 0.0 : perturbed.control.breakpoints[k - 1];
      double t1 = k < perturbed.control.breakpoints.size()
                      ? perturbed.control.breakpoints[k]
                      : perturbed.control.horizon;
      t1 = std::min(t1, config.t_end);
      const double len = std::max(t1 - t0, 1e-12);
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      values[k][comp] += sign * scale / len;
      sample.pi_gap = base.control.l1_distance(perturbed.control, config.t_end);
    }

    const Trajectory traj = evolve(model, perturbed, config);
    sample.final_gap =
        l1_distance(model.grid, base_final, traj.final_snapshot().cells);
    const double den = sample.u_gap + sample.pi_gap;
    sample.ratio = den > 0.0 ? sample.final_gap / den : 0.0;
    samples.push_back(sample);
  }
  return samples;
}

LipschitzSample causality_probe(const NetworkModel& model,
                                const NetworkState& base,
                                const SolverConfig& config, double bump_size) {
  NetworkState perturbed = base;
  // Append a control interval that starts strictly after t_end.
  auto& ctl = perturbed.control;
  const double t_after = config.t_end * 1.25;
  if (ctl.horizon <= t_after) ctl.horizon = 2.0 * t_after;
  ctl.breakpoints.push_back(t_after);
  auto tail = ctl.values.back();
  if (tail.size() > 1) tail[1] += bump_size;
  ctl.values.push_back(tail);
  ctl.validate();

  const Trajectory a = evolve(model, base, config);
  const Trajectory b = evolve(model, perturbed, config);
  LipschitzSample sample;
  sample.pi_gap = base.control.l1_distance(perturbed.control, config.t_end);
  sample.final_gap = l1_distance(model.grid, a.final_snapshot().cells,
                                 b.final_snapshot().cells);
  sample.ratio = sample.final_gap == 0.0 ? 0.0
                                         : std::numeric_limits<double>::infinity();
  return sample;
}

}  // namespace pipenet
