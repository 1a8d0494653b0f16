#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pipenet/optimize.hpp"

using namespace pipenet;
using namespace pipenet::testing;

namespace {

ControlParam toy_param() {
  ControlParam p;
  p.intervals = 2;
  p.components = 2;
  p.free_components = {1};
  p.fixed_value = {0.0, 0.0};
  p.initial_values = {{0.8}, {0.8}};
  p.lower = 0.0;
  p.upper = 2.0;
  p.horizon = 1.0;
  p.initial_step = 0.25;
  p.step_tol = 1e-7;
  return p;
}

Objective quadratic_objective(std::vector<double> target) {
  return [target](const ControlSchedule& ctl) {
    EvalOutcome out;
    double J = 0.0;
    for (std::size_t k = 0; k < ctl.values.size(); ++k) {
      const double d = ctl.values[k][1] - target[k];
      J += d * d;
    }
    out.cost = {0.0, J, J};
    return out;
  };
}

}  // namespace

TEST_CASE("projection") {
  ControlParam p = toy_param();
  p.tv_budget = 0.1;

  SUBCASE("idempotent on feasible controls") {
    const std::vector<std::vector<double>> values{{0.5}, {0.55}};
    const auto projected = project_feasible(p, values);
    CHECK(projected == values);
  }

  SUBCASE("shrinks an infeasible control exactly onto the budget") {
    const std::vector<std::vector<double>> values{{0.2}, {0.9}};
    const auto projected = project_feasible(p, values);
    const double tv = std::abs(projected[1][0] - projected[0][0]);
    CHECK(tv == doctest::Approx(0.1).epsilon(1e-12));
    // mean preserved
    CHECK(projected[0][0] + projected[1][0] ==
          doctest::Approx(1.1).epsilon(1e-12));
    // projecting again changes nothing
    CHECK(project_feasible(p, projected) == projected);
  }

  SUBCASE("box clip happens before the shrink") {
    const std::vector<std::vector<double>> values{{-1.0}, {3.0}};
    const auto projected = project_feasible(p, values);
    for (const auto& v : projected) {
      CHECK(v[0] >= p.lower);
      CHECK(v[0] <= p.upper);
    }
  }
}

TEST_CASE("minimize on a quadratic surrogate") {
  const ControlParam p = toy_param();
  const auto objective = quadratic_objective({0.3, 0.5});

  SUBCASE("budget 0 returns the initial control untouched") {
    const auto result = minimize(objective, p, 0);
    CHECK(result.log.empty());
    CHECK(result.best_control.values[0][1] == doctest::Approx(0.8));
    CHECK(result.reason == Termination::EmptyBudget);
  }

  SUBCASE("finds the analytic minimizer within the step tolerance") {
    const auto result = minimize(objective, p, 4000);
    CHECK(result.best_control.values[0][1] ==
          doctest::Approx(0.3).epsilon(1e-4));
    CHECK(result.best_control.values[1][1] ==
          doctest::Approx(0.5).epsilon(1e-4));
    CHECK(result.best_cost.total < 1e-8);
  }

  SUBCASE("best-so-far log is non-increasing") {
    const auto result = minimize(objective, p, 300);
    for (std::size_t k = 1; k < result.log.size(); ++k)
      CHECK(result.log[k].best_so_far <= result.log[k - 1].best_so_far);
  }

  SUBCASE("deterministic: identical runs produce identical logs") {
    const auto a = minimize(objective, p, 300);
    const auto b = minimize(objective, p, 300);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t k = 0; k < a.log.size(); ++k) {
      CHECK(a.log[k].J == b.log[k].J);
      CHECK(a.log[k].accepted == b.log[k].accepted);
    }
    CHECK(a.best_cost.total == b.best_cost.total);
  }

  SUBCASE("infeasible evaluations are rejected moves") {
    const auto guarded = [](const ControlSchedule& ctl) {
      EvalOutcome out;
      double J = 0.0;
      for (const auto& v : ctl.values) {
        if (v[1] > 1.0) {
          out.feasible = false;
          out.error = "boom";
          out.cost = {0, 0, std::numeric_limits<double>::infinity()};
          return out;
        }
        J += (v[1] - 0.9) * (v[1] - 0.9);
      }
      out.cost = {0.0, J, J};
      return out;
    };
    const auto result = minimize(guarded, toy_param(), 2000);
    CHECK(result.best_control.values[0][1] == doctest::Approx(0.9).epsilon(1e-3));
    bool saw_infeasible = false;
    for (const auto& rec : result.log) saw_infeasible |= !rec.feasible;
    CHECK(saw_infeasible);
  }

  SUBCASE("NoFeasibleStart when the initial control cannot be evaluated") {
    const auto broken = [](const ControlSchedule&) {
      EvalOutcome out;
      out.feasible = false;
      out.error = "always";
      return out;
    };
    CHECK_THROWS_AS(minimize(broken, toy_param(), 10), SolverError);
  }
}

TEST_CASE("evaluate_control") {
  const auto model = compressor_network(60);
  const auto state = constant_state(model);

  SolverConfig config;
  config.t_end = 0.4;
  config.snapshot_dt = 0.1;

  CostSpec spec;
  spec.variant = CostVariant::CompressorTarget;
  spec.pipe = 1;
  spec.p_bar =
      pressure(model.pipes[1].law, model.coupling.reference[1].density);
  spec.x_a = 2.0;
  spec.x_b = 4.0;

  SUBCASE("stationary control costs exactly its sup norm") {
    const auto out = evaluate_control(model, state, state.control, config, spec);
    CHECK(out.feasible);
    CHECK(out.cost.total ==
          doctest::Approx(state.control.values[0][1]).epsilon(1e-10));
  }

  SUBCASE("bit-identical across repeated calls") {
    auto ctl = state.control;
    ctl.breakpoints = {0.2};
    auto v = ctl.values[0];
    v[1] *= 1.2;
    ctl.values = {ctl.values[0], v};
    const auto a = evaluate_control(model, state, ctl, config, spec);
    const auto b = evaluate_control(model, state, ctl, config, spec);
    CHECK(a.cost.total == b.cost.total);
    CHECK(a.cost.J_1_integral == b.cost.J_1_integral);
  }

  SUBCASE("solver failures map to infeasible outcomes, not crashes") {
    auto ctl = state.control;
    ctl.values[0][1] = -1.0;  // negative compressor power
    const auto out = evaluate_control(model, state, ctl, config, spec);
    CHECK_FALSE(out.feasible);
    CHECK(std::isinf(out.cost.total));
  }

  SUBCASE("J is L1-continuous in the control on a probe ensemble") {
    const auto base = evaluate_control(model, state, state.control, config, spec);
    double C = 0.0;
    for (double eps : {1e-3, 2e-3, 4e-3}) {
      auto ctl = state.control;
      auto v = ctl.values[0];
      v[1] += eps;
      ctl.values = {v};
      const auto out = evaluate_control(model, state, ctl, config, spec);
      const double dPi = state.control.l1_distance(ctl, config.t_end);
      C = std::max(C, std::abs(out.cost.total - base.cost.total) / dPi);
    }
    MESSAGE("fitted cost continuity constant ", C);
    CHECK(std::isfinite(C));
  }
}

TEST_CASE("lipschitz harness") {
  const auto model = pump_network(80);
  const auto base = constant_state(model);

  SolverConfig config;
  config.t_end = 0.4;

  SUBCASE("ratios are finite across an ensemble") {
    const auto samples = lipschitz_harness(model, base, config, 12, 1e-3, 7);
    CHECK(samples.size() == 12);
    for (const auto& s : samples) {
      CHECK(std::isfinite(s.ratio));
      CHECK(s.u_gap + s.pi_gap > 0.0);
    }
  }

  SUBCASE("control changes after T have no effect") {
    const auto s = causality_probe(model, base, config, 0.4);
    CHECK(s.final_gap == 0.0);
    CHECK(s.ratio == 0.0);
  }
}
