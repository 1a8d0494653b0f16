#include <doctest.h>

#include <cmath>

#include "helpers.hpp"

using namespace pipenet;
using namespace pipenet::testing;

namespace {

CouplingCondition compressor_cond() {
  CouplingCondition c;
  c.variant = CouplingVariant::Compressor;
  c.gamma = 1.4;
  c.widths = {1.0, 1.0};
  c.reference = {{1.0, -0.4}, {1.2, 0.4}};
  return c;
}

CouplingCondition gate_cond() {
  CouplingCondition c;
  c.variant = CouplingVariant::UnderflowGate;
  c.widths = {1.0, 1.0};
  c.reference = {{2.0, -0.5}, {1.0, 0.5}};
  return c;
}

CouplingCondition valve_cond(std::vector<double> widths) {
  CouplingCondition c;
  c.variant = CouplingVariant::MultiValve;
  c.widths = std::move(widths);
  c.reference = {{1.5, -0.3}, {1.5, -0.5}, {1.2, 0.4}};
  // enforce the mass balance row at the reference
  double inflow = 0.0;
  for (std::size_t l = 0; l + 1 < c.widths.size(); ++l)
    inflow += c.widths[l] * c.reference[l].momentum;
  c.reference.back().momentum = -inflow / c.widths.back();
  return c;
}

CouplingCondition pump_cond() {
  CouplingCondition c;
  c.variant = CouplingVariant::PumpingStation;
  c.widths = {1.0, 1.0};
  c.reference = {{1.5, -0.3}, {1.0, 0.3}};
  return c;
}

std::vector<PipeModel> gas_pipes(std::size_t n) {
  return std::vector<PipeModel>(n, gas_pipe(1.4));
}

std::vector<PipeModel> canal_pipes(std::size_t n, double g = 9.81) {
  return std::vector<PipeModel>(n, sw_pipe(g));
}

}  // namespace

TEST_CASE("psi variants") {
  SUBCASE("compressor with equal pressures and balanced flow is null") {
    const auto cond = compressor_cond();
    const auto pipes = gas_pipes(2);
    const std::vector<FluidState> u{{1.1, -0.3}, {1.1, 0.3}};
    const auto v = psi(cond, pipes, u);
    CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(v[1] == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("gate") {
    const auto cond = gate_cond();
    const auto pipes = canal_pipes(2);
    const std::vector<FluidState> u{{2.0, -1.0}, {1.0, 1.0}};
    const auto v = psi(cond, pipes, u);
    CHECK(v[0] == doctest::Approx(0.0));
    CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(psi(cond, pipes, {{1.0, -1.0}, {1.0, 1.0}}), SolverError);
  }

  SUBCASE("valves") {
    auto cond = valve_cond({1.0, 1.0, 1.0});
    const auto pipes = canal_pipes(3);
    const std::vector<FluidState> u{{1.0, 1.0}, {1.0, 2.0}, {1.0, -3.0}};
    const auto v = psi(cond, pipes, u);
    CHECK(v[0] == doctest::Approx(0.0));
    CHECK(v[1] == doctest::Approx(1.0));
    CHECK(v[2] == doctest::Approx(2.0));
  }

  SUBCASE("pump") {
    const auto cond = pump_cond();
    const auto pipes = canal_pipes(2);
    const auto v = psi(cond, pipes, cond.reference);
    CHECK(v[0] == doctest::Approx(0.0));
    CHECK(v[1] == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("transversality determinants") {
  SUBCASE("valves: closed form prod b_i lambda2 when the inflow widths are 1") {
    for (double b3 : {1.0, 2.0}) {
      const auto cond = valve_cond({1.0, 1.0, b3});
      const auto pipes = canal_pipes(3);
      const double det = transversality_det(cond, pipes, cond.reference);
      double prod = 1.0;
      for (std::size_t l = 0; l < 3; ++l)
        prod *= cond.widths[l] * eigenvalues(pipes[l], cond.reference[l])[1];
      CHECK(det == doctest::Approx(prod).epsilon(1e-10));
    }
  }

  SUBCASE("valves: general widths follow b_n prod lambda2 up to sign") {
    const auto cond = valve_cond({1.5, 0.7, 2.0});
    const auto pipes = canal_pipes(3);
    const double det = transversality_det(cond, pipes, cond.reference);
    double lam_prod = 1.0;
    for (std::size_t l = 0; l < 3; ++l)
      lam_prod *= eigenvalues(pipes[l], cond.reference[l])[1];
    CHECK(det == doctest::Approx(2.0 * lam_prod).epsilon(1e-10));
  }

  SUBCASE("compressor: proposition expression, positive at the reference") {
    const auto cond = compressor_cond();
    const auto pipes = gas_pipes(2);
    const auto& u = cond.reference;
    const double det = transversality_det(cond, pipes, u);

    // independent reconstruction with finite-difference partials of Psi_2
    const double h = 1e-7;
    const auto psi2 = [&](double r1, double q1, double r2, double q2) {
      return psi(cond, pipes, {{r1, q1}, {r2, q2}})[1];
    };
    const double d_r1 = (psi2(u[0].density + h, u[0].momentum, u[1].density,
                              u[1].momentum) -
                         psi2(u[0].density - h, u[0].momentum, u[1].density,
                              u[1].momentum)) /
                        (2 * h);
    const double d_r2 = (psi2(u[0].density, u[0].momentum, u[1].density + h,
                              u[1].momentum) -
                         psi2(u[0].density, u[0].momentum, u[1].density - h,
                              u[1].momentum)) /
                        (2 * h);
    const double d_q2 = (psi2(u[0].density, u[0].momentum, u[1].density,
                              u[1].momentum + h) -
                         psi2(u[0].density, u[0].momentum, u[1].density,
                              u[1].momentum - h)) /
                        (2 * h);
    const double lam1 = eigenvalues(pipes[0], u[0])[1];
    const double lam2 = eigenvalues(pipes[1], u[1])[1];
    const double expression = lam1 * (lam2 * d_q2 + d_r2) - lam2 * d_r1;
    CHECK(det == doctest::Approx(expression).epsilon(1e-6));
    CHECK(det > 0.0);
  }

  SUBCASE("gate: positive for H1 > H2 and Q1 < 0") {
    const auto cond = gate_cond();
    const auto pipes = canal_pipes(2);
    CHECK(transversality_det(cond, pipes, cond.reference) > 0.0);
  }

  SUBCASE("pump: -(b1 lambda2 + b2 lambda2)") {
    const auto cond = pump_cond();
    const auto pipes = canal_pipes(2);
    const double det = transversality_det(cond, pipes, cond.reference);
    const double lam1 = eigenvalues(pipes[0], cond.reference[0])[1];
    const double lam2 = eigenvalues(pipes[1], cond.reference[1])[1];
    CHECK(det == doctest::Approx(-(lam1 + lam2)).epsilon(1e-12));
  }

  SUBCASE("analytic vs finite differences across all variants") {
    const auto check_pair = [](const CouplingCondition& cond,
                               const std::vector<PipeModel>& pipes) {
      const double a = transversality_det(cond, pipes, cond.reference);
      const double fd = transversality_det_fd(cond, pipes, cond.reference);
      CHECK(std::abs(a - fd) / std::abs(a) < 1e-6);
    };
    check_pair(compressor_cond(), gas_pipes(2));
    check_pair(gate_cond(), canal_pipes(2));
    check_pair(valve_cond({1.0, 1.0, 2.0}), canal_pipes(3));
    check_pair(pump_cond(), canal_pipes(2));
  }
}

TEST_CASE("solve_junction_riemann") {
  SUBCASE("exact data gap zero returns the datum") {
    const auto cond = pump_cond();
    const auto pipes = canal_pipes(2);
    const auto Pi = psi(cond, pipes, cond.reference);
    const auto sol = solve_junction_riemann(cond, pipes, cond.reference, Pi);
    CHECK(sol.residual == 0.0);
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(sol.sigmas[l] == 0.0);
      CHECK(sol.traces[l].density == cond.reference[l].density);
    }
  }

  SUBCASE("all four variants converge on perturbed controls") {
    const auto run = [](const CouplingCondition& cond,
                        const std::vector<PipeModel>& pipes) {
      auto Pi = psi(cond, pipes, cond.reference);
      for (std::size_t k = 1; k < Pi.size(); ++k)
        Pi[k] += 0.02 * (1.0 + std::abs(Pi[k]));
      const auto sol = solve_junction_riemann(cond, pipes, cond.reference, Pi);
      CHECK(sol.residual <= 1e-10);
      const auto check_val = psi(cond, pipes, sol.traces);
      for (std::size_t k = 0; k < Pi.size(); ++k)
        CHECK(std::abs(check_val[k] - Pi[k]) <= 1e-10);
      // traces sit on the reverse 2-curves of the data
      for (std::size_t l = 0; l < pipes.size(); ++l) {
        const auto expect = lax_curve(pipes[l], 2, cond.reference[l],
                                      sol.sigmas[l], WaveSide::Right);
        CHECK(norm1(expect - sol.traces[l]) < 1e-12);
        CHECK(is_subsonic(pipes[l], sol.traces[l]));
      }
    };
    run(compressor_cond(), gas_pipes(2));
    run(gate_cond(), canal_pipes(2));
    run(valve_cond({1.0, 1.0, 2.0}), canal_pipes(3));
    run(pump_cond(), canal_pipes(2));
  }

  SUBCASE("compressor against a dense grid search") {
    const auto cond = compressor_cond();
    const auto pipes = gas_pipes(2);
    auto Pi = psi(cond, pipes, cond.reference);
    Pi[1] *= 1.01;
    const auto sol = solve_junction_riemann(cond, pipes, cond.reference, Pi);

    double best0 = 0.0, best1 = 0.0, best_res = 1e300;
    const int steps = 200;
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j <= steps; ++j) {
        const double s0 = -0.05 + 0.1 * i / steps;
        const double s1 = -0.05 + 0.1 * j / steps;
        try {
          const auto t0 = lax_curve(pipes[0], 2, cond.reference[0], s0,
                                    WaveSide::Right);
          const auto t1 = lax_curve(pipes[1], 2, cond.reference[1], s1,
                                    WaveSide::Right);
          const auto v = psi(cond, pipes, {t0, t1});
          const double res =
              std::abs(v[0] - Pi[0]) + std::abs(v[1] - Pi[1]);
          if (res < best_res) {
            best_res = res;
            best0 = s0;
            best1 = s1;
          }
        } catch (const SolverError&) {
        }
      }
    CHECK(std::abs(sol.sigmas[0] - best0) <= 1e-3);
    CHECK(std::abs(sol.sigmas[1] - best1) <= 1e-3);
  }

  SUBCASE("local uniqueness: Newton restarts land on the same sizes") {
    const auto cond = gate_cond();
    const auto pipes = canal_pipes(2);
    auto Pi = psi(cond, pipes, cond.reference);
    Pi[1] *= 1.05;
    const auto sol = solve_junction_riemann(cond, pipes, cond.reference, Pi);
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> start(-0.02, 0.02);
    for (int k = 0; k < 50; ++k) {
      const std::vector<double> sigma0{start(rng), start(rng)};
      const auto again = solve_junction_riemann(cond, pipes, cond.reference,
                                                Pi, 1e-10, sigma0);
      CHECK(std::abs(again.sigmas[0] - sol.sigmas[0]) < 1e-8);
      CHECK(std::abs(again.sigmas[1] - sol.sigmas[1]) < 1e-8);
    }
  }

  SUBCASE("mass balance row vanishes whenever Pi_1 = 0") {
    const auto run = [](const CouplingCondition& cond,
                        const std::vector<PipeModel>& pipes) {
      auto Pi = psi(cond, pipes, cond.reference);
      REQUIRE(std::abs(Pi[0]) < 1e-13);
      Pi[0] = 0.0;
      for (std::size_t k = 1; k < Pi.size(); ++k)
        Pi[k] += 0.01 * (1.0 + std::abs(Pi[k]));
      const auto sol = solve_junction_riemann(cond, pipes, cond.reference, Pi);
      double flow = 0.0;
      for (std::size_t l = 0; l < pipes.size(); ++l)
        flow += cond.widths[l] * sol.traces[l].momentum;
      CHECK(std::abs(flow) <= 1e-10);
    };
    run(compressor_cond(), gas_pipes(2));
    run(gate_cond(), canal_pipes(2));
    run(valve_cond({1.0, 1.0, 2.0}), canal_pipes(3));
    run(pump_cond(), canal_pipes(2));
  }

  SUBCASE("near-sonic data fail loudly, never silently") {
    const auto pipes = gas_pipes(2);
    CouplingCondition cond = compressor_cond();
    const double c = sound_speed(pipes[0].law, 1.0);
    const std::vector<FluidState> data{{1.0, -0.999 * c}, {1.2, 0.999 * 1.2 *
          sound_speed(pipes[1].law, 1.2)}};
    auto Pi = psi(cond, pipes, data);
    Pi[1] *= 3.0;  // demand far more compression than the choked data allow
    CHECK_THROWS_AS(solve_junction_riemann(cond, pipes, data, Pi), SolverError);
  }

  SUBCASE("compressor rejects negative power") {
    const auto cond = compressor_cond();
    const auto pipes = gas_pipes(2);
    CHECK_THROWS_AS(
        solve_junction_riemann(cond, pipes, cond.reference, {0.0, -0.1}),
        SolverError);
  }
}

TEST_CASE("junction_lipschitz_probe") {
  const auto cond = pump_cond();
  const auto pipes = canal_pipes(2);
  const auto Pi = psi(cond, pipes, cond.reference);

  SUBCASE("identical data give zero ratios") {
    const auto probe = junction_lipschitz_probe(cond, pipes, cond.reference, Pi,
                                                cond.reference, Pi);
    CHECK(probe.trace_ratio == 0.0);
    CHECK(probe.sigma_ratio == 0.0);
  }

  SUBCASE("ensemble ratios are finite and scale-stable") {
    const auto max_ratio = [&](double scale, std::uint64_t seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> d(-scale, scale);
      double worst = 0.0;
      for (int k = 0; k < 200; ++k) {
        auto data = cond.reference;
        auto Pi2 = Pi;
        for (auto& u : data) {
          u.density += d(rng);
          u.momentum += d(rng);
        }
        Pi2[1] += d(rng);
        const auto probe =
            junction_lipschitz_probe(cond, pipes, cond.reference, Pi, data, Pi2);
        CHECK(std::isfinite(probe.trace_ratio));
        CHECK(std::isfinite(probe.sigma_ratio));
        worst = std::max({worst, probe.trace_ratio, probe.sigma_ratio});
      }
      return worst;
    };
    const double r3 = max_ratio(1e-3, 101);
    const double r4 = max_ratio(1e-4, 101);
    CHECK(r3 > 0.0);
    CHECK(r4 < 2.0 * r3);
    CHECK(r3 < 2.0 * r4);

    // implicit-function bound: directional sensitivities at the reference
    double bound = 0.0;
    const double h = 1e-6;
    for (int dir = 0; dir < 5; ++dir) {
      auto data = cond.reference;
      auto Pi2 = Pi;
      double den = h;
      if (dir == 0) data[0].density += h;
      if (dir == 1) data[0].momentum += h;
      if (dir == 2) data[1].density += h;
      if (dir == 3) data[1].momentum += h;
      if (dir == 4) Pi2[1] += h;
      const auto probe =
          junction_lipschitz_probe(cond, pipes, cond.reference, Pi, data, Pi2);
      (void)den;
      bound = std::max({bound, probe.trace_ratio, probe.sigma_ratio});
    }
    CHECK(r4 <= 1.2 * bound);
  }
}
