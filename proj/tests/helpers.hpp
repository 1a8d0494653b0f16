#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pipenet/netsolver.hpp"

namespace pipenet::testing {

// ---- fixture models ------------------------------------------------------

inline PipeModel sw_pipe(double g = 1.0) {
  PipeModel p;
  p.law = PressureLaw::shallow_water(g);
  p.gravity = g;
  p.active_length = 10.0;
  return p;
}

inline PipeModel gas_pipe(double gamma = 1.4) {
  PipeModel p;
  p.law = PressureLaw::gamma_law(1.0, 1.0, gamma);
  p.gravity = 1.0;
  p.active_length = 10.0;
  return p;
}

inline std::vector<PipeModel> all_law_pipes() {
  return {gas_pipe(1.4), gas_pipe(2.0), gas_pipe(1.0), sw_pipe(1.0)};
}

// Random subsonic state with density in [lo, hi] and |v| <= frac * c.
inline FluidState random_subsonic(std::mt19937_64& rng, const PipeModel& pipe,
                                  double lo = 0.5, double hi = 2.0,
                                  double frac = 0.8) {
  std::uniform_real_distribution<double> rho_dist(lo, hi);
  std::uniform_real_distribution<double> v_dist(-frac, frac);
  const double rho = rho_dist(rng);
  const double c = sound_speed(pipe.law, rho);
  return {rho, rho * v_dist(rng) * c};
}

// ---- independent oracles -------------------------------------------------
// These re-derive the curve relations in closed form; the implementation
// path (RK4 integration of dq/drho = lambda) never touches them.

// h(rho) = int c/s ds.
inline double oracle_h(const PressureLaw& law, double rho) {
  if (law.kind == LawKind::ShallowWater) return 2.0 * std::sqrt(law.g * rho);
  if (law.gamma == 1.0)
    return std::sqrt(law.p_star / law.rho_star) * std::log(rho);
  const double c = std::sqrt(law.p_star * law.gamma *
                             std::pow(rho / law.rho_star, law.gamma - 1.0) /
                             law.rho_star);
  return 2.0 * c / (law.gamma - 1.0);
}

inline double oracle_pressure(const PressureLaw& law, double rho) {
  if (law.kind == LawKind::ShallowWater) return 0.5 * law.g * rho * rho;
  return law.p_star * std::pow(rho / law.rho_star, law.gamma);
}

// Velocity on the forward i-curve from (rho0, v0) at density rho.
inline double oracle_curve_velocity(const PressureLaw& law, int family,
                                    double rho0, double v0, double rho) {
  const bool raref = family == 1 ? rho < rho0 : rho > rho0;
  if (rho == rho0) return v0;
  if (raref) {
    const double dh = oracle_h(law, rho) - oracle_h(law, rho0);
    return family == 1 ? v0 - dh : v0 + dh;
  }
  const double dp = oracle_pressure(law, rho) - oracle_pressure(law, rho0);
  return v0 - std::sqrt(std::max(0.0, dp * (rho - rho0)) / (rho * rho0));
}

// Middle density of the Riemann problem by bisection on the scalar
// curve-intersection equation, written only in terms of the oracle curves.
inline double oracle_middle_density(const PressureLaw& law,
                                    const FluidState& uL,
                                    const FluidState& uR) {
  const auto G = [&](double rho_m) {
    const double v_left = oracle_curve_velocity(law, 1, uL.density,
                                                uL.velocity(), rho_m);
    // Reverse 2-curve: middle is the left endpoint of the 2-wave into uR.
    const bool raref = rho_m < uR.density;
    double v_right;
    if (raref) {
      v_right = uR.velocity() - (oracle_h(law, uR.density) - oracle_h(law, rho_m));
    } else {
      const double dp =
          oracle_pressure(law, rho_m) - oracle_pressure(law, uR.density);
      v_right = uR.velocity() +
                std::sqrt(std::max(0.0, dp * (rho_m - uR.density)) /
                          (rho_m * uR.density));
    }
    return v_left - v_right;
  };
  double lo = 1e-10;
  double hi = 2.0 * std::max(uL.density, uR.density);
  while (G(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (G(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Exact self-similar evaluation built from the oracle relations only.
inline FluidState oracle_sample(const PressureLaw& law, const FluidState& uL,
                                const FluidState& uR, double xi) {
  const double rho_m = oracle_middle_density(law, uL, uR);
  const double v_m = oracle_curve_velocity(law, 1, uL.density, uL.velocity(), rho_m);
  const auto c_of = [&](double rho) {
    return law.kind == LawKind::ShallowWater
               ? std::sqrt(law.g * rho)
               : std::sqrt(law.p_star * law.gamma *
                           std::pow(rho / law.rho_star, law.gamma - 1.0) /
                           law.rho_star);
  };

  // 1-wave
  if (rho_m > uL.density) {  // 1-shock
    const double s = (rho_m * v_m - uL.momentum) / (rho_m - uL.density);
    if (xi < s) return uL;
  } else {  // 1-rarefaction between lambda1(L) and lambda1(m)
    const double head = uL.velocity() - c_of(uL.density);
    const double tail = v_m - c_of(rho_m);
    if (xi < head) return uL;
    if (xi <= tail) {
      // solve lambda1(rho) = xi on the curve by bisection in rho
      double a = rho_m, b = uL.density;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        const double v = oracle_curve_velocity(law, 1, uL.density,
                                               uL.velocity(), mid);
        (v - c_of(mid) > xi ? a : b) = mid;
      }
      const double rho = 0.5 * (a + b);
      return {rho, rho * oracle_curve_velocity(law, 1, uL.density,
                                               uL.velocity(), rho)};
    }
  }
  // 2-wave
  if (rho_m > uR.density) {  // 2-shock
    const double s = (uR.momentum - rho_m * v_m) / (uR.density - rho_m);
    if (xi < s) return {rho_m, rho_m * v_m};
    return uR;
  }
  const double tail = v_m + c_of(rho_m);
  const double head = uR.velocity() + c_of(uR.density);
  if (xi < tail) return {rho_m, rho_m * v_m};
  if (xi <= head) {
    double a = rho_m, b = uR.density;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      const double v = oracle_curve_velocity(law, 2, rho_m, v_m, mid);
      (v + c_of(mid) < xi ? a : b) = mid;
    }
    const double rho = 0.5 * (a + b);
    return {rho, rho * oracle_curve_velocity(law, 2, rho_m, v_m, rho)};
  }
  return uR;
}

// ---- network fixtures ------------------------------------------------------

// Two-pipe pumping station network (shallow water, law-independent Psi),
// at an exact junction equilibrium when friction and incline vanish.
inline NetworkModel pump_network(int cells, double g = 1.0,
                                 double length = 10.0) {
  NetworkModel model;
  PipeModel pipe = sw_pipe(g);
  pipe.friction = 0.0;
  pipe.active_length = length;
  model.pipes = {pipe, pipe};
  model.coupling.variant = CouplingVariant::PumpingStation;
  model.coupling.widths = {1.0, 1.0};
  model.coupling.reference = {{1.5, -0.3}, {1.0, 0.3}};
  model.grid.cells = cells;
  model.grid.dx = length / cells;
  return model;
}

// Writes a resolved i-rarefaction fan of total size sigma into cells
// [i0, i0+width): the curve is sampled in equal sigma increments so every
// interface jump is small and exactly on the wave curve.
inline void ramp_rarefaction(const NetworkModel& model, NetworkState& state,
                             std::size_t pipe, int family, int i0, int width,
                             double sigma) {
  const FluidState base = state.cells[pipe][i0];
  for (int k = 0; k < width; ++k) {
    const FluidState u =
        lax_curve(model.pipes[pipe], family, base, sigma * (k + 1) / width);
    for (int i = i0 + 1 + k; i < model.grid.cells; ++i)
      state.cells[pipe][i] = u;
  }
}

inline NetworkState constant_state(const NetworkModel& model,
                                   double horizon = 100.0) {
  NetworkState state;
  state.control = constant_control(
      horizon, psi(model.coupling, model.pipes, model.coupling.reference));
  for (std::size_t l = 0; l < model.n_pipes(); ++l)
    state.cells.emplace_back(model.grid.cells, model.coupling.reference[l]);
  return state;
}

// Compressor network at an exact equilibrium (no source terms).
inline NetworkModel compressor_network(int cells, double length = 10.0) {
  NetworkModel model;
  PipeModel pipe = gas_pipe(1.4);
  pipe.friction = 0.0;
  pipe.active_length = length;
  model.pipes = {pipe, pipe};
  model.coupling.variant = CouplingVariant::Compressor;
  model.coupling.gamma = 1.4;
  model.coupling.widths = {1.0, 1.0};
  model.coupling.reference = {{1.0, -0.4}, {1.2, 0.4}};
  model.grid.cells = cells;
  model.grid.dx = length / cells;
  return model;
}

}  // namespace pipenet::testing
