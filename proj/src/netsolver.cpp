#include "pipenet/netsolver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pipenet {

namespace {

void kahan_add(double& sum, double& carry, double term) {
  const double y = term - carry;
  const double t = sum + y;
  carry = (t - sum) - y;
  sum = t;
}

double pipe_mass(const Grid& grid, const std::vector<FluidState>& cells) {
  double sum = 0.0, carry = 0.0;
  for (const auto& u : cells) kahan_add(sum, carry, u.density * grid.dx);
  return sum;
}

// Godunov interface flux: with subsonic data the ray x/t = 0 falls between
// the 1- and 2-waves, so the flux is f evaluated at the middle state.
std::array<double, 2> godunov_flux(const PipeModel& pipe, const FluidState& uL,
                                   const FluidState& uR) {
  if (uL.density == uR.density && uL.momentum == uR.momentum)
    return flux(pipe, uL);
  const WaveFan fan = solve_riemann(pipe, uL, uR);
  return flux(pipe, fan.middle);
}

// HLL two-wave flux with Davis speed estimates.
std::array<double, 2> hll_flux(const PipeModel& pipe, const FluidState& uL,
                               const FluidState& uR) {
  const auto fl = flux(pipe, uL);
  if (uL.density == uR.density && uL.momentum == uR.momentum) return fl;
  const auto fr = flux(pipe, uR);
  const auto lam_l = eigenvalues(pipe, uL);
  const auto lam_r = eigenvalues(pipe, uR);
  const double sl = std::min(lam_l[0], lam_r[0]);
  const double sr = std::max(lam_l[1], lam_r[1]);
  if (sl >= 0.0) return fl;
  if (sr <= 0.0) return fr;
  const double inv = 1.0 / (sr - sl);
  return {(sr * fl[0] - sl * fr[0] + sl * sr * (uR.density - uL.density)) * inv,
          (sr * fl[1] - sl * fr[1] + sl * sr * (uR.momentum - uL.momentum)) *
              inv};
}

std::array<double, 2> interface_flux(const PipeModel& pipe,
                                     const FluidState& uL, const FluidState& uR,
                                     FluxScheme scheme) {
  return scheme == FluxScheme::Hll ? hll_flux(pipe, uL, uR)
                                   : godunov_flux(pipe, uL, uR);
}

struct PendingError {
  ErrorCode code;
  std::string what;
};

// Interface fluxes F[0..N] for one pipe; F[0] must already hold the
// junction flux. Serial reference and OpenMP version write the same bits:
// every interface is independent.
void interior_fluxes_serial(const PipeModel& pipe,
                            const std::vector<FluidState>& cells,
                            FluxScheme scheme,
                            std::vector<std::array<double, 2>>& F) {
  const int N = static_cast<int>(cells.size());
  for (int i = 1; i < N; ++i)
    F[i] = interface_flux(pipe, cells[i - 1], cells[i], scheme);
  F[N] = flux(pipe, cells[N - 1]);  // zero-gradient ghost
}

void interior_fluxes_parallel(const PipeModel& pipe,
                              const std::vector<FluidState>& cells,
                              FluxScheme scheme,
                              std::vector<std::array<double, 2>>& F) {
  const int N = static_cast<int>(cells.size());
  std::optional<PendingError> pending;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 1; i < N; ++i) {
    try {
      F[i] = interface_flux(pipe, cells[i - 1], cells[i], scheme);
    } catch (const SolverError& e) {
#ifdef _OPENMP
#pragma omp critical(pipenet_flux_error)
#endif
      if (!pending) pending = PendingError{e.code(), e.what()};
    }
  }
  if (pending) throw SolverError(pending->code, pending->what);
  F[N] = flux(pipe, cells[N - 1]);
}

}  // namespace

void MassLedger::init(const NetworkModel& model, const NetworkState& state) {
  const std::size_t n = model.n_pipes();
  initial_mass.assign(n, 0.0);
  boundary_integral.assign(n, 0.0);
  compensation.assign(n, 0.0);
  for (std::size_t l = 0; l < n; ++l)
    initial_mass[l] = pipe_mass(model.grid, state.cells[l]);
}

void MassLedger::add_flux(std::size_t pipe, double dt, double flux_in,
                          double flux_out) {
  kahan_add(boundary_integral[pipe], compensation[pipe],
            dt * (flux_in - flux_out));
}

void MassLedger::check(const NetworkModel& model, const NetworkState& state) {
  for (std::size_t l = 0; l < model.n_pipes(); ++l) {
    const double mass = pipe_mass(model.grid, state.cells[l]);
    const double predicted = initial_mass[l] + boundary_integral[l];
    const double rel =
        std::abs(mass - predicted) / std::max(std::abs(initial_mass[l]), 1e-300);
    max_rel_error = std::max(max_rel_error, rel);
  }
}

double cfl_dt(const NetworkModel& model, const NetworkState& state, double cfl) {
  double lam_max = 0.0;
  for (std::size_t l = 0; l < model.n_pipes(); ++l)
    for (const auto& u : state.cells[l]) {
      const auto lam = eigenvalues(model.pipes[l], u);
      lam_max = std::max({lam_max, std::abs(lam[0]), std::abs(lam[1])});
    }
  if (lam_max <= 0.0) fail(ErrorCode::NoSolution, "vanishing wave speeds");
  return cfl * model.grid.dx / lam_max;
}

JunctionSolution advect_step(const NetworkModel& model, NetworkState& state,
                             double dt, const std::vector<double>& Pi,
                             const SolverConfig& config, MassLedger* ledger) {
  const std::size_t n = model.n_pipes();
  const int N = model.grid.cells;
  const double lambda = dt / model.grid.dx;

  std::vector<FluidState> boundary(n);
  for (std::size_t l = 0; l < n; ++l) boundary[l] = state.cells[l].front();
  const JunctionSolution junction =
      solve_junction_riemann(model.coupling, model.pipes, boundary, Pi,
                             config.junction_tol);

  static thread_local std::vector<std::vector<std::array<double, 2>>> F_all;
  F_all.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    auto& F = F_all[l];
    F.resize(N + 1);
    F[0] = flux(model.pipes[l], junction.traces[l]);
    if (config.mode == RunMode::Parallel)
      interior_fluxes_parallel(model.pipes[l], state.cells[l], config.flux, F);
    else
      interior_fluxes_serial(model.pipes[l], state.cells[l], config.flux, F);
  }

  for (std::size_t l = 0; l < n; ++l) {
    auto& cells = state.cells[l];
    const auto& F = F_all[l];
    for (int i = 0; i < N; ++i) {
      cells[i].density -= lambda * (F[i + 1][0] - F[i][0]);
      cells[i].momentum -= lambda * (F[i + 1][1] - F[i][1]);
    }
    if (ledger) ledger->add_flux(l, dt, F[0][0], F[N][0]);
  }
  return junction;
}

void source_step(const NetworkModel& model, NetworkState& state, double /*t0*/,
                 double tau, RunMode mode) {
  const int N = model.grid.cells;
  for (std::size_t l = 0; l < model.n_pipes(); ++l) {
    const PipeModel& pipe = model.pipes[l];
    auto& cells = state.cells[l];
    // Sources have no explicit time dependence here; t0 is kept in the
    // signature to mirror the local flow G(t0, u).
    std::optional<PendingError> pending;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (mode == RunMode::Parallel)
#endif
    for (int i = 0; i < N; ++i) {
      try {
        const auto g = source(pipe, model.grid.center(i), cells[i]);
        cells[i].momentum += tau * g[1];
        if (!(cells[i].density >= pipe.rho_min))
          fail(ErrorCode::NonPositiveDensity, "source step");
      } catch (const SolverError& e) {
#ifdef _OPENMP
#pragma omp critical(pipenet_source_error)
#endif
        if (!pending) pending = PendingError{e.code(), e.what()};
      }
    }
    if (pending) throw SolverError(pending->code, pending->what);
  }
}

StepRecord step(const NetworkModel& model, NetworkState& state, double dt,
                const SolverConfig& config, MassLedger* ledger) {
  StepRecord rec;
  rec.t_start = state.time;
  rec.dt = dt;
  const std::vector<double> Pi = state.control.value_at(state.time + 0.5 * dt);

  if (config.advect_only || config.splitting == Splitting::Lie) {
    const JunctionSolution j = advect_step(model, state, dt, Pi, config, ledger);
    if (!config.advect_only)
      source_step(model, state, rec.t_start, dt, config.mode);
    rec.junction_residual = j.residual;
    rec.sigmas = j.sigmas;
    rec.traces = j.traces;
  } else {
    source_step(model, state, rec.t_start, 0.5 * dt, config.mode);
    const JunctionSolution j = advect_step(model, state, dt, Pi, config, ledger);
    source_step(model, state, rec.t_start + 0.5 * dt, 0.5 * dt, config.mode);
    rec.junction_residual = j.residual;
    rec.sigmas = j.sigmas;
    rec.traces = j.traces;
  }
  state.time += dt;
  return rec;
}

double l1_distance(const Grid& grid,
                   const std::vector<std::vector<FluidState>>& a,
                   const std::vector<std::vector<FluidState>>& b) {
  double sum = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l)
    for (std::size_t i = 0; i < a[l].size(); ++i)
      sum += norm1(a[l][i] - b[l][i]) * grid.dx;
  return sum;
}

double grid_tv(const std::vector<std::vector<FluidState>>& cells) {
  double tv = 0.0;
  for (const auto& pipe : cells)
    for (std::size_t i = 0; i + 1 < pipe.size(); ++i)
      tv += norm1(pipe[i + 1] - pipe[i]);
  return tv;
}

double network_tv(const NetworkModel& model, const NetworkState& state) {
  double tv = grid_tv(state.cells) +
              state.control.total_variation_from(state.time);

  std::vector<FluidState> boundary(model.n_pipes());
  for (std::size_t l = 0; l < model.n_pipes(); ++l)
    boundary[l] = state.cells[l].front();
  const auto psi_val = psi(model.coupling, model.pipes, boundary);
  const auto& Pi = state.control.value_at(state.time);
  for (std::size_t k = 0; k < psi_val.size(); ++k)
    tv += std::abs(psi_val[k] - Pi[k]);
  return tv;
}

namespace {

// Next clip time strictly above t, or infinity.
double next_boundary(double t, double t_end, double snapshot_dt,
                     const std::vector<double>& breakpoints) {
  double next = t_end;
  if (snapshot_dt > 0.0) {
    const double k = std::floor(t / snapshot_dt + 1e-9) + 1.0;
    next = std::min(next, k * snapshot_dt);
  }
  for (double b : breakpoints)
    if (b > t * (1.0 + 1e-14) + 1e-300) {
      next = std::min(next, b);
      break;
    }
  return next;
}

void require_admissible(const NetworkModel& model, const NetworkState& state) {
  for (std::size_t l = 0; l < model.n_pipes(); ++l)
    for (const auto& u : state.cells[l])
      if (!is_subsonic(model.pipes[l], u))
        fail(ErrorCode::LeftSubsonicRegion, "cell state left the subsonic region");
}

}  // namespace

Trajectory evolve(const NetworkModel& model, const NetworkState& initial,
                  const SolverConfig& config) {
  NetworkState state = initial;
  state.control.validate();
  require_admissible(model, state);

  Trajectory traj;
  traj.grid = model.grid;
  traj.tv_max = network_tv(model, state);
  if (traj.tv_max > config.tv_budget)
    fail(ErrorCode::DomainExceeded, "initial data outside the TV budget");

  MassLedger ledger;
  ledger.init(model, state);

  traj.snapshots.push_back({state.time, state.cells});

  long step_count = 0;
  while (state.time < config.t_end - 1e-14 * std::max(1.0, config.t_end)) {
    const double boundary = next_boundary(state.time, config.t_end,
                                          config.snapshot_dt,
                                          state.control.breakpoints);
    const double dt_cfl = cfl_dt(model, state, config.cfl);
    const bool clipped = boundary - state.time <= dt_cfl;
    const double dt = clipped ? boundary - state.time : dt_cfl;

    StepRecord rec;
    try {
      rec = step(model, state, dt, config, &ledger);
    } catch (SolverError& e) {
      fail(e.code(), std::string(e.what()) + " [step " +
                         std::to_string(step_count) + ", t=" +
                         std::to_string(state.time) + "]");
    }
    if (clipped) state.time = boundary;  // land on the boundary exactly
    ++step_count;

    require_admissible(model, state);
    ledger.check(model, state);
    const double tv_now = network_tv(model, state);
    traj.tv_max = std::max(traj.tv_max, tv_now);
    if (tv_now > config.tv_budget)
      fail(ErrorCode::DomainExceeded, "TV(p) budget exceeded at t=" +
                                          std::to_string(state.time));

    if (config.record_steps) traj.steps.push_back(std::move(rec));

    const bool snap_due =
        config.dense_snapshots ||
        (config.snapshot_dt > 0.0 &&
         std::abs(state.time / config.snapshot_dt -
                  std::round(state.time / config.snapshot_dt)) < 1e-9);
    if (snap_due || state.time >= config.t_end - 1e-14 * std::max(1.0, config.t_end))
      traj.snapshots.push_back({state.time, state.cells});
  }
  if (traj.snapshots.back().time != state.time)
    traj.snapshots.push_back({state.time, state.cells});

  traj.mass_max_rel_error = ledger.max_rel_error;
  return traj;
}

WeakReport weak_entropy_residual(const NetworkModel& model,
                                 const Trajectory& traj) {
  WeakReport report;
  if (traj.snapshots.size() < 2 ||
      traj.steps.size() + 1 != traj.snapshots.size())
    fail(ErrorCode::BadScenario,
         "weak_entropy_residual needs per-step snapshots");

  const int N = model.grid.cells;
  const double X = model.grid.length();
  const double T = traj.snapshots.back().time;

  // Smooth compactly supported test functions (t, x) -> bump * bump.
  const auto bump = [](double s) {
    const double w = 1.0 - s * s;
    return w > 0.0 ? w * w * w * w : 0.0;
  };
  struct TestFn {
    double tc, rt, xc, rx;
  };
  const std::vector<TestFn> basket{{0.5 * T, 0.45 * T, 0.30 * X, 0.25 * X},
                                   {0.5 * T, 0.45 * T, 0.50 * X, 0.25 * X},
                                   {0.5 * T, 0.45 * T, 0.70 * X, 0.25 * X}};
  const auto phi = [&](const TestFn& f, double t, double x) {
    return bump((t - f.tc) / f.rt) * bump((x - f.xc) / f.rx);
  };

  std::vector<EntropyPair> pairs;
  for (const auto& pipe : model.pipes) pairs.push_back(entropy_pair(pipe));

  std::vector<std::vector<double>> weak(model.n_pipes(),
                                        std::vector<double>(basket.size(), 0.0));

  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const auto& snap0 = traj.snapshots[k];
    const auto& snap1 = traj.snapshots[k + 1];
    const auto& rec = traj.steps[k];
    const double dt = rec.dt;
    report.max_junction_residual =
        std::max(report.max_junction_residual, rec.junction_residual);

    for (std::size_t l = 0; l < model.n_pipes(); ++l) {
      const PipeModel& pipe = model.pipes[l];
      const auto& u0 = snap0.cells[l];
      const auto& u1 = snap1.cells[l];

      // Interface entropy fluxes of the Godunov middle states.
      std::vector<double> Q(N + 1);
      Q[0] = pairs[l].qflux(rec.traces[l]);
      for (int i = 1; i < N; ++i) {
        if (u0[i - 1].density == u0[i].density &&
            u0[i - 1].momentum == u0[i].momentum) {
          Q[i] = pairs[l].qflux(u0[i]);
        } else {
          const WaveFan fan = solve_riemann(pipe, u0[i - 1], u0[i]);
          Q[i] = pairs[l].qflux(fan.middle);
        }
      }
      Q[N] = pairs[l].qflux(u0[N - 1]);

      for (int i = 0; i < N; ++i) {
        const double x = model.grid.center(i);
        const auto g = source(pipe, x, u0[i]);
        const auto grad = pairs[l].eta_gradient(u0[i]);
        const double production =
            (pairs[l].eta(u1[i]) - pairs[l].eta(u0[i])) * model.grid.dx +
            (Q[i + 1] - Q[i]) * dt - (grad[0] * g[0] + grad[1] * g[1]) *
                                         model.grid.dx * dt;
        report.total_entropy_production += production;
        report.max_entropy_violation =
            std::max(report.max_entropy_violation, production);

        const auto f = flux(pipe, u0[i]);
        const double xr = model.grid.center(i + 1);
        for (std::size_t b = 0; b < basket.size(); ++b) {
          const double p0 = phi(basket[b], snap0.time, x);
          weak[l][b] += (u0[i].density + u0[i].momentum) *
                            (phi(basket[b], snap1.time, x) - p0) *
                            model.grid.dx +
                        (f[0] + f[1]) * (phi(basket[b], snap0.time, xr) - p0) *
                            dt +
                        (g[0] + g[1]) * p0 * model.grid.dx * dt;
        }
      }
    }
  }
  for (const auto& per_pipe : weak)
    for (double r : per_pipe)
      report.max_weak_residual = std::max(report.max_weak_residual, std::abs(r));
  return report;
}

}  // namespace pipenet
