// Benchmark of the advection kernel: serial reference vs OpenMP, identical
// bits required. Builds a large two-canal pump network with a smooth datum.

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pipenet/netsolver.hpp"

using namespace pipenet;

namespace {

NetworkModel make_model(int cells) {
  NetworkModel model;
  PipeModel pipe;
  pipe.law = PressureLaw::shallow_water(1.0);
  pipe.gravity = 1.0;
  pipe.friction = 0.02;
  pipe.active_length = 1.0;
  model.pipes = {pipe, pipe};
  model.coupling.variant = CouplingVariant::PumpingStation;
  model.coupling.widths = {1.0, 1.0};
  model.coupling.reference = {{1.2, -0.1}, {1.0, -0.1}};
  model.grid.cells = cells;
  model.grid.dx = 1.0 / cells;
  return model;
}

NetworkState make_state(const NetworkModel& model) {
  NetworkState state;
  state.control = constant_control(
      10.0, psi(model.coupling, model.pipes, model.coupling.reference));
  for (std::size_t l = 0; l < model.n_pipes(); ++l) {
    std::vector<FluidState> cells(model.grid.cells);
    for (int i = 0; i < model.grid.cells; ++i) {
      const double x = model.grid.center(i);
      const FluidState& ref = model.coupling.reference[l];
      cells[i] = {ref.density + 0.05 * std::sin(8.0 * x) +
                      0.02 * std::sin(37.0 * x),
                  ref.momentum + 0.03 * std::cos(5.0 * x)};
    }
    state.cells.push_back(std::move(cells));
  }
  return state;
}

double run(const NetworkModel& model, NetworkState state, int steps,
           RunMode mode, FluxScheme scheme, double* checksum) {
  SolverConfig config;
  config.mode = mode;
  config.flux = scheme;
  const auto t0 = std::chrono::steady_clock::now();
  MassLedger ledger;
  ledger.init(model, state);
  for (int k = 0; k < steps; ++k) {
    const double dt = cfl_dt(model, state, 0.45);
    advect_step(model, state, dt, state.control.value_at(state.time), config,
                &ledger);
    source_step(model, state, state.time, dt, mode);
    state.time += dt;
  }
  const auto t1 = std::chrono::steady_clock::now();
  *checksum = 0.0;
  for (const auto& pipe : state.cells)
    for (const auto& u : pipe) *checksum += u.density + u.momentum;
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int cells = argc > 1 ? std::atoi(argv[1]) : 100000;
  const int steps = argc > 2 ? std::atoi(argv[2]) : 10;

  const NetworkModel model = make_model(cells);
  const NetworkState state = make_state(model);

  double sum_serial = 0.0, sum_parallel = 0.0, sum_hll = 0.0;
  const double t_serial =
      run(model, state, steps, RunMode::Serial, FluxScheme::ExactGodunov,
          &sum_serial);
  const double t_parallel =
      run(model, state, steps, RunMode::Parallel, FluxScheme::ExactGodunov,
          &sum_parallel);
  const double t_hll = run(model, state, steps, RunMode::Parallel,
                           FluxScheme::Hll, &sum_hll);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("cells=%d steps=%d threads=%d\n", cells, steps, threads);
  std::printf("exact, serial:   %8.3f s  (%.3e cell-steps/s)\n", t_serial,
              2.0 * cells * steps / t_serial);
  std::printf("exact, parallel: %8.3f s  (%.3e cell-steps/s)  speedup %.2fx\n",
              t_parallel, 2.0 * cells * steps / t_parallel,
              t_serial / t_parallel);
  std::printf("hll,   parallel: %8.3f s  (%.3e cell-steps/s)  vs exact %.2fx\n",
              t_hll, 2.0 * cells * steps / t_hll, t_parallel / t_hll);
  if (sum_serial != sum_parallel) {
    std::printf("MISMATCH: serial and parallel results differ "
                "(%.17g vs %.17g)\n",
                sum_serial, sum_parallel);
    return 1;
  }
  std::printf("checksums identical: %.17g\n", sum_serial);
  return 0;
}
