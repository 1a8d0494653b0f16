#pragma once

#include <limits>
#include <string>
#include <vector>

#include "pipenet/control.hpp"
#include "pipenet/junction.hpp"
#include "pipenet/models.hpp"
#include "pipenet/riemann.hpp"

namespace pipenet {

// Uniform grid on one pipe; cell 0 touches the junction, the far end sits
// at cells * dx with a zero-gradient ghost.
struct Grid {
  int cells = 400;
  double dx = 0.0;

  double length() const { return cells * dx; }
  double center(int i) const { return (i + 0.5) * dx; }
};

// All static data of the network: one model per pipe, the coupling map and
// the (shared) grid. Immutable during a run.
struct NetworkModel {
  std::vector<PipeModel> pipes;
  CouplingCondition coupling;
  Grid grid;

  std::size_t n_pipes() const { return pipes.size(); }
  void validate() const { coupling.validate(pipes); }
};

enum class Splitting { Lie, Strang };
enum class RunMode { Serial, Parallel };
// Interface flux: exact Godunov (the default; reuses the Riemann kernel) or
// the HLL two-wave approximation for speed comparisons. The junction face
// always uses the boundary Riemann solver.
enum class FluxScheme { ExactGodunov, Hll };

struct SolverConfig {
  double cfl = 0.45;
  Splitting splitting = Splitting::Strang;
  FluxScheme flux = FluxScheme::ExactGodunov;
  double t_end = 1.0;
  // Snapshots are taken at integer multiples of snapshot_dt (plus t=0 and
  // t_end); the step size is clipped so these times are hit exactly.
  // 0 keeps only the initial and final snapshots.
  double snapshot_dt = 0.0;
  double junction_tol = 1e-10;
  // TV(p) budget (the delta of the domain D^delta); exceeded -> error.
  double tv_budget = std::numeric_limits<double>::infinity();
  RunMode mode = RunMode::Serial;
  bool advect_only = false;  // run the convective semigroup S_t alone
  bool record_steps = true;
  bool dense_snapshots = false;  // snapshot after every step (diagnostics)
};

// The extended variable p = (u, Pi): per-pipe cell averages plus the control
// trace. Time is absolute; the right translation of Pi is realized by
// sampling the schedule at the current time.
struct NetworkState {
  double time = 0.0;
  std::vector<std::vector<FluidState>> cells;  // [pipe][cell]
  ControlSchedule control;
};

struct StepRecord {
  double t_start = 0.0;
  double dt = 0.0;
  double junction_residual = 0.0;
  std::vector<double> sigmas;
  std::vector<FluidState> traces;
};

struct Snapshot {
  double time = 0.0;
  std::vector<std::vector<FluidState>> cells;
};

struct MassLedger {
  std::vector<double> initial_mass;       // per pipe, sum rho dx at t=0
  std::vector<double> boundary_integral;  // per pipe, int (influx - outflux)
  std::vector<double> compensation;       // Kahan carry
  double max_rel_error = 0.0;

  void init(const NetworkModel& model, const NetworkState& state);
  void add_flux(std::size_t pipe, double dt, double flux_in, double flux_out);
  void check(const NetworkModel& model, const NetworkState& state);
};

struct Trajectory {
  Grid grid;
  std::vector<Snapshot> snapshots;
  std::vector<StepRecord> steps;
  double mass_max_rel_error = 0.0;
  double tv_max = 0.0;

  const Snapshot& final_snapshot() const { return snapshots.back(); }
};

// Largest admissible step under the CFL constraint.
double cfl_dt(const NetworkModel& model, const NetworkState& state, double cfl);

// One conservative advection step with the junction flux taken from the
// boundary Riemann solver at control value Pi. Returns the junction solution
// for bookkeeping. The interior flux loop runs serial or under OpenMP
// depending on config.mode; the two paths produce identical results.
JunctionSolution advect_step(const NetworkModel& model, NetworkState& state,
                             double dt, const std::vector<double>& Pi,
                             const SolverConfig& config,
                             MassLedger* ledger = nullptr);

// Explicit Euler increment of the source: u <- u + tau g(x, u).
void source_step(const NetworkModel& model, NetworkState& state, double t0,
                 double tau, RunMode mode);

// One operator-splitting step (Lie or Strang per config); advances time.
StepRecord step(const NetworkModel& model, NetworkState& state, double dt,
                const SolverConfig& config, MassLedger* ledger = nullptr);

// Evolves the initial state under the given control up to t_end, recording
// snapshots and per-step junction data. Throws DomainExceeded when the
// measured TV(p) leaves the budget and propagates solver errors with step
// context.
Trajectory evolve(const NetworkModel& model, const NetworkState& initial,
                  const SolverConfig& config);

// L1 distance between two per-pipe grid functions on the same grid.
double l1_distance(const Grid& grid,
                   const std::vector<std::vector<FluidState>>& a,
                   const std::vector<std::vector<FluidState>>& b);

// Sum over pipes of the grid total variation of u.
double grid_tv(const std::vector<std::vector<FluidState>>& cells);

// TV(p) = TV(u) + TV(remaining Pi) + ||Psi(u(0+)) - Pi(t)||_1.
double network_tv(const NetworkModel& model, const NetworkState& state);

struct WeakReport {
  double max_weak_residual = 0.0;      // conservation weak form, basket max
  double max_entropy_violation = 0.0;  // positive part of cell production
  double total_entropy_production = 0.0;
  double max_junction_residual = 0.0;
};

// Discrete weak-form and entropy diagnostics over a trajectory recorded
// with dense snapshots (one per step). The numerical entropy fluxes are the
// exact-Godunov middle values, so the one-sided production bound applies to
// runs made with FluxScheme::ExactGodunov.
WeakReport weak_entropy_residual(const NetworkModel& model,
                                 const Trajectory& traj);

}  // namespace pipenet
