#pragma once

#include <vector>

#include "pipenet/netsolver.hpp"

namespace pipenet {

// Weights of the Glimm machinery. The well-posedness theory only needs some
// valid choice to exist; they are exposed as configuration with default 1.
struct FunctionalConfig {
  double K_J = 1.0;     // 1-wave weight in V
  double K_hat = 1.0;   // TV(Pi) weight in Upsilon
  double K_check = 1.0; // Q weight in Upsilon
  double K = 1.0;       // family-1 weight in W
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double K_bar = 1.0;   // control weight in Phi
};

// One wave of the interface decomposition of a grid function: position of
// the generating Riemann problem, family, signed size.
struct WaveRecord {
  double position = 0.0;  // x of the interface (0 for the junction)
  int family = 2;
  double sigma = 0.0;

  bool is_shock() const { return sigma < 0.0; }
};

// Junction waves (2-family, x = 0) followed by the interior interface waves
// of pipe l. All sizes come from the same sigma parametrization as the
// Riemann kernel.
std::vector<std::vector<WaveRecord>> wave_decomposition(
    const NetworkModel& model, const NetworkState& state);

double tv_u(const NetworkState& state);
double tv_pi(const ControlSchedule& control, double from_time = 0.0);
double tv_p(const NetworkModel& model, const NetworkState& state);

double glimm_V(const NetworkModel& model, const NetworkState& state,
               const FunctionalConfig& cfg);
double glimm_Q(const NetworkModel& model, const NetworkState& state,
               const FunctionalConfig& cfg);
// Upsilon = V + K_hat TV(Pi) + K_check Q.
double upsilon(const NetworkModel& model, const NetworkState& state,
               const FunctionalConfig& cfg);

// Weighted L1-type distance between two extended states on the same grid:
// sum_i,l int |q_i^l| W_i^l dx + K_bar ||Pi - Pi~||_L1 over the remaining
// horizon. Both states must carry the same time.
double stability_phi(const NetworkModel& model, const NetworkState& a,
                     const NetworkState& b, const FunctionalConfig& cfg);

enum class CostVariant { CompressorTarget, GateSmoothing, ValveOverflow, PumpCost };

struct CostSpec {
  CostVariant variant = CostVariant::CompressorTarget;
  // compressor: track pressure p_bar on [x_a, x_b] of the outlet pipe
  double p_bar = 1.0;
  double x_a = 0.0;
  double x_b = 1.0;
  // gate: weight phi(x), piecewise constant
  InclineProfile phi;
  // valve/pump: operation costs per controlled component, overflow height
  // and integration length
  std::vector<double> c;
  double h_bar = 1.0;
  double length = 1.0;
  int pipe = -1;  // observed pipe; -1 means the last one

  std::size_t observed_pipe(std::size_t n) const {
    return pipe < 0 ? n - 1 : static_cast<std::size_t>(pipe);
  }
};

struct CostBreakdown {
  double J_o = 0.0;
  double J_1_integral = 0.0;
  double total = 0.0;
};

// J(Pi) = J_o(Pi) + sum_k J_1(snapshot_k) (t_{k+1} - t_k), left rule over
// the recorded snapshots.
CostBreakdown cost_J(const NetworkModel& model, const Trajectory& traj,
                     const ControlSchedule& control, const CostSpec& spec);

}  // namespace pipenet
