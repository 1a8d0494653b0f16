#pragma once

#include <vector>

#include "pipenet/control.hpp"
#include "pipenet/models.hpp"
#include "pipenet/riemann.hpp"

namespace pipenet {

enum class CouplingVariant { Compressor, UnderflowGate, MultiValve, PumpingStation };

// The junction map Psi of the network. Pipes are all parametrized by
// x >= 0 with the junction at x = 0; flow toward the junction carries
// negative momentum. The first component of Psi is the mass balance row
// sum_l b_l q_l for every variant.
struct CouplingCondition {
  CouplingVariant variant = CouplingVariant::Compressor;
  double gamma = 1.4;                 // compressor power-law exponent
  std::vector<double> widths;         // b_l, one per pipe
  std::vector<FluidState> reference;  // u_bar with Psi(u_bar) = Pi_bar

  std::size_t n_pipes() const { return widths.size(); }
  void validate(const std::vector<PipeModel>& pipes) const;
};

// Psi evaluated at one state per pipe.
std::vector<double> psi(const CouplingCondition& cond,
                        const std::vector<PipeModel>& pipes,
                        const std::vector<FluidState>& u);

// Analytic Jacobian D_l Psi (n rows, 2 columns: d/drho_l, d/dq_l).
std::vector<std::array<double, 2>> dpsi(const CouplingCondition& cond,
                                        const std::vector<PipeModel>& pipes,
                                        const std::vector<FluidState>& u,
                                        std::size_t l);

// det[ D_1 Psi r_2(u_1) ... D_n Psi r_2(u_n) ] with analytic Jacobians.
double transversality_det(const CouplingCondition& cond,
                          const std::vector<PipeModel>& pipes,
                          const std::vector<FluidState>& u);

// Same determinant with finite-difference Jacobians, as a cross-check.
double transversality_det_fd(const CouplingCondition& cond,
                             const std::vector<PipeModel>& pipes,
                             const std::vector<FluidState>& u);

struct JunctionSolution {
  std::vector<FluidState> traces;  // states at x = 0+, one per pipe
  std::vector<double> sigmas;      // 2-wave sizes Sigma(p)
  double residual = 0.0;           // ||Psi(traces) - Pi||_inf
};

// Riemann problem at the junction: finds 2-wave sizes so that the traces
// reached backward from the boundary-adjacent states satisfy
// Psi(traces) = Pi. Only 2-family waves enter the pipes; if the solve would
// need anything else it errors instead of approximating. initial_sigma
// seeds the Newton iteration (defaults to zero sizes).
JunctionSolution solve_junction_riemann(const CouplingCondition& cond,
                                        const std::vector<PipeModel>& pipes,
                                        const std::vector<FluidState>& boundary_states,
                                        const std::vector<double>& Pi,
                                        double tol = 1e-10,
                                        const std::vector<double>& initial_sigma = {});

struct LipschitzProbe {
  double trace_ratio = 0.0;  // ||traces - traces~|| / ||p - p~||
  double sigma_ratio = 0.0;  // ||Sigma - Sigma~|| / ||p - p~||
};

// Empirical version of the junction Lipschitz estimate: solves both data
// and reports the trace and wave-size sensitivity ratios.
LipschitzProbe junction_lipschitz_probe(const CouplingCondition& cond,
                                        const std::vector<PipeModel>& pipes,
                                        const std::vector<FluidState>& states_a,
                                        const std::vector<double>& Pi_a,
                                        const std::vector<FluidState>& states_b,
                                        const std::vector<double>& Pi_b);

}  // namespace pipenet
