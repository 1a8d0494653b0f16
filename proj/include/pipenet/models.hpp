#pragma once

#include <array>
#include <string>
#include <vector>

#include "pipenet/errors.hpp"

namespace pipenet {

// Conserved pair carried by one pipe: (rho, q) for gas, (H, Q) for a canal.
// Component names follow the gas reading; the canal reading is identical
// algebra with H as a mass-per-length and Q as a per-width discharge.
struct FluidState {
  double density = 0.0;
  double momentum = 0.0;

  double velocity() const { return momentum / density; }
};

inline FluidState operator+(FluidState a, FluidState b) {
  return {a.density + b.density, a.momentum + b.momentum};
}
inline FluidState operator-(FluidState a, FluidState b) {
  return {a.density - b.density, a.momentum - b.momentum};
}
inline FluidState operator*(double s, FluidState a) {
  return {s * a.density, s * a.momentum};
}

// 1-norm on state space; all TV/L1 bookkeeping uses this norm.
inline double norm1(FluidState u) {
  return std::abs(u.density) + std::abs(u.momentum);
}

enum class LawKind { GammaLaw, ShallowWater };

// Barotropic pressure closure. Both closures satisfy p(0)=0, p'>0, p''>=0
// for the admitted parameter ranges (gamma >= 1).
//
// The gamma law with p_star = g/2, rho_star = 1, gamma = 2 produces the same
// values as shallow_water(g); the two evaluation paths are kept separate and
// the equivalence is asserted in the tests.
struct PressureLaw {
  LawKind kind = LawKind::GammaLaw;
  double p_star = 1.0;
  double rho_star = 1.0;
  double gamma = 1.4;
  double g = 9.81;  // shallow water only

  static PressureLaw gamma_law(double p_star, double rho_star, double gamma);
  static PressureLaw shallow_water(double g);
};

double pressure(const PressureLaw& law, double rho);
double pressure_derivative(const PressureLaw& law, double rho);
double pressure_second_derivative(const PressureLaw& law, double rho);
double sound_speed(const PressureLaw& law, double rho);

// h(rho) = int c(s)/s ds, the function entering both Riemann invariants
// v +- h(rho). Used by test oracles and by the rarefaction sampler.
double riemann_invariant_integral(const PressureLaw& law, double rho);

// Piecewise-constant inclination alpha(x): values[k] holds on
// [breakpoints[k-1], breakpoints[k]) with breakpoints[-1] = 0, and
// values.back() holds beyond the last breakpoint. Compact support means
// values.back() == 0.
struct InclineProfile {
  std::vector<double> breakpoints;
  std::vector<double> values{0.0};

  double operator()(double x) const;
  bool compactly_supported() const { return values.back() == 0.0; }
  // Sum of |jump| over breakpoints of x -> alpha(x).
  double jump_total() const;
};

enum class Orientation { TowardJunction, AwayFromJunction };

// Everything the equations need to know about one pipe. Immutable after
// construction; safe for concurrent reads.
struct PipeModel {
  PressureLaw law;
  double width = 1.0;       // b (1 for gas)
  double friction = 0.0;    // nu
  double gravity = 9.81;    // g in the incline source term
  InclineProfile incline;
  double active_length = 1.0;  // L, support of the friction cutoff
  Orientation orientation = Orientation::TowardJunction;
  double rho_min = 1e-8;    // vacuum guard; densities below this are errors
};

void require_positive_density(const PipeModel& model, const FluidState& u,
                              const char* where);

// f(u) = (q, q^2/rho + p(rho)).
std::array<double, 2> flux(const PipeModel& model, const FluidState& u);

// (lambda1, lambda2) = (v - c, v + c).
std::array<double, 2> eigenvalues(const PipeModel& model, const FluidState& u);

// r1 = (-1, -lambda1), r2 = (1, lambda2).
std::array<std::array<double, 2>, 2> eigenvectors(const PipeModel& model,
                                                  const FluidState& u);

// Strict subsonic test: lambda1 < 0 < lambda2.
bool is_subsonic(const PipeModel& model, const FluidState& u);

// g(x, u) = (0, -chi_[0,L](x) nu q|q|/rho - g rho sin alpha(x)).
std::array<double, 2> source(const PipeModel& model, double x,
                             const FluidState& u);

// Mechanical energy eta = q^2/(2 rho) + P(rho) with rho P' - P = p, and the
// matching flux (eta + p) v. P is normalized so P(rho_ref) = 0; rho_ref = 0
// is admitted for gamma > 1 (gives the textbook P = p/(gamma-1)).
struct EntropyPair {
  PressureLaw law;
  double rho_ref = 0.0;

  double potential(double rho) const;  // P(rho)
  double eta(const FluidState& u) const;
  double qflux(const FluidState& u) const;
  std::array<double, 2> eta_gradient(const FluidState& u) const;
};

EntropyPair entropy_pair(const PipeModel& model);
EntropyPair entropy_pair(const PipeModel& model, double rho_ref);

// Numerical verification of the structural source hypotheses: compact
// support at a reference state, finite jump measure in x, Lipschitz in u on
// a compact subsonic box around the reference.
struct SourceValidation {
  bool compact_support = false;
  bool finite_jump_measure = false;
  bool lipschitz_in_u = false;
  double mu_total = 0.0;      // estimated jump measure mu(R+)
  double lipschitz_hat = 0.0; // estimated Lipschitz constant L_hat
  std::string detail;

  bool passed() const {
    return compact_support && finite_jump_measure && lipschitz_in_u;
  }
};

SourceValidation validate_source(const PipeModel& model,
                                 const FluidState& reference);

}  // namespace pipenet
