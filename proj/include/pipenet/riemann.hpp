#pragma once

#include <array>

#include "pipenet/models.hpp"

namespace pipenet {

enum class WaveKind { Null, Shock, Rarefaction, Contact };

// Solution structure of a Riemann problem on the line: left state, middle
// state reached by the 1-wave, right state reached by the 2-wave, with the
// signed wave sizes and the speed range covered by each wave.
struct WaveFan {
  FluidState left, middle, right;
  std::array<double, 2> sigma{0.0, 0.0};
  std::array<WaveKind, 2> kind{WaveKind::Null, WaveKind::Null};
  std::array<double, 2> speed_min{0.0, 0.0};
  std::array<double, 2> speed_max{0.0, 0.0};
};

// Which side of the wave the base state sits on. Left (the default) is the
// forward curve: it returns the right state of a wave whose left state is
// `base`. Right is the reverse curve, used by the junction solver where the
// datum sits ahead of the outgoing 2-wave and the trace is the unknown.
enum class WaveSide { Left, Right };

// State connected to `base` by a single wave of family 1 or 2 with signed
// size sigma: rarefaction branch for sigma > 0, Hugoniot branch for
// sigma <= 0. sigma is the density increment along r_i, so the curve has
// tangent r_i(base) at sigma = 0 and is C^2 there. Throws
// NonPositiveDensity / LeftSubsonicRegion if the target state is
// inadmissible.
FluidState lax_curve(const PipeModel& model, int family,
                     const FluidState& base, double sigma,
                     WaveSide side = WaveSide::Left);

// Speed of the shock joining u_minus (left) to u_plus (right); the states
// must satisfy the first Rankine-Hugoniot relation, which determines
// s = [q]/[rho].
double shock_speed(const FluidState& u_minus, const FluidState& u_plus);

// Exact solution of the Riemann problem with subsonic data close enough
// that a subsonic middle state exists. Damped Newton on the wave sizes with
// a bisection fallback on the reduced scalar equation.
WaveFan solve_riemann(const PipeModel& model, const FluidState& uL,
                      const FluidState& uR);

// Self-similar evaluation of a fan at the ray xi = x/t.
FluidState sample_riemann(const PipeModel& model, const WaveFan& fan,
                          double xi);

// Wave sizes of the jump from u_minus to u_plus.
std::array<double, 2> decompose(const PipeModel& model,
                                const FluidState& u_minus,
                                const FluidState& u_plus);

}  // namespace pipenet
