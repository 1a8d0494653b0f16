#include "pipenet/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pipenet {

namespace {

constexpr double kRarefactionTol = 1e-12;  // per-step ODE tolerance
constexpr double kNullSigma = 1e-14;       // below this a wave is Null

double lambda_family(const PipeModel& model, int family, double rho,
                     double q) {
  const double v = q / rho;
  const double c = sound_speed(model.law, rho);
  return family == 1 ? v - c : v + c;
}

// Integrates dq/drho = lambda_i(rho, q) from (rho0, q0) to rho1 with
// step-doubling RK4. The integration variable is the density, which moves
// with unit speed along the curve parameter.
double integrate_rarefaction(const PipeModel& model, int family, double rho0,
                             double q0, double rho1) {
  if (rho1 == rho0) return q0;
  const auto rhs = [&](double rho, double q) {
    return lambda_family(model, family, rho, q);
  };
  const auto rk4 = [&](double rho, double q, double h) {
    const double k1 = rhs(rho, q);
    const double k2 = rhs(rho + 0.5 * h, q + 0.5 * h * k1);
    const double k3 = rhs(rho + 0.5 * h, q + 0.5 * h * k2);
    const double k4 = rhs(rho + h, q + h * k3);
    return q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  double rho = rho0;
  double q = q0;
  const double dir = rho1 > rho0 ? 1.0 : -1.0;
  double h = rho1 - rho0;
  int guard = 0;
  while (dir * (rho1 - rho) > 0.0) {
    if (++guard > 100000)
      fail(ErrorCode::NoConvergence, "rarefaction ODE stalled");
    if (dir * (rho + h - rho1) > 0.0) h = rho1 - rho;
    const double q_full = rk4(rho, q, h);
    const double q_mid = rk4(rho, q, 0.5 * h);
    const double q_half = rk4(rho + 0.5 * h, q_mid, 0.5 * h);
    const double err = std::abs(q_half - q_full) / 15.0;
    const double tol = kRarefactionTol * (1.0 + std::abs(q));
    if (err <= tol) {
      q = q_half + (q_half - q_full) / 15.0;
      rho += h;
    }
    const double grow =
        err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
    if (std::abs(h) < 1e-15 * (1.0 + std::abs(rho))) h = rho1 - rho;
  }
  return q;
}

// Hugoniot velocity jump between densities rho_a and rho_b:
// |v_b - v_a| = sqrt([p][rho] / (rho_a rho_b)). The product is nonnegative
// because p is increasing; clamp defends against rounding at tiny jumps.
double hugoniot_dv(const PipeModel& model, double rho_a, double rho_b) {
  const double dp = pressure(model.law, rho_b) - pressure(model.law, rho_a);
  const double drho = rho_b - rho_a;
  return std::sqrt(std::max(0.0, dp * drho) / (rho_a * rho_b));
}

// Curve evaluation without the admissibility check; the public lax_curve
// and the Newton loop wrap this.
FluidState curve_point(const PipeModel& model, int family,
                       const FluidState& base, double sigma, WaveSide side) {
  const double dir = family == 1 ? -1.0 : 1.0;
  const double signed_step = side == WaveSide::Left ? dir * sigma : -dir * sigma;
  const double rho_t = base.density + signed_step;
  if (!(rho_t >= model.rho_min))
    fail(ErrorCode::NonPositiveDensity, "lax_curve target density");
  if (sigma == 0.0) return base;
  if (sigma > 0.0) {
    const double q_t =
        integrate_rarefaction(model, family, base.density, base.momentum, rho_t);
    return {rho_t, q_t};
  }
  // Shock branch: the state on the left of the wave has the higher velocity.
  const double dv = hugoniot_dv(model, base.density, rho_t);
  const double v_t = base.momentum / base.density +
                     (side == WaveSide::Left ? -dv : dv);
  return {rho_t, rho_t * v_t};
}

struct NewtonResult {
  std::array<double, 2> sigma{0.0, 0.0};
  FluidState middle;
  double residual = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Residual of the two-curve composition against uR; infinity when the
// candidate sizes leave the admissible set.
bool eval_residual(const PipeModel& model, const FluidState& uL,
                   const FluidState& uR, const std::array<double, 2>& s,
                   FluidState* middle, std::array<double, 2>* F) {
  try {
    const FluidState m = curve_point(model, 1, uL, s[0], WaveSide::Left);
    const FluidState r = curve_point(model, 2, m, s[1], WaveSide::Left);
    *middle = m;
    (*F)[0] = r.density - uR.density;
    (*F)[1] = r.momentum - uR.momentum;
    return true;
  } catch (const SolverError&) {
    return false;
  }
}

NewtonResult newton_two_waves(const PipeModel& model, const FluidState& uL,
                              const FluidState& uR) {
  NewtonResult out;
  std::array<double, 2> s{0.0, 0.0};
  std::array<double, 2> F;
  FluidState middle;
  if (!eval_residual(model, uL, uR, s, &middle, &F)) return out;
  const double scale =
      1.0 + std::max({std::abs(uL.density), std::abs(uL.momentum),
                      std::abs(uR.density), std::abs(uR.momentum)});
  double res = std::max(std::abs(F[0]), std::abs(F[1]));
  double best_res = res;
  auto best_s = s;
  FluidState best_middle = middle;
  int stall = 0;

  for (int it = 0; it < 60 && res > 1e-14 * scale; ++it) {
    // Forward-difference Jacobian; the sigma2 column reuses the middle state.
    const double h0 = 1e-7 * (1.0 + std::abs(s[0]));
    const double h1 = 1e-7 * (1.0 + std::abs(s[1]));
    std::array<double, 2> F0, F1;
    FluidState m0, m1;
    if (!eval_residual(model, uL, uR, {s[0] + h0, s[1]}, &m0, &F0)) break;
    if (!eval_residual(model, uL, uR, {s[0], s[1] + h1}, &m1, &F1)) break;
    const double J00 = (F0[0] - F[0]) / h0, J01 = (F1[0] - F[0]) / h1;
    const double J10 = (F0[1] - F[1]) / h0, J11 = (F1[1] - F[1]) / h1;
    const double det = J00 * J11 - J01 * J10;
    if (std::abs(det) < 1e-30) break;
    const double d0 = (-F[0] * J11 + F[1] * J01) / det;
    const double d1 = (-J00 * F[1] + J10 * F[0]) / det;

    double eta = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      std::array<double, 2> trial{s[0] + eta * d0, s[1] + eta * d1};
      std::array<double, 2> Ft;
      FluidState mt;
      if (eval_residual(model, uL, uR, trial, &mt, &Ft)) {
        const double rt = std::max(std::abs(Ft[0]), std::abs(Ft[1]));
        if (rt < res) {
          s = trial;
          F = Ft;
          middle = mt;
          res = rt;
          accepted = true;
          break;
        }
      }
      eta *= 0.5;
    }
    if (!accepted) break;
    if (res < best_res * (1.0 - 1e-3)) {
      stall = 0;
    } else if (++stall > 2) {
      break;
    }
    if (res < best_res) {
      best_res = res;
      best_s = s;
      best_middle = middle;
    }
  }
  if (res < best_res) {
    best_res = res;
    best_s = s;
    best_middle = middle;
  }
  out.sigma = best_s;
  out.middle = best_middle;
  out.residual = best_res;
  out.ok = best_res <= 1e-11 * scale;
  return out;
}

// Velocity reachable from uL through a 1-wave, and from uR backward through
// a 2-wave, both as functions of the middle density. Their difference is
// strictly decreasing, so bisection always works when a solution exists.
double v_from_left(const PipeModel& model, const FluidState& uL, double rho_m) {
  const FluidState m =
      curve_point(model, 1, uL, uL.density - rho_m, WaveSide::Left);
  return m.momentum / m.density;
}

double v_from_right(const PipeModel& model, const FluidState& uR, double rho_m) {
  const FluidState m =
      curve_point(model, 2, uR, uR.density - rho_m, WaveSide::Right);
  return m.momentum / m.density;
}

NewtonResult bisect_middle(const PipeModel& model, const FluidState& uL,
                           const FluidState& uR) {
  NewtonResult out;
  const auto G = [&](double rho_m) {
    return v_from_left(model, uL, rho_m) - v_from_right(model, uR, rho_m);
  };
  double lo = model.rho_min;
  if (G(lo) <= 0.0) return out;  // vacuum-side data, no positive middle
  double hi = 2.0 * std::max(uL.density, uR.density);
  int guard = 0;
  while (G(hi) > 0.0) {
    hi *= 2.0;
    if (++guard > 60) return out;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (G(mid) > 0.0 ? lo : hi) = mid;
  }
  const double rho_m = 0.5 * (lo + hi);
  out.sigma = {uL.density - rho_m, uR.density - rho_m};
  out.middle = curve_point(model, 1, uL, out.sigma[0], WaveSide::Left);
  const FluidState r = curve_point(model, 2, out.middle, out.sigma[1],
                                   WaveSide::Left);
  out.residual = std::max(std::abs(r.density - uR.density),
                          std::abs(r.momentum - uR.momentum));
  out.ok = true;
  return out;
}

FluidState rarefaction_state_at(const PipeModel& model, int family,
                                const FluidState& left_of_wave,
                                const FluidState& right_of_wave, double xi) {
  // lambda_i is monotone increasing across the fan; bisect on the density
  // span between the two edge states.
  double rho_a = left_of_wave.density;
  double rho_b = right_of_wave.density;
  const FluidState& base = left_of_wave;
  const auto lambda_at = [&](double rho) {
    const double q =
        integrate_rarefaction(model, family, base.density, base.momentum, rho);
    return lambda_family(model, family, rho, q);
  };
  // Orient so that lambda(rho_a) <= xi <= lambda(rho_b).
  double la = lambda_at(rho_a);
  double lb = lambda_at(rho_b);
  if (la > lb) {
    std::swap(rho_a, rho_b);
    std::swap(la, lb);
  }
  if (xi <= la) return {rho_a, integrate_rarefaction(model, family,
                                                     base.density,
                                                     base.momentum, rho_a)};
  if (xi >= lb) return {rho_b, integrate_rarefaction(model, family,
                                                     base.density,
                                                     base.momentum, rho_b)};
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (rho_a + rho_b);
    if (mid == rho_a || mid == rho_b) break;
    (lambda_at(mid) < xi ? rho_a : rho_b) = mid;
  }
  const double rho = 0.5 * (rho_a + rho_b);
  return {rho,
          integrate_rarefaction(model, family, base.density, base.momentum, rho)};
}

}  // namespace

FluidState lax_curve(const PipeModel& model, int family,
                     const FluidState& base, double sigma, WaveSide side) {
  if (family != 1 && family != 2)
    fail(ErrorCode::BadScenario, "wave family must be 1 or 2");
  require_positive_density(model, base, "lax_curve base");
  const FluidState out = curve_point(model, family, base, sigma, side);
  if (!is_subsonic(model, out))
    fail(ErrorCode::LeftSubsonicRegion, "lax_curve left the subsonic region");
  return out;
}

double shock_speed(const FluidState& u_minus, const FluidState& u_plus) {
  const double drho = u_plus.density - u_minus.density;
  if (drho == 0.0)
    fail(ErrorCode::NoSolution, "shock_speed needs a density jump");
  return (u_plus.momentum - u_minus.momentum) / drho;
}

WaveFan solve_riemann(const PipeModel& model, const FluidState& uL,
                      const FluidState& uR) {
  require_positive_density(model, uL, "solve_riemann left state");
  require_positive_density(model, uR, "solve_riemann right state");

  WaveFan fan;
  fan.left = uL;
  fan.right = uR;

  if (uL.density == uR.density && uL.momentum == uR.momentum) {
    fan.middle = uL;
    const auto lam = eigenvalues(model, uL);
    fan.speed_min = {lam[0], lam[1]};
    fan.speed_max = {lam[0], lam[1]};
    return fan;
  }

  NewtonResult sol = newton_two_waves(model, uL, uR);
  if (!sol.ok) {
    sol = bisect_middle(model, uL, uR);
    if (!sol.ok)
      fail(ErrorCode::NoSolution, "riemann middle state not found");
  }
  const double scale =
      1.0 + std::max({std::abs(uL.density), std::abs(uL.momentum),
                      std::abs(uR.density), std::abs(uR.momentum)});
  if (sol.residual > 1e-10 * scale)
    fail(ErrorCode::NoSolution, "riemann solve did not converge");
  if (!(sol.middle.density >= model.rho_min) || !is_subsonic(model, sol.middle))
    fail(ErrorCode::NoSolution, "riemann middle state left the subsonic region");

  fan.middle = sol.middle;
  fan.sigma = sol.sigma;

  const FluidState* edge_l[2] = {&fan.left, &fan.middle};
  const FluidState* edge_r[2] = {&fan.middle, &fan.right};
  for (int w = 0; w < 2; ++w) {
    const int family = w + 1;
    if (std::abs(fan.sigma[w]) <= kNullSigma * scale) {
      fan.sigma[w] = 0.0;
      fan.kind[w] = WaveKind::Null;
      const double lam = lambda_family(model, family, edge_l[w]->density,
                                       edge_l[w]->momentum);
      fan.speed_min[w] = lam;
      fan.speed_max[w] = lam;
    } else if (fan.sigma[w] > 0.0) {
      fan.kind[w] = WaveKind::Rarefaction;
      fan.speed_min[w] = lambda_family(model, family, edge_l[w]->density,
                                       edge_l[w]->momentum);
      fan.speed_max[w] = lambda_family(model, family, edge_r[w]->density,
                                       edge_r[w]->momentum);
    } else {
      fan.kind[w] = WaveKind::Shock;
      const double s = shock_speed(*edge_l[w], *edge_r[w]);
      fan.speed_min[w] = s;
      fan.speed_max[w] = s;
    }
  }
  return fan;
}

FluidState sample_riemann(const PipeModel& model, const WaveFan& fan,
                          double xi) {
  // 1-wave region
  if (fan.kind[0] != WaveKind::Null) {
    if (xi < fan.speed_min[0]) return fan.left;
    if (fan.kind[0] == WaveKind::Rarefaction && xi <= fan.speed_max[0])
      return rarefaction_state_at(model, 1, fan.left, fan.middle, xi);
    if (fan.kind[0] == WaveKind::Shock && xi < fan.speed_max[0])
      return fan.left;
  } else if (xi < fan.speed_min[0]) {
    return fan.left;
  }
  // middle region
  if (xi < fan.speed_min[1]) return fan.middle;
  if (fan.kind[1] == WaveKind::Rarefaction && xi <= fan.speed_max[1])
    return rarefaction_state_at(model, 2, fan.middle, fan.right, xi);
  return fan.right;
}

std::array<double, 2> decompose(const PipeModel& model,
                                const FluidState& u_minus,
                                const FluidState& u_plus) {
  if (u_minus.density == u_plus.density && u_minus.momentum == u_plus.momentum)
    return {0.0, 0.0};
  return solve_riemann(model, u_minus, u_plus).sigma;
}

}  // namespace pipenet
