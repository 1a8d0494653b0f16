#include "pipenet/junction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pipenet {

namespace {

using Matrix = std::vector<std::vector<double>>;

double det_gauss(Matrix a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) return 0.0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return det;
}

// Solves a x = b in place; returns false on a vanishing pivot.
bool solve_gauss(Matrix a, std::vector<double> b, std::vector<double>* x) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x->assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * (*x)[c];
    (*x)[r] = s / a[r][r];
  }
  return true;
}

double norm_inf(const Matrix& a) {
  double best = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

// ||A||_inf * ||A^-1||_inf, infinity when singular.
double condition_estimate(const Matrix& a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> e(n, 0.0), col;
    e[k] = 1.0;
    if (!solve_gauss(a, e, &col))
      return std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n; ++r) inv[r][k] = col[r];
  }
  return norm_inf(a) * norm_inf(inv);
}

double norm_inf_vec(const std::vector<double>& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

}  // namespace

void CouplingCondition::validate(const std::vector<PipeModel>& pipes) const {
  const std::size_t n = n_pipes();
  if (n < 2) fail(ErrorCode::BadScenario, "junction needs at least two pipes");
  if (pipes.size() != n || reference.size() != n)
    fail(ErrorCode::BadScenario, "pipe/reference count mismatch");
  switch (variant) {
    case CouplingVariant::Compressor:
    case CouplingVariant::UnderflowGate:
    case CouplingVariant::PumpingStation:
      if (n != 2) fail(ErrorCode::BadScenario, "this coupling is a 2-pipe device");
      break;
    case CouplingVariant::MultiValve:
      break;
  }
  if (variant == CouplingVariant::Compressor && gamma <= 1.0)
    fail(ErrorCode::BadScenario, "compressor coupling needs gamma > 1");
  for (double b : widths)
    if (!(b > 0.0)) fail(ErrorCode::BadScenario, "pipe widths must be positive");
  for (std::size_t l = 0; l < n; ++l)
    if (!is_subsonic(pipes[l], reference[l]))
      fail(ErrorCode::BadScenario, "reference state must be subsonic");
  if (transversality_det(*this, pipes, reference) == 0.0)
    fail(ErrorCode::NonTransversal, "reference state is not transversal");
}

std::vector<double> psi(const CouplingCondition& cond,
                        const std::vector<PipeModel>& pipes,
                        const std::vector<FluidState>& u) {
  const std::size_t n = cond.n_pipes();
  std::vector<double> out(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    require_positive_density(pipes[l], u[l], "psi");
    out[0] += cond.widths[l] * u[l].momentum;
  }
  switch (cond.variant) {
    case CouplingVariant::Compressor: {
      const double p1 = pressure(pipes[0].law, u[0].density);
      const double p2 = pressure(pipes[1].law, u[1].density);
      const double beta = (cond.gamma - 1.0) / cond.gamma;
      out[1] = u[1].momentum * (std::pow(p2 / p1, beta) - 1.0);
      break;
    }
    case CouplingVariant::UnderflowGate: {
      const double dh = u[0].density - u[1].density;
      if (dh == 0.0)
        fail(ErrorCode::GateEqualHeights, "gate needs H1 != H2");
      out[1] = u[0].momentum * u[0].momentum / dh;
      break;
    }
    case CouplingVariant::MultiValve:
      for (std::size_t k = 1; k < n; ++k) out[k] = u[k - 1].momentum;
      break;
    case CouplingVariant::PumpingStation:
      out[1] = u[0].density - u[1].density;
      break;
  }
  return out;
}

std::vector<std::array<double, 2>> dpsi(const CouplingCondition& cond,
                                        const std::vector<PipeModel>& pipes,
                                        const std::vector<FluidState>& u,
                                        std::size_t l) {
  const std::size_t n = cond.n_pipes();
  std::vector<std::array<double, 2>> J(n, {0.0, 0.0});
  J[0] = {0.0, cond.widths[l]};
  switch (cond.variant) {
    case CouplingVariant::Compressor: {
      const double p1 = pressure(pipes[0].law, u[0].density);
      const double p2 = pressure(pipes[1].law, u[1].density);
      const double beta = (cond.gamma - 1.0) / cond.gamma;
      const double A = std::pow(p2 / p1, beta);
      if (l == 0) {
        const double dp1 = pressure_derivative(pipes[0].law, u[0].density);
        J[1] = {-u[1].momentum * A * beta * dp1 / p1, 0.0};
      } else {
        const double dp2 = pressure_derivative(pipes[1].law, u[1].density);
        J[1] = {u[1].momentum * A * beta * dp2 / p2, A - 1.0};
      }
      break;
    }
    case CouplingVariant::UnderflowGate: {
      const double dh = u[0].density - u[1].density;
      if (dh == 0.0) fail(ErrorCode::GateEqualHeights, "gate needs H1 != H2");
      const double Q1 = u[0].momentum;
      if (l == 0)
        J[1] = {-Q1 * Q1 / (dh * dh), 2.0 * Q1 / dh};
      else
        J[1] = {Q1 * Q1 / (dh * dh), 0.0};
      break;
    }
    case CouplingVariant::MultiValve:
      if (l < n - 1) J[l + 1] = {0.0, 1.0};
      break;
    case CouplingVariant::PumpingStation:
      J[1] = {l == 0 ? 1.0 : -1.0, 0.0};
      break;
  }
  return J;
}

namespace {

Matrix transversality_matrix(const CouplingCondition& cond,
                             const std::vector<PipeModel>& pipes,
                             const std::vector<FluidState>& u, bool fd) {
  const std::size_t n = cond.n_pipes();
  Matrix M(n, std::vector<double>(n, 0.0));
  for (std::size_t l = 0; l < n; ++l) {
    const double lam2 = eigenvalues(pipes[l], u[l])[1];
    if (!fd) {
      const auto Jl = dpsi(cond, pipes, u, l);
      for (std::size_t k = 0; k < n; ++k)
        M[k][l] = Jl[k][0] + lam2 * Jl[k][1];
    } else {
      const double hr = 1e-6 * (1.0 + std::abs(u[l].density));
      const double hq = 1e-6 * (1.0 + std::abs(u[l].momentum));
      auto up = u, um = u;
      up[l].density += hr;
      um[l].density -= hr;
      const auto fr_p = psi(cond, pipes, up), fr_m = psi(cond, pipes, um);
      up = u;
      um = u;
      up[l].momentum += hq;
      um[l].momentum -= hq;
      const auto fq_p = psi(cond, pipes, up), fq_m = psi(cond, pipes, um);
      for (std::size_t k = 0; k < n; ++k) {
        const double d_rho = (fr_p[k] - fr_m[k]) / (2.0 * hr);
        const double d_q = (fq_p[k] - fq_m[k]) / (2.0 * hq);
        M[k][l] = d_rho + lam2 * d_q;
      }
    }
  }
  return M;
}

}  // namespace

double transversality_det(const CouplingCondition& cond,
                          const std::vector<PipeModel>& pipes,
                          const std::vector<FluidState>& u) {
  return det_gauss(transversality_matrix(cond, pipes, u, false));
}

double transversality_det_fd(const CouplingCondition& cond,
                             const std::vector<PipeModel>& pipes,
                             const std::vector<FluidState>& u) {
  return det_gauss(transversality_matrix(cond, pipes, u, true));
}

JunctionSolution solve_junction_riemann(const CouplingCondition& cond,
                                        const std::vector<PipeModel>& pipes,
                                        const std::vector<FluidState>& boundary_states,
                                        const std::vector<double>& Pi,
                                        double tol,
                                        const std::vector<double>& initial_sigma) {
  const std::size_t n = cond.n_pipes();
  if (boundary_states.size() != n || Pi.size() != n)
    fail(ErrorCode::BadScenario, "junction data size mismatch");
  if (!initial_sigma.empty() && initial_sigma.size() != n)
    fail(ErrorCode::BadScenario, "initial sigma size mismatch");
  for (std::size_t l = 0; l < n; ++l)
    if (!is_subsonic(pipes[l], boundary_states[l]))
      fail(ErrorCode::LeftSubsonicRegion, "boundary state is not subsonic");
  if (cond.variant == CouplingVariant::Compressor && Pi[1] < 0.0)
    fail(ErrorCode::InvalidControl, "compressor power must be nonnegative");

  double scale = 1.0;
  for (double p : Pi) scale = std::max(scale, std::abs(p));

  std::vector<double> sigma =
      initial_sigma.empty() ? std::vector<double>(n, 0.0) : initial_sigma;
  std::vector<FluidState> traces;
  std::vector<double> residual;

  const auto eval = [&](const std::vector<double>& s,
                        std::vector<FluidState>* tr,
                        std::vector<double>* r) -> bool {
    try {
      tr->resize(n);
      for (std::size_t l = 0; l < n; ++l)
        (*tr)[l] = lax_curve(pipes[l], 2, boundary_states[l], s[l], WaveSide::Right);
      *r = psi(cond, pipes, *tr);
      for (std::size_t k = 0; k < n; ++k) (*r)[k] -= Pi[k];
      return true;
    } catch (const SolverError&) {
      return false;
    }
  };

  if (!eval(sigma, &traces, &residual))
    fail(ErrorCode::NoSolution, "junction residual undefined at the datum");
  double res = norm_inf_vec(residual);
  double best_res = res;
  auto best_sigma = sigma;
  auto best_traces = traces;

  for (int it = 0; it < 60 && res > 1e-13 * scale; ++it) {
    // Column l of the Jacobian: D_l Psi at the traces times the tangent of
    // the reverse 2-curve, the latter by central differences.
    Matrix J(n, std::vector<double>(n, 0.0));
    bool jac_ok = true;
    for (std::size_t l = 0; l < n && jac_ok; ++l) {
      const double h = 1e-7 * (1.0 + std::abs(sigma[l]));
      try {
        const FluidState tp =
            lax_curve(pipes[l], 2, boundary_states[l], sigma[l] + h, WaveSide::Right);
        const FluidState tm =
            lax_curve(pipes[l], 2, boundary_states[l], sigma[l] - h, WaveSide::Right);
        const double d_rho = (tp.density - tm.density) / (2.0 * h);
        const double d_q = (tp.momentum - tm.momentum) / (2.0 * h);
        const auto Dl = dpsi(cond, pipes, traces, l);
        for (std::size_t k = 0; k < n; ++k)
          J[k][l] = Dl[k][0] * d_rho + Dl[k][1] * d_q;
      } catch (const SolverError&) {
        jac_ok = false;
      }
    }
    if (!jac_ok) break;
    if (condition_estimate(J) > 1e8)
      fail(ErrorCode::NonTransversal, "junction Jacobian is ill conditioned");

    std::vector<double> rhs(n), delta;
    for (std::size_t k = 0; k < n; ++k) rhs[k] = -residual[k];
    if (!solve_gauss(J, rhs, &delta))
      fail(ErrorCode::NonTransversal, "junction Jacobian is singular");

    double eta = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      std::vector<double> trial(n);
      for (std::size_t l = 0; l < n; ++l) trial[l] = sigma[l] + eta * delta[l];
      std::vector<FluidState> tr;
      std::vector<double> r;
      if (eval(trial, &tr, &r)) {
        const double rt = norm_inf_vec(r);
        if (rt < res) {
          sigma = trial;
          traces = tr;
          residual = r;
          res = rt;
          accepted = true;
          break;
        }
      }
      eta *= 0.5;
    }
    if (!accepted) break;
    if (res < best_res) {
      best_res = res;
      best_sigma = sigma;
      best_traces = traces;
    }
  }

  if (best_res > tol * scale)
    fail(ErrorCode::NoConvergence, "junction Newton did not reach tolerance");

  JunctionSolution out;
  out.traces = best_traces;
  out.sigmas = best_sigma;
  out.residual = best_res;
  return out;
}

LipschitzProbe junction_lipschitz_probe(const CouplingCondition& cond,
                                        const std::vector<PipeModel>& pipes,
                                        const std::vector<FluidState>& states_a,
                                        const std::vector<double>& Pi_a,
                                        const std::vector<FluidState>& states_b,
                                        const std::vector<double>& Pi_b) {
  double den = 0.0;
  for (std::size_t l = 0; l < states_a.size(); ++l)
    den += norm1(states_a[l] - states_b[l]);
  for (std::size_t k = 0; k < Pi_a.size(); ++k)
    den += std::abs(Pi_a[k] - Pi_b[k]);
  LipschitzProbe probe;
  if (den == 0.0) return probe;

  const auto sol_a = solve_junction_riemann(cond, pipes, states_a, Pi_a);
  const auto sol_b = solve_junction_riemann(cond, pipes, states_b, Pi_b);
  double dtr = 0.0, dsg = 0.0;
  for (std::size_t l = 0; l < sol_a.traces.size(); ++l) {
    dtr += norm1(sol_a.traces[l] - sol_b.traces[l]);
    dsg += std::abs(sol_a.sigmas[l] - sol_b.sigmas[l]);
  }
  probe.trace_ratio = dtr / den;
  probe.sigma_ratio = dsg / den;
  return probe;
}

}  // namespace pipenet
