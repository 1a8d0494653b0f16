#include "pipenet/functionals.hpp"

#include <algorithm>
#include <cmath>

namespace pipenet {

std::vector<std::vector<WaveRecord>> wave_decomposition(
    const NetworkModel& model, const NetworkState& state) {
  const std::size_t n = model.n_pipes();
  std::vector<std::vector<WaveRecord>> waves(n);

  std::vector<FluidState> boundary(n);
  for (std::size_t l = 0; l < n; ++l) boundary[l] = state.cells[l].front();
  const auto junction = solve_junction_riemann(
      model.coupling, model.pipes, boundary,
      state.control.value_at(state.time));

  for (std::size_t l = 0; l < n; ++l) {
    waves[l].push_back({0.0, 2, junction.sigmas[l]});
    const auto& cells = state.cells[l];
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
      const auto s = decompose(model.pipes[l], cells[i], cells[i + 1]);
      const double x = (i + 1) * model.grid.dx;
      if (s[0] != 0.0) waves[l].push_back({x, 1, s[0]});
      if (s[1] != 0.0) waves[l].push_back({x, 2, s[1]});
    }
  }
  return waves;
}

double tv_u(const NetworkState& state) { return grid_tv(state.cells); }

double tv_pi(const ControlSchedule& control, double from_time) {
  return control.total_variation_from(from_time);
}

double tv_p(const NetworkModel& model, const NetworkState& state) {
  return network_tv(model, state);
}

namespace {

double v_functional(const std::vector<std::vector<WaveRecord>>& waves,
                    const FunctionalConfig& cfg) {
  double V = 0.0;
  for (const auto& pipe : waves)
    for (const auto& w : pipe)
      V += (w.family == 1 ? 2.0 * cfg.K_J : 1.0) * std::abs(w.sigma);
  return V;
}

bool approaching(const WaveRecord& a, const WaveRecord& b) {
  const WaveRecord& lead = a.position <= b.position ? b : a;
  const WaveRecord& rear = a.position <= b.position ? a : b;
  if (rear.family > lead.family) return true;  // 2-wave behind a 1-wave
  if (rear.family == lead.family)
    return rear.is_shock() || lead.is_shock();  // GNL same-family pair
  return false;
}

double q_functional(const std::vector<std::vector<WaveRecord>>& waves) {
  double Q = 0.0;
  for (const auto& pipe : waves)
    for (std::size_t a = 0; a < pipe.size(); ++a)
      for (std::size_t b = a + 1; b < pipe.size(); ++b)
        if (approaching(pipe[a], pipe[b]))
          Q += std::abs(pipe[a].sigma * pipe[b].sigma);
  return Q;
}

}  // namespace

double glimm_V(const NetworkModel& model, const NetworkState& state,
               const FunctionalConfig& cfg) {
  return v_functional(wave_decomposition(model, state), cfg);
}

double glimm_Q(const NetworkModel& model, const NetworkState& state,
               const FunctionalConfig& /*cfg*/) {
  return q_functional(wave_decomposition(model, state));
}

double upsilon(const NetworkModel& model, const NetworkState& state,
               const FunctionalConfig& cfg) {
  const auto waves = wave_decomposition(model, state);
  return v_functional(waves, cfg) +
         cfg.K_hat * tv_pi(state.control, state.time) +
         cfg.K_check * q_functional(waves);
}

double stability_phi(const NetworkModel& model, const NetworkState& a,
                     const NetworkState& b, const FunctionalConfig& cfg) {
  if (a.cells.size() != b.cells.size())
    fail(ErrorCode::BadScenario, "stability_phi needs matching networks");

  const auto waves_a = wave_decomposition(model, a);
  const auto waves_b = wave_decomposition(model, b);
  const double ups =
      cfg.kappa1 * cfg.kappa2 *
      (upsilon(model, a, cfg) + upsilon(model, b, cfg));

  double phi = 0.0;
  for (std::size_t l = 0; l < model.n_pipes(); ++l) {
    const auto& ua = a.cells[l];
    const auto& ub = b.cells[l];
    for (std::size_t i = 0; i < ua.size(); ++i) {
      const auto q = decompose(model.pipes[l], ua[i], ub[i]);
      if (q[0] == 0.0 && q[1] == 0.0) continue;
      const double x = model.grid.center(static_cast<int>(i));

      for (int fam = 1; fam <= 2; ++fam) {
        const double qi = q[fam - 1];
        if (qi == 0.0) continue;
        // Cross-family approaching waves of both states.
        double A = 0.0;
        for (const auto* waves : {&waves_a[l], &waves_b[l]})
          for (const auto& w : *waves)
            if ((w.position < x && w.family > fam) ||
                (w.position > x && w.family < fam))
              A += std::abs(w.sigma);
        // Same-family part: the sign of q_i selects which state's waves
        // count ahead and behind.
        const auto& ahead = qi < 0.0 ? waves_a[l] : waves_b[l];
        const auto& behind = qi < 0.0 ? waves_b[l] : waves_a[l];
        for (const auto& w : ahead)
          if (w.position < x && w.family == fam) A += std::abs(w.sigma);
        for (const auto& w : behind)
          if (w.position > x && w.family == fam) A += std::abs(w.sigma);

        double W = 1.0 + cfg.kappa1 * A + ups;
        if (fam == 1) W *= cfg.K;
        phi += std::abs(qi) * W * model.grid.dx;
      }
    }
  }

  const double t0 = a.time;
  const double horizon = std::min(a.control.horizon, b.control.horizon);
  // Remaining-control L1 distance: shift both schedules' comparison window.
  double pi_gap = a.control.l1_distance(b.control, horizon);
  if (t0 > 0.0) pi_gap -= a.control.l1_distance(b.control, std::min(t0, horizon));
  return phi + cfg.K_bar * pi_gap;
}

namespace {

// Integral over [0, t_end] of c(t) * Pi_component(t) for piecewise-constant
// control, exact interval sums.
double control_time_integral(const ControlSchedule& ctl, std::size_t component,
                             double weight, double t_end, bool absolute) {
  double total = 0.0;
  double t0 = 0.0;
  for (std::size_t k = 0; k < ctl.values.size(); ++k) {
    const double t1 =
        k < ctl.breakpoints.size() ? ctl.breakpoints[k] : ctl.horizon;
    const double lo = t0;
    const double hi = std::min(t1, t_end);
    if (hi > lo) {
      const double v = ctl.values[k][component];
      total += weight * (absolute ? std::abs(v) : v) * (hi - lo);
    }
    t0 = t1;
    if (t0 >= t_end) break;
  }
  return total;
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

double compressor_j1(const NetworkModel& model, const Snapshot& snap,
                     const CostSpec& spec) {
  const std::size_t l = spec.observed_pipe(model.n_pipes());
  const PipeModel& pipe = model.pipes[l];
  double j1 = 0.0;
  for (int i = 0; i < model.grid.cells; ++i) {
    const double x0 = i * model.grid.dx;
    const double w = overlap(x0, x0 + model.grid.dx, spec.x_a, spec.x_b);
    if (w <= 0.0) continue;
    const double p = pressure(pipe.law, snap.cells[l][i].density);
    j1 += w * std::abs(p - spec.p_bar);
  }
  return j1;
}

double gate_j1(const NetworkModel& model, const Snapshot& snap,
               const CostSpec& spec) {
  const std::size_t l = spec.observed_pipe(model.n_pipes());
  double j1 = 0.0;
  const auto& cells = snap.cells[l];
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const double x = (i + 1) * model.grid.dx;
    j1 += spec.phi(x) * std::abs(cells[i + 1].density - cells[i].density);
  }
  return j1;
}

double overflow_j1(const NetworkModel& model, const Snapshot& snap,
                   const CostSpec& spec) {
  const std::size_t l = spec.observed_pipe(model.n_pipes());
  double j1 = 0.0;
  for (int i = 0; i < model.grid.cells; ++i) {
    const double x0 = i * model.grid.dx;
    const double w = overlap(x0, x0 + model.grid.dx, 0.0, spec.length);
    if (w <= 0.0) continue;
    const double excess = snap.cells[l][i].density - spec.h_bar;
    if (excess > 0.0) j1 += w * excess;
  }
  return j1;
}

}  // namespace

CostBreakdown cost_J(const NetworkModel& model, const Trajectory& traj,
                     const ControlSchedule& control, const CostSpec& spec) {
  CostBreakdown out;
  const double T = traj.snapshots.back().time;

  switch (spec.variant) {
    case CostVariant::CompressorTarget:
      out.J_o = control.total_variation() + control.sup_norm();
      break;
    case CostVariant::GateSmoothing:
      out.J_o = control_time_integral(control, 1, 1.0, T, true);
      break;
    // Valve openings and pump lifts are magnitudes; with the pipes
    // parametrized away from the junction the inflow components of Pi are
    // negative, so the operation cost integrates |u_i|.
    case CostVariant::ValveOverflow: {
      for (std::size_t k = 0; k < spec.c.size(); ++k)
        out.J_o += control_time_integral(control, k + 1, spec.c[k], T, true);
      break;
    }
    case CostVariant::PumpCost: {
      const double c0 = spec.c.empty() ? 1.0 : spec.c.front();
      out.J_o = control_time_integral(control, 1, c0, T, true);
      break;
    }
  }

  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const double dt = traj.snapshots[k + 1].time - traj.snapshots[k].time;
    double j1 = 0.0;
    switch (spec.variant) {
      case CostVariant::CompressorTarget:
        j1 = compressor_j1(model, traj.snapshots[k], spec);
        break;
      case CostVariant::GateSmoothing:
        j1 = gate_j1(model, traj.snapshots[k], spec);
        break;
      case CostVariant::ValveOverflow:
      case CostVariant::PumpCost:
        j1 = overflow_j1(model, traj.snapshots[k], spec);
        break;
    }
    out.J_1_integral += dt * j1;
  }
  out.total = out.J_o + out.J_1_integral;
  return out;
}

}  // namespace pipenet
