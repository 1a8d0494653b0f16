#include "pipenet/io.hpp"

#include <cstdio>
#include <fstream>

namespace pipenet {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_or_fail(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::BadScenario, "cannot write " + path);
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const NetworkModel& model,
                          const Trajectory& traj) {
  auto out = open_or_fail(path);
  out << "t,pipe,x,density,momentum\n";
  for (const auto& snap : traj.snapshots)
    for (std::size_t l = 0; l < snap.cells.size(); ++l)
      for (int i = 0; i < model.grid.cells; ++i)
        out << fmt17(snap.time) << ',' << l << ','
            << fmt17(model.grid.center(i)) << ','
            << fmt17(snap.cells[l][i].density) << ','
            << fmt17(snap.cells[l][i].momentum) << '\n';
}

void write_functional_series_csv(const std::string& path,
                                 const NetworkModel& model,
                                 const Trajectory& traj,
                                 const ControlSchedule& control,
                                 const FunctionalConfig& cfg) {
  auto out = open_or_fail(path);
  out << "t,V,Q,Upsilon,TVu,junction_residual\n";
  for (const auto& snap : traj.snapshots) {
    NetworkState state{snap.time, snap.cells, control};
    const auto waves_V = glimm_V(model, state, cfg);
    const auto waves_Q = glimm_Q(model, state, cfg);
    const auto ups = upsilon(model, state, cfg);
    double residual = 0.0;
    for (const auto& rec : traj.steps)
      if (rec.t_start < snap.time) residual = rec.junction_residual;
    out << fmt17(snap.time) << ',' << fmt17(waves_V) << ',' << fmt17(waves_Q)
        << ',' << fmt17(ups) << ',' << fmt17(tv_u(state)) << ','
        << fmt17(residual) << '\n';
  }
}

void write_junction_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_or_fail(path);
  out << "t,dt,residual";
  if (!traj.steps.empty()) {
    for (std::size_t l = 0; l < traj.steps.front().sigmas.size(); ++l)
      out << ",sigma" << l + 1 << ",trace_density" << l + 1
          << ",trace_momentum" << l + 1;
  }
  out << '\n';
  for (const auto& rec : traj.steps) {
    out << fmt17(rec.t_start) << ',' << fmt17(rec.dt) << ','
        << fmt17(rec.junction_residual);
    for (std::size_t l = 0; l < rec.sigmas.size(); ++l)
      out << ',' << fmt17(rec.sigmas[l]) << ','
          << fmt17(rec.traces[l].density) << ','
          << fmt17(rec.traces[l].momentum);
    out << '\n';
  }
}

void write_optimization_csv(const std::string& path, const OptResult& result) {
  auto out = open_or_fail(path);
  out << "eval_index,J,J_o,J_1,best_so_far,accepted,feasible\n";
  for (const auto& rec : result.log)
    out << rec.index << ',' << fmt17(rec.J) << ',' << fmt17(rec.J_o) << ','
        << fmt17(rec.J_1) << ',' << fmt17(rec.best_so_far) << ','
        << (rec.accepted ? 1 : 0) << ',' << (rec.feasible ? 1 : 0) << '\n';
}

}  // namespace pipenet
