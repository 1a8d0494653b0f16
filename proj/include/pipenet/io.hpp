#pragma once

#include <string>

#include "pipenet/functionals.hpp"
#include "pipenet/netsolver.hpp"
#include "pipenet/optimize.hpp"

namespace pipenet {

// Full-precision decimal rendering (17 significant digits) so CSV output
// reparses to the same doubles.
std::string fmt17(double x);

void write_trajectory_csv(const std::string& path, const NetworkModel& model,
                          const Trajectory& traj);

void write_functional_series_csv(const std::string& path,
                                 const NetworkModel& model,
                                 const Trajectory& traj,
                                 const ControlSchedule& control,
                                 const FunctionalConfig& cfg);

void write_junction_csv(const std::string& path, const Trajectory& traj);

void write_optimization_csv(const std::string& path, const OptResult& result);

}  // namespace pipenet
