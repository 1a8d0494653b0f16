#pragma once

#include <vector>

#include "pipenet/errors.hpp"

namespace pipenet {

// Piecewise-constant boundary control Pi on [0, horizon]: values[k] holds on
// [breakpoints[k-1], breakpoints[k]) with breakpoints[-1] = 0 and the last
// value holding up to the horizon. Each value is an n-vector matching the
// coupling map.
struct ControlSchedule {
  double horizon = 1.0;
  std::vector<double> breakpoints;            // strictly increasing, inside (0, horizon)
  std::vector<std::vector<double>> values;    // breakpoints.size() + 1 entries

  std::size_t components() const { return values.empty() ? 0 : values.front().size(); }

  // Right-continuous evaluation; the trailing value persists past the last
  // breakpoint (and past the horizon, for callers that overrun it).
  const std::vector<double>& value_at(double t) const;

  // Sum over interior breakpoints of the 1-norm of the value jump.
  double total_variation() const;

  // Variation remaining after time t (the translated trace's variation).
  double total_variation_from(double t) const;

  // Integral over [0, min(t_end, horizon)] of the 1-norm distance to
  // another schedule with the same component count.
  double l1_distance(const ControlSchedule& other, double t_end) const;

  // max over intervals of the 1-norm of the value (L-infinity in time).
  double sup_norm() const;

  void validate() const;
};

ControlSchedule constant_control(double horizon, std::vector<double> value);

}  // namespace pipenet
