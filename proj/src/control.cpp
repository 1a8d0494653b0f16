#include "pipenet/control.hpp"

#include <algorithm>
#include <cmath>

namespace pipenet {

const std::vector<double>& ControlSchedule::value_at(double t) const {
  std::size_t k = 0;
  while (k < breakpoints.size() && t >= breakpoints[k]) ++k;
  return values[k];
}

double ControlSchedule::total_variation() const {
  double tv = 0.0;
  for (std::size_t k = 0; k + 1 < values.size(); ++k)
    for (std::size_t c = 0; c < values[k].size(); ++c)
      tv += std::abs(values[k + 1][c] - values[k][c]);
  return tv;
}

double ControlSchedule::total_variation_from(double t) const {
  double tv = 0.0;
  const std::vector<double>* prev = &value_at(t);
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (breakpoints[k] <= t) continue;
    const auto& next = values[k + 1];
    for (std::size_t c = 0; c < next.size(); ++c)
      tv += std::abs(next[c] - (*prev)[c]);
    prev = &values[k + 1];
  }
  return tv;
}

double ControlSchedule::l1_distance(const ControlSchedule& other,
                                    double t_end) const {
  // Merge the two breakpoint sets; the integrand is constant between them.
  std::vector<double> cuts{0.0};
  for (double b : breakpoints)
    if (b < t_end) cuts.push_back(b);
  for (double b : other.breakpoints)
    if (b < t_end) cuts.push_back(b);
  cuts.push_back(t_end);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (len <= 0.0) continue;
    const double t_mid = 0.5 * (cuts[k] + cuts[k + 1]);
    const auto& a = value_at(t_mid);
    const auto& b = other.value_at(t_mid);
    double gap = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) gap += std::abs(a[c] - b[c]);
    total += len * gap;
  }
  return total;
}

double ControlSchedule::sup_norm() const {
  double best = 0.0;
  for (const auto& v : values) {
    double n = 0.0;
    for (double x : v) n += std::abs(x);
    best = std::max(best, n);
  }
  return best;
}

void ControlSchedule::validate() const {
  if (values.empty()) fail(ErrorCode::InvalidControl, "empty schedule");
  if (values.size() != breakpoints.size() + 1)
    fail(ErrorCode::InvalidControl, "values must be breakpoints+1 entries");
  const std::size_t n = values.front().size();
  for (const auto& v : values)
    if (v.size() != n)
      fail(ErrorCode::InvalidControl, "ragged control values");
  double prev = 0.0;
  for (double b : breakpoints) {
    if (b <= prev || b >= horizon)
      fail(ErrorCode::InvalidControl, "breakpoints must increase in (0, horizon)");
    prev = b;
  }
  if (!(horizon > 0.0)) fail(ErrorCode::InvalidControl, "horizon must be positive");
}

ControlSchedule constant_control(double horizon, std::vector<double> value) {
  ControlSchedule s;
  s.horizon = horizon;
  s.values = {std::move(value)};
  return s;
}

}  // namespace pipenet
