#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "grazing/error.hpp"
#include "grazing/particle_cloud.hpp"
#include "grazing/transport_metrics.hpp"

namespace grazing {

struct Diagnostics {
  double t = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  double entropy = 0.0;  ///< kNN estimate of int f log f; NaN when N < 5
  double max_speed = 0.0;
  std::size_t events = 0;  ///< accepted collisions since the previous snapshot
};

inline Diagnostics diagnose(const ParticleCloud& c, std::size_t events = 0, bool with_entropy = true) {
  Diagnostics d;
  d.t = c.time;
  d.m2 = moment(c.v, 2.0);
  d.m4 = moment(c.v, 4.0);
  d.entropy = with_entropy && c.size() >= 5 ? entropy_knn(c.v) : std::numeric_limits<double>::quiet_NaN();
  d.max_speed = max_speed(c.v);
  d.events = events;
  return d;
}

struct Snapshot {
  double t = 0.0;
  std::vector<Vec3> v;
  Diagnostics diag;
};

using Trajectory = std::vector<Snapshot>;

/// Validates a snapshot schedule against the horizon and returns it sorted.
inline std::vector<double> check_schedule(std::vector<double> schedule, double T) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw ParameterError("horizon T must be finite and >= 0");
  if (schedule.empty()) schedule = {0.0, T};
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  for (double t : schedule)
    if (t < 0.0 || t > T) throw ParameterError("snapshot times must lie in [0, T]");
  return schedule;
}

/// Evenly spaced schedule 0, T/k, ..., T.
inline std::vector<double> uniform_schedule(double T, int k) {
  std::vector<double> s;
  if (T == 0.0 || k < 1) return {0.0};
  for (int i = 0; i <= k; ++i) s.push_back(T * i / k);
  return s;
}

/// Drives step(cloud, h) -> events up to each snapshot time; the last step
/// before a snapshot is shortened so snapshots fall exactly on the schedule.
template <class StepFn>
Trajectory drive(ParticleCloud cloud, const std::vector<double>& schedule, double dt, StepFn&& step,
                 bool with_entropy = true) {
  Trajectory out;
  std::size_t events = 0;
  for (double target : schedule) {
    while (cloud.time < target) {
      const double remaining = target - cloud.time;
      const double h = remaining <= dt * (1.0 + 1e-9) ? remaining : dt;
      events += step(cloud, h);
      cloud.time = h == remaining ? target : cloud.time + h;
      ++cloud.step;
    }
    out.push_back({cloud.time, cloud.v, diagnose(cloud, events, with_entropy)});
    events = 0;
  }
  return out;
}

}  // namespace grazing
