#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace acnmp {

/// One demonstrated or generated movement: ordered (time, sensorimotor
/// vector) samples with time normalized to [0,1]. Sample times are private
/// to the trajectory; different trajectories may use entirely different,
/// non-uniform grids.
struct Trajectory {
  std::string id;
  std::vector<double> task_params;             // gamma, possibly empty
  std::vector<double> times;                   // strictly increasing, in [0,1]
  std::vector<std::vector<double>> values;     // one sm vector per time

  std::size_t size() const { return times.size(); }
  int sm_width() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }

  void validate() const {
    if (times.size() != values.size())
      throw std::invalid_argument("trajectory " + id + ": times/values length mismatch");
    if (times.size() < 2) throw std::invalid_argument("trajectory " + id + ": needs >= 2 points");
    const std::size_t width = values.front().size();
    if (width == 0) throw std::invalid_argument("trajectory " + id + ": empty sm vectors");
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k] < 0.0 || times[k] > 1.0)
        throw std::invalid_argument("trajectory " + id + ": time outside [0,1]");
      if (k > 0 && times[k] <= times[k - 1])
        throw std::invalid_argument("trajectory " + id + ": times not strictly increasing");
      if (values[k].size() != width)
        throw std::invalid_argument("trajectory " + id + ": inconsistent sm width");
    }
  }

  /// Linear interpolation between samples, clamped at the ends.
  std::vector<double> value_at(double t) const {
    if (times.empty()) throw std::logic_error("value_at on empty trajectory");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    std::vector<double> out(values[lo].size());
    for (std::size_t d = 0; d < out.size(); ++d)
      out[d] = (1.0 - w) * values[lo][d] + w * values[hi][d];
    return out;
  }
};

/// Homogeneous collection of trajectories: equal sm width and equal
/// task-parameter width across members.
struct DemonstrationSet {
  std::vector<Trajectory> trajectories;
  int sm_width = 0;
  int gamma_width = 0;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }

  void add(Trajectory traj) {
    traj.validate();
    if (trajectories.empty()) {
      sm_width = traj.sm_width();
      gamma_width = static_cast<int>(traj.task_params.size());
    } else {
      if (traj.sm_width() != sm_width)
        throw std::invalid_argument("demonstration set: sm width mismatch for " + traj.id);
      if (static_cast<int>(traj.task_params.size()) != gamma_width)
        throw std::invalid_argument("demonstration set: gamma width mismatch for " + traj.id);
    }
    trajectories.push_back(std::move(traj));
  }
};

inline DemonstrationSet make_demo_set(std::vector<Trajectory> trajectories) {
  DemonstrationSet set;
  for (auto& t : trajectories) set.add(std::move(t));
  if (set.empty()) throw std::invalid_argument("demonstration set: empty");
  return set;
}

/// n uniformly spaced times covering [0,1] inclusive.
inline std::vector<double> uniform_grid(int n) {
  if (n < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = static_cast<double>(i) / (n - 1);
  return t;
}

}  // namespace acnmp
