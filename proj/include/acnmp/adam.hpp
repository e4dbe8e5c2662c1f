#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "acnmp/net.hpp"

namespace acnmp {

/// Adam optimizer state for one parameter vector.
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline AdamState make_adam(std::size_t n, double learning_rate = 1e-4) {
  AdamState s;
  s.first_moment.assign(n, 0.0);
  s.second_moment.assign(n, 0.0);
  s.learning_rate = learning_rate;
  return s;
}

inline double global_norm(const GradientVector& g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

/// Scales the gradient in place so its global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
inline double clip_global_norm(GradientVector& g, double max_norm) {
  const double norm = global_norm(g);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& v : g) v *= scale;
  }
  return norm;
}

/// One bias-corrected Adam update. Returns false (and leaves params and
/// state untouched) when the gradient contains a non-finite entry.
inline bool adam_step(ParameterVector& params, const GradientVector& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size())
    throw std::invalid_argument("adam_step: length mismatch");
  for (double g : grads)
    if (!std::isfinite(g)) return false;

  state.step_count += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * grads[i];
    v = b2 * v + (1.0 - b2) * grads[i] * grads[i];
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
  return true;
}

}  // namespace acnmp
