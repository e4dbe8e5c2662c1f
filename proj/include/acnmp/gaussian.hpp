#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "acnmp/net.hpp"

namespace acnmp {

inline constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // 0.5 * ln(2*pi)

/// Effective spread of a prediction head: softplus keeps it positive, the
/// floor keeps the likelihood bounded when the model overfits early.
inline double effective_sigma(double sigma_raw, double sigma_floor) {
  return softplus(sigma_raw) + sigma_floor;
}

/// Diagonal Gaussian negative log-likelihood,
///   sum_d [ ln sigma_d + 0.5 ln(2 pi) + (target_d - mu_d)^2 / (2 sigma_d^2) ],
/// with sigma_d = softplus(sigma_raw_d) + sigma_floor.
inline double gaussian_nll(const std::vector<double>& mu, const std::vector<double>& sigma_raw,
                           const std::vector<double>& target, double sigma_floor = 1e-4) {
  if (mu.size() != sigma_raw.size() || mu.size() != target.size())
    throw std::invalid_argument("gaussian_nll: length mismatch");
  double loss = 0.0;
  for (std::size_t d = 0; d < mu.size(); ++d) {
    const double sigma = effective_sigma(sigma_raw[d], sigma_floor);
    const double z = (target[d] - mu[d]) / sigma;
    loss += std::log(sigma) + kHalfLogTwoPi + 0.5 * z * z;
  }
  return loss;
}

/// Same value as gaussian_nll, also filling the analytic gradients with
/// respect to mu and to the raw (pre-softplus) sigma.
inline double gaussian_nll_grad(const std::vector<double>& mu,
                                const std::vector<double>& sigma_raw,
                                const std::vector<double>& target, double sigma_floor,
                                std::vector<double>& dmu, std::vector<double>& dsigma_raw) {
  if (mu.size() != sigma_raw.size() || mu.size() != target.size())
    throw std::invalid_argument("gaussian_nll_grad: length mismatch");
  dmu.assign(mu.size(), 0.0);
  dsigma_raw.assign(mu.size(), 0.0);
  double loss = 0.0;
  for (std::size_t d = 0; d < mu.size(); ++d) {
    const double sigma = effective_sigma(sigma_raw[d], sigma_floor);
    const double diff = target[d] - mu[d];
    const double z = diff / sigma;
    loss += std::log(sigma) + kHalfLogTwoPi + 0.5 * z * z;
    dmu[d] = -diff / (sigma * sigma);
    const double dsigma = 1.0 / sigma - diff * diff / (sigma * sigma * sigma);
    dsigma_raw[d] = dsigma * sigmoid(sigma_raw[d]);
  }
  return loss;
}

/// Log-density of a diagonal Gaussian at x (sigma already effective).
inline double gaussian_logpdf(const std::vector<double>& x, const std::vector<double>& mu,
                              const std::vector<double>& sigma) {
  if (x.size() != mu.size() || x.size() != sigma.size())
    throw std::invalid_argument("gaussian_logpdf: length mismatch");
  double lp = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double z = (x[d] - mu[d]) / sigma[d];
    lp -= std::log(sigma[d]) + kHalfLogTwoPi + 0.5 * z * z;
  }
  return lp;
}

}  // namespace acnmp
