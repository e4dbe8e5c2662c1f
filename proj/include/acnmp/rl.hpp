#pragma once

// Policy-gradient adaptation of a CNMP to task parameters outside the
// demonstrated range. The decoder's Gaussian heads double as the stochastic
// policy: roll-outs sample actions around the predicted means, an episodic
// likelihood-ratio gradient with a mean-reward baseline updates encoder and
// decoder, and supervised replay of the demonstrations is interleaved so the
// demonstrated shape survives the adaptation.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "acnmp/cnmp.hpp"

namespace acnmp {

/// The policy's conditioning context for one step: time plus task params.
struct Context {
  double t = 0.0;
  std::vector<double> gamma;
};

/// One sampled roll-out. Means and sigmas are the distribution parameters
/// used at sampling time (sigma includes the exploration scale); the reward
/// is terminal and set by the environment after the roll-out.
struct Episode {
  std::vector<ObservationPoint> conditioning;
  std::vector<double> gamma;
  std::vector<Context> contexts;
  std::vector<std::vector<double>> actions;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> sigmas;
  double exploration_scale = 1.0;
  double reward = 0.0;
  bool reward_set = false;

  void validate() const {
    const std::size_t n = contexts.size();
    if (n == 0 || actions.size() != n || means.size() != n || sigmas.size() != n)
      throw std::invalid_argument("episode: parallel lists must be non-empty and equal length");
    if (reward_set && !std::isfinite(reward))
      throw std::invalid_argument("episode: non-finite reward");
  }

  Trajectory as_trajectory(const std::string& id = "rollout") const {
    Trajectory traj;
    traj.id = id;
    traj.task_params = gamma;
    traj.times.reserve(contexts.size());
    for (const Context& c : contexts) traj.times.push_back(c.t);
    traj.values = actions;
    traj.validate();
    return traj;
  }
};

/// Hyperparameters of the adaptation loop.
struct AdaptConfig {
  int rollouts_per_update = 5;
  int max_rollouts = 200;
  double success_threshold = -0.05;
  int rl_steps = 1;  // policy-gradient batch updates per round
  int sl_steps = 1;  // supervised replay steps per round (0 = RL-only ablation)
  double exploration_scale = 1.0;
  std::uint64_t seed = 0;
  double pg_learning_rate = 1e-3;
  double sl_learning_rate = 1e-4;
  double clip_norm = 10.0;
  int n_max = 5;
  int query_points = 200;
  bool normalize_advantages = true;

  void validate() const {
    if (rollouts_per_update < 1 || max_rollouts < 1 || rl_steps < 1 || sl_steps < 0)
      throw std::invalid_argument("adapt config: bad step counts");
    if (exploration_scale <= 0.0)
      throw std::invalid_argument("adapt config: exploration_scale must be > 0");
    if (query_points < 2 || n_max < 1) throw std::invalid_argument("adapt config: bad sizes");
  }
};

/// Samples one roll-out: actions are drawn independently per dimension from
/// Normal(mu_q, (exploration_scale * sigma_q)^2) at every query time, using
/// only the given conditioning points as observations.
inline Episode sample_rollout(const CNMPModel& model,
                              const std::vector<ObservationPoint>& conditioning,
                              const std::vector<double>& gamma,
                              const std::vector<double>& query_times, double exploration_scale,
                              Rng& rng) {
  if (conditioning.empty()) throw std::invalid_argument("sample_rollout: empty conditioning");
  if (exploration_scale <= 0.0)
    throw std::invalid_argument("sample_rollout: exploration scale must be > 0");

  std::vector<LatentVector> latents;
  latents.reserve(conditioning.size());
  for (const auto& obs : conditioning) latents.push_back(encode(model, obs));
  const LatentVector rep = aggregate(latents);

  Episode ep;
  ep.conditioning = conditioning;
  ep.gamma = gamma;
  ep.exploration_scale = exploration_scale;
  ep.contexts.reserve(query_times.size());
  for (double t : query_times) {
    const GaussianPrediction pred = decode(model, rep, t, gamma);
    std::vector<double> sigma(pred.mu.size());
    std::vector<double> action(pred.mu.size());
    for (std::size_t d = 0; d < pred.mu.size(); ++d) {
      sigma[d] = exploration_scale * effective_sigma(pred.sigma_raw[d], model.sigma_floor);
      if (!std::isfinite(pred.mu[d]) || !std::isfinite(sigma[d]))
        throw std::domain_error("sample_rollout: non-finite policy parameters");
      action[d] = normal(rng, pred.mu[d], sigma[d]);
    }
    ep.contexts.push_back({t, gamma});
    ep.means.push_back(pred.mu);
    ep.sigmas.push_back(std::move(sigma));
    ep.actions.push_back(std::move(action));
  }
  ep.validate();
  return ep;
}

namespace detail {

/// Recomputes the episode's forward passes and accumulates
/// weight * grad(sum_t log pi(a_t | c_t)) into the given gradient vectors.
/// Returns sum_t log pi. The model must still hold the parameters the
/// episode was sampled from for the recomputation to be exact.
inline double episode_logprob_grad(const CNMPModel& model, const Episode& ep, double weight,
                                   GradientVector& enc_grad, GradientVector& dec_grad) {
  ep.validate();
  const std::size_t n_obs = ep.conditioning.size();
  if (n_obs == 0) throw std::invalid_argument("episode without conditioning");

  std::vector<MlpTape> enc_tapes(n_obs);
  std::vector<LatentVector> latents(n_obs);
  for (std::size_t k = 0; k < n_obs; ++k)
    latents[k] = encode(model, ep.conditioning[k], &enc_tapes[k]);
  const LatentVector rep = aggregate(latents);

  if (enc_grad.empty()) enc_grad.assign(model.encoder_params.size(), 0.0);
  if (dec_grad.empty()) dec_grad.assign(model.decoder_params.size(), 0.0);

  double logprob = 0.0;
  std::vector<double> rep_grad(model.latent_width, 0.0);
  MlpTape dec_tape;
  for (std::size_t s = 0; s < ep.contexts.size(); ++s) {
    const auto dec_out =
        mlp_forward(model.decoder_spec, model.decoder_params,
                    decoder_input(model, rep, ep.contexts[s].t, ep.contexts[s].gamma), &dec_tape);
    std::vector<double> out_grad(dec_out.size(), 0.0);
    for (int d = 0; d < model.sm_width; ++d) {
      const double mu = dec_out[d];
      const double raw = dec_out[model.sm_width + d];
      const double sigma = ep.exploration_scale * effective_sigma(raw, model.sigma_floor);
      const double a = ep.actions[s][d];
      const double z = (a - mu) / sigma;
      logprob += -std::log(sigma) - kHalfLogTwoPi - 0.5 * z * z;
      // d log pi / d mu and, through softplus, d log pi / d sigma_raw
      out_grad[d] = weight * z / sigma;
      const double dsigma = (z * z - 1.0) / sigma;
      out_grad[model.sm_width + d] = weight * dsigma * ep.exploration_scale * sigmoid(raw);
    }
    const auto dec_in_grad =
        mlp_backward(model.decoder_spec, model.decoder_params, dec_tape, out_grad, dec_grad);
    for (int d = 0; d < model.latent_width; ++d) rep_grad[d] += dec_in_grad[d];
  }

  std::vector<double> enc_out_grad(model.latent_width);
  for (int d = 0; d < model.latent_width; ++d)
    enc_out_grad[d] = rep_grad[d] / static_cast<double>(n_obs);
  for (std::size_t k = 0; k < n_obs; ++k)
    mlp_backward(model.encoder_spec, model.encoder_params, enc_tapes[k], enc_out_grad, enc_grad);
  return logprob;
}

}  // namespace detail

/// Advantages of a batch: rewards minus the batch mean, optionally divided
/// by the batch standard deviation (+1e-8).
inline std::vector<double> batch_advantages(const std::vector<Episode>& episodes,
                                            bool normalize = true, bool use_baseline = true) {
  if (episodes.empty()) throw std::invalid_argument("batch_advantages: empty batch");
  std::vector<double> adv(episodes.size());
  double mean_r = 0.0;
  for (const Episode& ep : episodes) {
    if (!ep.reward_set) throw std::invalid_argument("batch_advantages: reward not set");
    mean_r += ep.reward;
  }
  mean_r /= static_cast<double>(episodes.size());
  const double baseline = use_baseline ? mean_r : 0.0;
  double var = 0.0;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    adv[e] = episodes[e].reward - baseline;
    var += (episodes[e].reward - mean_r) * (episodes[e].reward - mean_r);
  }
  if (normalize) {
    const double std_r = std::sqrt(var / static_cast<double>(episodes.size()));
    for (double& a : adv) a /= std_r + 1e-8;
  }
  return adv;
}

/// The surrogate objective whose gradient is the episodic likelihood-ratio
/// estimator: -(1/N) sum_e A_e sum_t log pi(a_t | c_t). With a terminal
/// reward the inner return equals R for every step, so the whole-episode
/// score is weighted once by the advantage.
inline double pg_surrogate(const CNMPModel& model, const std::vector<Episode>& episodes,
                           const std::vector<double>& advantages) {
  double loss = 0.0;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const Episode& ep = episodes[e];
    std::vector<LatentVector> latents;
    for (const auto& obs : ep.conditioning) latents.push_back(encode(model, obs));
    const LatentVector rep = aggregate(latents);
    double logprob = 0.0;
    for (std::size_t s = 0; s < ep.contexts.size(); ++s) {
      const GaussianPrediction pred = decode(model, rep, ep.contexts[s].t, ep.contexts[s].gamma);
      std::vector<double> sigma(pred.mu.size());
      for (std::size_t d = 0; d < sigma.size(); ++d)
        sigma[d] = ep.exploration_scale * effective_sigma(pred.sigma_raw[d], model.sigma_floor);
      logprob += gaussian_logpdf(ep.actions[s], pred.mu, sigma);
    }
    loss -= advantages[e] * logprob;
  }
  return loss / static_cast<double>(episodes.size());
}

/// Gradient of pg_surrogate with respect to both parameter vectors.
inline double pg_gradients(const CNMPModel& model, const std::vector<Episode>& episodes,
                           const std::vector<double>& advantages, GradientVector& enc_grad,
                           GradientVector& dec_grad) {
  enc_grad.assign(model.encoder_params.size(), 0.0);
  dec_grad.assign(model.decoder_params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(episodes.size());
  double loss = 0.0;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const double logprob =
        detail::episode_logprob_grad(model, episodes[e], -advantages[e] * inv_n, enc_grad, dec_grad);
    loss -= advantages[e] * logprob;
  }
  return loss * inv_n;
}

struct PgDiagnostics {
  double surrogate_loss = 0.0;
  double grad_norm = 0.0;
  bool degenerate = false;  // all advantages zero: no update applied
};

/// One policy-gradient batch update (Adam on the negated objective). A batch
/// with identical rewards has zero advantage everywhere; it is reported as
/// degenerate and the parameters are left untouched.
inline PgDiagnostics pg_update(CNMPModel& model, const std::vector<Episode>& episodes,
                               AdamState& enc_adam, AdamState& dec_adam, double clip_norm = 10.0,
                               bool normalize_advantages = true) {
  const auto adv = batch_advantages(episodes, normalize_advantages);
  PgDiagnostics diag;
  diag.degenerate = true;
  for (double a : adv) diag.degenerate = diag.degenerate && a == 0.0;
  if (diag.degenerate) return diag;

  GradientVector enc_grad, dec_grad;
  diag.surrogate_loss = pg_gradients(model, episodes, adv, enc_grad, dec_grad);
  const double norm = std::sqrt(global_norm(enc_grad) * global_norm(enc_grad) +
                                global_norm(dec_grad) * global_norm(dec_grad));
  diag.grad_norm = norm;
  clip_global_norm(enc_grad, clip_norm);
  clip_global_norm(dec_grad, clip_norm);
  adam_step(model.encoder_params, enc_grad, enc_adam);
  adam_step(model.decoder_params, dec_grad, dec_adam);
  return diag;
}

/// Returns demos plus the solution as one more demonstration; subsequent
/// training samples observations from it like any other member.
inline DemonstrationSet assimilate(const DemonstrationSet& demos, const Trajectory& solution) {
  if (static_cast<int>(solution.task_params.size()) != demos.gamma_width)
    throw std::invalid_argument("assimilate: gamma width mismatch");
  if (solution.sm_width() != demos.sm_width)
    throw std::invalid_argument("assimilate: sm width mismatch");
  DemonstrationSet out = demos;
  out.add(solution);
  return out;
}

/// Per-roll-out metrics of the adaptation loop.
struct MetricsRow {
  int rollout_index = 0;
  double reward = 0.0;
  double best_reward = 0.0;
  double pg_loss = 0.0;
  double sl_loss = 0.0;
  double retention_error = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "rollout_index,reward,best_reward,pg_loss,sl_loss,retention_error";

struct AdaptResult {
  Trajectory solution;  // best deterministic (mean) trajectory found
  bool success = false;
  int rollouts_used = 0;
  double best_reward = -std::numeric_limits<double>::infinity();
  double pre_retention = 0.0;
  double post_retention = 0.0;
  std::vector<MetricsRow> log;
};

using RewardFn = std::function<double(const Trajectory&)>;

/// The adaptation loop: collect a batch of stochastic roll-outs, evaluate
/// their terminal rewards, apply the policy-gradient update, replay
/// supervised cases from the demonstrations, and track the best
/// deterministic trajectory until it reaches the success threshold or the
/// roll-out budget is exhausted (best-effort result, flagged unsuccessful).
/// Roll-out k draws its generator from (config.seed, k), so runs are
/// reproducible and roll-outs could be collected concurrently.
inline AdaptResult interleaved_adapt(CNMPModel& model, const DemonstrationSet& demos,
                                     const RewardFn& env, const std::vector<double>& target_gamma,
                                     const std::vector<ObservationPoint>& conditioning,
                                     const AdaptConfig& config) {
  config.validate();
  if (demos.empty()) throw std::invalid_argument("interleaved_adapt: empty demonstration set");

  AdamState pg_enc = make_adam(model.encoder_params.size(), config.pg_learning_rate);
  AdamState pg_dec = make_adam(model.decoder_params.size(), config.pg_learning_rate);
  CnmpTrainer sl_trainer = make_trainer(model, config.sl_learning_rate);
  sl_trainer.clip_norm = config.clip_norm;
  sl_trainer.n_max = config.n_max;
  Rng sl_rng = make_rng(derive_seed(config.seed, 0x5150));

  const std::vector<double> query_times = uniform_grid(config.query_points);

  AdaptResult result;
  auto deterministic_eval = [&]() {
    Trajectory det = generate(model, conditioning, target_gamma, query_times, "rl_solution");
    const double r = env(det);
    if (r > result.best_reward) {
      result.best_reward = r;
      result.solution = std::move(det);
    }
    return r;
  };

  result.pre_retention = mean(reconstruction_error(model, demos));
  const double initial_reward = deterministic_eval();
  result.log.push_back({0, initial_reward, result.best_reward, 0.0, 0.0, result.pre_retention});
  result.success = result.best_reward >= config.success_threshold;

  int rollout_index = 0;
  while (!result.success && result.rollouts_used < config.max_rollouts) {
    const int batch_size =
        std::min(config.rollouts_per_update, config.max_rollouts - result.rollouts_used);
    std::vector<Episode> episodes;
    episodes.reserve(batch_size);
    std::vector<int> batch_indices;
    for (int k = 0; k < batch_size; ++k) {
      const int idx = ++rollout_index;
      Rng rollout_rng = make_rng(derive_seed(config.seed, static_cast<std::uint64_t>(idx)));
      Episode ep = sample_rollout(model, conditioning, target_gamma, query_times,
                                  config.exploration_scale, rollout_rng);
      ep.reward = env(ep.as_trajectory());
      ep.reward_set = true;
      episodes.push_back(std::move(ep));
      batch_indices.push_back(idx);
      result.rollouts_used += 1;
    }

    PgDiagnostics diag;
    for (int s = 0; s < config.rl_steps; ++s)
      diag = pg_update(model, episodes, pg_enc, pg_dec, config.clip_norm,
                       config.normalize_advantages);

    double sl_value = 0.0;
    for (int s = 0; s < config.sl_steps; ++s)
      sl_value += cnmp_train_step(model, demos, sl_trainer, sl_rng);
    if (config.sl_steps > 0) sl_value /= config.sl_steps;

    deterministic_eval();
    const double retention = mean(reconstruction_error(model, demos));
    result.success = result.best_reward >= config.success_threshold;

    for (std::size_t k = 0; k < episodes.size(); ++k)
      result.log.push_back({batch_indices[k], episodes[k].reward, result.best_reward,
                            diag.surrogate_loss, sl_value, retention});
  }

  result.post_retention = mean(reconstruction_error(model, demos));
  return result;
}

}  // namespace acnmp
