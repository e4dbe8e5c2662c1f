#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "acnmp/adam.hpp"
#include "acnmp/gaussian.hpp"
#include "acnmp/net.hpp"
#include "acnmp/rng.hpp"
#include "acnmp/trajectory.hpp"

namespace acnmp {

/// A (time, task-params, sensorimotor-value) triple used for conditioning.
struct ObservationPoint {
  double t = 0.0;
  std::vector<double> gamma;
  std::vector<double> sm;
};

using LatentVector = std::vector<double>;

/// Decoder output for one query: per-dimension mean and pre-activation
/// spread. The effective spread is softplus(sigma_raw) + floor.
struct GaussianPrediction {
  std::vector<double> mu;
  std::vector<double> sigma_raw;

  std::vector<double> sigma(double floor) const {
    std::vector<double> s(sigma_raw.size());
    for (std::size_t d = 0; d < s.size(); ++d) s[d] = effective_sigma(sigma_raw[d], floor);
    return s;
  }
};

/// Conditional neural movement primitive: an observation encoder, a mean
/// aggregation into one general representation, and a query decoder that
/// predicts a Gaussian over sensorimotor values. The same object is the
/// stochastic policy during reinforcement-learning adaptation.
struct CNMPModel {
  MlpSpec encoder_spec;
  MlpSpec decoder_spec;
  ParameterVector encoder_params;
  ParameterVector decoder_params;
  int sm_width = 0;
  int gamma_width = 0;
  int latent_width = 0;
  double sigma_floor = 1e-4;
  // Where the task parameters are concatenated; both by default so the
  // decoder stays conditionable when observations are scarce.
  bool gamma_to_encoder = true;
  bool gamma_to_decoder = true;

  int encoder_input_width() const {
    return 1 + (gamma_to_encoder ? gamma_width : 0) + sm_width;
  }
  int decoder_input_width() const {
    return latent_width + 1 + (gamma_to_decoder ? gamma_width : 0);
  }

  void validate() const {
    validate_spec(encoder_spec);
    validate_spec(decoder_spec);
    if (encoder_spec.front().input_width != encoder_input_width())
      throw std::invalid_argument("cnmp: encoder input width mismatch");
    if (encoder_spec.back().output_width != latent_width)
      throw std::invalid_argument("cnmp: encoder output width != latent width");
    if (decoder_spec.front().input_width != decoder_input_width())
      throw std::invalid_argument("cnmp: decoder input width mismatch");
    if (decoder_spec.back().output_width != 2 * sm_width)
      throw std::invalid_argument("cnmp: decoder output width must be 2 * sm width");
    if (encoder_params.size() != param_count(encoder_spec) ||
        decoder_params.size() != param_count(decoder_spec))
      throw std::invalid_argument("cnmp: parameter count mismatch");
  }
};

/// Builds a CNMP from layer width lists. The encoder list's final width is
/// the latent width; the decoder list must end at 2 * sm_width.
inline CNMPModel make_cnmp(int sm_width, int gamma_width, const std::vector<int>& encoder_widths,
                           const std::vector<int>& decoder_widths, std::uint64_t seed,
                           bool gamma_to_encoder = true, bool gamma_to_decoder = true) {
  if (sm_width < 1) throw std::invalid_argument("make_cnmp: sm_width must be >= 1");
  if (gamma_width < 0) throw std::invalid_argument("make_cnmp: negative gamma_width");
  if (encoder_widths.empty() || decoder_widths.empty())
    throw std::invalid_argument("make_cnmp: empty width list");
  if (decoder_widths.back() != 2 * sm_width)
    throw std::invalid_argument("make_cnmp: decoder must end at 2 * sm_width");

  CNMPModel m;
  m.sm_width = sm_width;
  m.gamma_width = gamma_width;
  m.latent_width = encoder_widths.back();
  m.gamma_to_encoder = gamma_to_encoder;
  m.gamma_to_decoder = gamma_to_decoder;
  m.encoder_spec = mlp_chain(m.encoder_input_width(), encoder_widths);
  m.decoder_spec = mlp_chain(m.decoder_input_width(), decoder_widths);
  m.encoder_params = init_params(m.encoder_spec, seed);
  m.decoder_params = init_params(m.decoder_spec, derive_seed(seed, 1));
  m.validate();
  return m;
}

inline std::vector<double> encoder_input(const CNMPModel& model, const ObservationPoint& obs) {
  if (static_cast<int>(obs.gamma.size()) != model.gamma_width)
    throw std::invalid_argument("encode: gamma width mismatch");
  if (static_cast<int>(obs.sm.size()) != model.sm_width)
    throw std::invalid_argument("encode: sm width mismatch");
  std::vector<double> in;
  in.reserve(model.encoder_input_width());
  in.push_back(obs.t);
  if (model.gamma_to_encoder) in.insert(in.end(), obs.gamma.begin(), obs.gamma.end());
  in.insert(in.end(), obs.sm.begin(), obs.sm.end());
  return in;
}

inline std::vector<double> decoder_input(const CNMPModel& model, const LatentVector& rep,
                                         double t_query, const std::vector<double>& gamma) {
  if (static_cast<int>(rep.size()) != model.latent_width)
    throw std::invalid_argument("decode: latent width mismatch");
  if (static_cast<int>(gamma.size()) != model.gamma_width)
    throw std::invalid_argument("decode: gamma width mismatch");
  std::vector<double> in;
  in.reserve(model.decoder_input_width());
  in.insert(in.end(), rep.begin(), rep.end());
  in.push_back(t_query);
  if (model.gamma_to_decoder) in.insert(in.end(), gamma.begin(), gamma.end());
  return in;
}

/// Encoder pass for one observation point.
inline LatentVector encode(const CNMPModel& model, const ObservationPoint& obs,
                           MlpTape* tape = nullptr) {
  return mlp_forward(model.encoder_spec, model.encoder_params, encoder_input(model, obs), tape);
}

/// Elementwise arithmetic mean of the latent vectors. Each dimension is
/// summed in sorted value order, so the result is bit-identical under any
/// permutation of the input list.
inline LatentVector aggregate(const std::vector<LatentVector>& latents) {
  if (latents.empty()) throw std::invalid_argument("aggregate: empty latent list");
  const std::size_t width = latents.front().size();
  for (const auto& l : latents)
    if (l.size() != width) throw std::invalid_argument("aggregate: latent width mismatch");
  LatentVector rep(width, 0.0);
  std::vector<double> column(latents.size());
  for (std::size_t d = 0; d < width; ++d) {
    for (std::size_t k = 0; k < latents.size(); ++k) column[k] = latents[k][d];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double v : column) s += v;
    rep[d] = s / static_cast<double>(latents.size());
  }
  return rep;
}

/// Decoder pass for one query time.
inline GaussianPrediction decode(const CNMPModel& model, const LatentVector& rep, double t_query,
                                 const std::vector<double>& gamma, MlpTape* tape = nullptr) {
  const auto out =
      mlp_forward(model.decoder_spec, model.decoder_params, decoder_input(model, rep, t_query, gamma), tape);
  GaussianPrediction p;
  p.mu.assign(out.begin(), out.begin() + model.sm_width);
  p.sigma_raw.assign(out.begin() + model.sm_width, out.end());
  return p;
}

/// One supervised training case: a handful of observation points plus the
/// query point whose value the decoder must predict.
struct TrainingCase {
  std::vector<ObservationPoint> observations;
  ObservationPoint query;
};

inline ObservationPoint observation_at(const Trajectory& traj, std::size_t index) {
  return ObservationPoint{traj.times[index], traj.task_params, traj.values[index]};
}

/// Samples n ~ U{1..n_max} observation points and one query point from the
/// given trajectory. Observations and query carry the trajectory's gamma.
inline TrainingCase sample_training_case(const Trajectory& traj, Rng& rng, int n_max = 5) {
  if (n_max < 1) throw std::invalid_argument("sample_training_case: n_max must be >= 1");
  const int last = static_cast<int>(traj.size()) - 1;
  const int n_obs = uniform_int(rng, 1, n_max);
  TrainingCase c;
  c.observations.reserve(n_obs);
  for (int k = 0; k < n_obs; ++k)
    c.observations.push_back(observation_at(traj, uniform_int(rng, 0, last)));
  c.query = observation_at(traj, uniform_int(rng, 0, last));
  return c;
}

/// Same, picking the source trajectory uniformly at random first.
inline TrainingCase sample_training_case(const DemonstrationSet& demos, Rng& rng, int n_max = 5) {
  if (demos.empty()) throw std::invalid_argument("sample_training_case: empty demonstration set");
  const Trajectory& traj =
      demos.trajectories[uniform_int(rng, 0, static_cast<int>(demos.size()) - 1)];
  return sample_training_case(traj, rng, n_max);
}

/// Loss and parameter gradients of one training case.
struct CaseGradients {
  double loss = 0.0;
  GradientVector encoder_grad;
  GradientVector decoder_grad;
};

/// Negative log-likelihood of the query value under the decoded Gaussian,
/// with exact reverse-mode gradients flowing through the decoder, the mean
/// aggregation and every encoder pass jointly.
inline CaseGradients sl_loss(const CNMPModel& model, const TrainingCase& c) {
  if (c.observations.empty()) throw std::invalid_argument("sl_loss: no observation points");

  const std::size_t n = c.observations.size();
  std::vector<MlpTape> enc_tapes(n);
  std::vector<LatentVector> latents(n);
  for (std::size_t k = 0; k < n; ++k)
    latents[k] = encode(model, c.observations[k], &enc_tapes[k]);
  const LatentVector rep = aggregate(latents);

  MlpTape dec_tape;
  const auto dec_out = mlp_forward(model.decoder_spec, model.decoder_params,
                                   decoder_input(model, rep, c.query.t, c.query.gamma), &dec_tape);
  std::vector<double> mu(dec_out.begin(), dec_out.begin() + model.sm_width);
  std::vector<double> sigma_raw(dec_out.begin() + model.sm_width, dec_out.end());

  CaseGradients g;
  std::vector<double> dmu, dsigma_raw;
  g.loss = gaussian_nll_grad(mu, sigma_raw, c.query.sm, model.sigma_floor, dmu, dsigma_raw);

  std::vector<double> dec_out_grad;
  dec_out_grad.reserve(dec_out.size());
  dec_out_grad.insert(dec_out_grad.end(), dmu.begin(), dmu.end());
  dec_out_grad.insert(dec_out_grad.end(), dsigma_raw.begin(), dsigma_raw.end());

  const auto dec_in_grad =
      mlp_backward(model.decoder_spec, model.decoder_params, dec_tape, dec_out_grad, g.decoder_grad);

  // mean aggregation: every encoder output receives 1/n of the rep gradient
  std::vector<double> enc_out_grad(model.latent_width);
  for (int d = 0; d < model.latent_width; ++d)
    enc_out_grad[d] = dec_in_grad[d] / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k)
    mlp_backward(model.encoder_spec, model.encoder_params, enc_tapes[k], enc_out_grad,
                 g.encoder_grad);
  return g;
}

/// Conditions once on the given observation points and returns the decoder
/// mean at every query time as a trajectory carrying gamma.
inline Trajectory generate(const CNMPModel& model, const std::vector<ObservationPoint>& conditioning,
                           const std::vector<double>& gamma, const std::vector<double>& query_times,
                           const std::string& id = "generated") {
  if (conditioning.empty())
    throw std::invalid_argument("generate: at least one conditioning observation is required");
  if (query_times.empty()) throw std::invalid_argument("generate: empty query list");
  for (double t : query_times)
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("generate: query time outside [0,1]");

  std::vector<LatentVector> latents;
  latents.reserve(conditioning.size());
  for (const auto& obs : conditioning) latents.push_back(encode(model, obs));
  const LatentVector rep = aggregate(latents);

  Trajectory traj;
  traj.id = id;
  traj.task_params = gamma;
  traj.times = query_times;
  traj.values.reserve(query_times.size());
  for (double t : query_times) traj.values.push_back(decode(model, rep, t, gamma).mu);
  return traj;
}

/// Mean absolute reproduction error of one trajectory under the given
/// conditioning, evaluated on the trajectory's own time grid.
inline double reconstruction_error_one(const CNMPModel& model, const Trajectory& traj,
                                       const std::vector<ObservationPoint>& conditioning) {
  const Trajectory gen = generate(model, conditioning, traj.task_params, traj.times);
  double err = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k)
    for (int d = 0; d < traj.sm_width(); ++d)
      err += std::abs(gen.values[k][d] - traj.values[k][d]);
  return err / (static_cast<double>(traj.size()) * traj.sm_width());
}

/// Per-trajectory retention metric: condition on each demonstration's first
/// point (plus gamma) and report the mean absolute error over its samples.
inline std::vector<double> reconstruction_error(const CNMPModel& model,
                                                const DemonstrationSet& demos) {
  std::vector<double> errors;
  errors.reserve(demos.size());
  for (const Trajectory& traj : demos.trajectories)
    errors.push_back(reconstruction_error_one(model, traj, {observation_at(traj, 0)}));
  return errors;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Optimizer bundle for supervised CNMP training.
struct CnmpTrainer {
  AdamState encoder_adam;
  AdamState decoder_adam;
  double clip_norm = 10.0;
  int n_max = 5;
};

inline CnmpTrainer make_trainer(const CNMPModel& model, double learning_rate = 1e-4) {
  CnmpTrainer t;
  t.encoder_adam = make_adam(model.encoder_params.size(), learning_rate);
  t.decoder_adam = make_adam(model.decoder_params.size(), learning_rate);
  return t;
}

/// One stochastic training step (one sampled case). Returns the case loss.
inline double cnmp_train_step(CNMPModel& model, const DemonstrationSet& demos, CnmpTrainer& trainer,
                              Rng& rng) {
  const TrainingCase c = sample_training_case(demos, rng, trainer.n_max);
  CaseGradients g = sl_loss(model, c);
  clip_global_norm(g.encoder_grad, trainer.clip_norm);
  clip_global_norm(g.decoder_grad, trainer.clip_norm);
  adam_step(model.encoder_params, g.encoder_grad, trainer.encoder_adam);
  adam_step(model.decoder_params, g.decoder_grad, trainer.decoder_adam);
  return g.loss;
}

/// Runs `steps` stochastic training steps; returns an exponentially smoothed
/// loss trace sampled every `record_every` steps as (step, loss) pairs.
inline std::vector<std::pair<long, double>> cnmp_train(CNMPModel& model,
                                                       const DemonstrationSet& demos,
                                                       CnmpTrainer& trainer, long steps, Rng& rng,
                                                       long record_every = 100) {
  std::vector<std::pair<long, double>> trace;
  double ema = 0.0;
  bool ema_init = false;
  for (long s = 1; s <= steps; ++s) {
    const double loss = cnmp_train_step(model, demos, trainer, rng);
    if (!ema_init) {
      ema = loss;
      ema_init = true;
    } else {
      ema = 0.99 * ema + 0.01 * loss;
    }
    if (s % record_every == 0 || s == steps) trace.emplace_back(s, ema);
  }
  return trace;
}

}  // namespace acnmp
