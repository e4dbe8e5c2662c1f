#pragma once

// Cross-morphology skill transfer. Two CNMPs are trained jointly on proxy
// tasks with a latent-alignment penalty: besides each model's own
// supervised loss, the aggregated representations of matched observation
// sets of the same proxy pair are pulled together by their mean squared
// difference. Once aligned, a trajectory observed by the source encoder can
// be decoded by the target decoder in the target's own joint space, and the
// result refined with reinforcement learning.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "acnmp/cnmp.hpp"
#include "acnmp/rl.hpp"

namespace acnmp {

/// Source and target CNMPs sharing latent and task-parameter widths; the
/// sensorimotor widths may differ (different joint counts).
struct PairedModels {
  CNMPModel source;
  CNMPModel target;

  void validate() const {
    source.validate();
    target.validate();
    if (source.latent_width != target.latent_width)
      throw std::invalid_argument("paired models: latent widths differ");
    if (source.gamma_width != target.gamma_width)
      throw std::invalid_argument("paired models: gamma widths differ");
  }
};

/// One proxy-task instance demonstrated on both morphologies. Time grids and
/// sample counts may differ; the task parameters must be shared.
struct PairedDemo {
  Trajectory source_traj;
  Trajectory target_traj;

  const std::vector<double>& gamma() const { return source_traj.task_params; }

  void validate() const {
    source_traj.validate();
    target_traj.validate();
    if (source_traj.task_params != target_traj.task_params)
      throw std::invalid_argument("paired demo: task parameters differ between the pair");
  }
};

inline double align_mse(const LatentVector& r1, const LatentVector& r2) {
  if (r1.size() != r2.size() || r1.empty())
    throw std::invalid_argument("align_mse: latent width mismatch");
  double s = 0.0;
  for (std::size_t d = 0; d < r1.size(); ++d) s += (r1[d] - r2[d]) * (r1[d] - r2[d]);
  return s / static_cast<double>(r1.size());
}

struct JointTrainer {
  CnmpTrainer source_trainer;
  CnmpTrainer target_trainer;
  double align_weight = 1.0;
  bool align = true;  // false: negative-control training without the penalty
  int n_max = 5;
};

inline JointTrainer make_joint_trainer(const PairedModels& pair, double learning_rate = 1e-4) {
  JointTrainer t;
  t.source_trainer = make_trainer(pair.source, learning_rate);
  t.target_trainer = make_trainer(pair.target, learning_rate);
  return t;
}

struct JointLosses {
  double source_nll = 0.0;
  double target_nll = 0.0;
  double align_mse = 0.0;
};

namespace detail {

struct AlignGrads {
  double loss = 0.0;
  GradientVector source_enc;
  GradientVector target_enc;
};

/// Latent-alignment term for one proxy pair: the same sampled time fractions
/// are read off both trajectories (by interpolation on each one's own grid),
/// encoded, aggregated, and the representations compared by MSE.
inline AlignGrads alignment_grads(const PairedModels& pair, const PairedDemo& demo,
                                  const std::vector<double>& fractions, double weight) {
  const std::size_t n = fractions.size();
  std::vector<MlpTape> src_tapes(n), tgt_tapes(n);
  std::vector<LatentVector> src_latents(n), tgt_latents(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fractions[k];
    const ObservationPoint src_obs{f, demo.gamma(), demo.source_traj.value_at(f)};
    const ObservationPoint tgt_obs{f, demo.gamma(), demo.target_traj.value_at(f)};
    src_latents[k] = encode(pair.source, src_obs, &src_tapes[k]);
    tgt_latents[k] = encode(pair.target, tgt_obs, &tgt_tapes[k]);
  }
  const LatentVector r1 = aggregate(src_latents);
  const LatentVector r2 = aggregate(tgt_latents);

  AlignGrads out;
  out.loss = align_mse(r1, r2);

  const int width = pair.source.latent_width;
  std::vector<double> d_r1(width), d_r2(width);
  for (int d = 0; d < width; ++d) {
    const double g = weight * 2.0 * (r1[d] - r2[d]) / width;
    d_r1[d] = g / static_cast<double>(n);
    d_r2[d] = -g / static_cast<double>(n);
  }
  out.source_enc.assign(pair.source.encoder_params.size(), 0.0);
  out.target_enc.assign(pair.target.encoder_params.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    mlp_backward(pair.source.encoder_spec, pair.source.encoder_params, src_tapes[k], d_r1,
                 out.source_enc);
    mlp_backward(pair.target.encoder_spec, pair.target.encoder_params, tgt_tapes[k], d_r2,
                 out.target_enc);
  }
  return out;
}

}  // namespace detail

/// One joint training step on a proxy pair: each model takes its own
/// supervised case from its own trajectory, the alignment term couples their
/// encoders, and each model receives one Adam step on the summed loss.
inline JointLosses joint_train_step(PairedModels& pair, const PairedDemo& demo,
                                    JointTrainer& trainer, Rng& rng) {
  demo.validate();
  if (static_cast<int>(demo.gamma().size()) != pair.source.gamma_width)
    throw std::invalid_argument("joint_train_step: gamma width mismatch with the models");

  const TrainingCase source_case = sample_training_case(demo.source_traj, rng, trainer.n_max);
  const TrainingCase target_case = sample_training_case(demo.target_traj, rng, trainer.n_max);
  CaseGradients src = sl_loss(pair.source, source_case);
  CaseGradients tgt = sl_loss(pair.target, target_case);

  JointLosses losses;
  losses.source_nll = src.loss;
  losses.target_nll = tgt.loss;

  if (trainer.align) {
    const int m = uniform_int(rng, 1, trainer.n_max);
    std::vector<double> fractions(m);
    for (double& f : fractions) f = uniform(rng, 0.0, 1.0);
    const auto align =
        detail::alignment_grads(pair, demo, fractions, trainer.align_weight);
    losses.align_mse = align.loss;
    for (std::size_t i = 0; i < src.encoder_grad.size(); ++i)
      src.encoder_grad[i] += align.source_enc[i];
    for (std::size_t i = 0; i < tgt.encoder_grad.size(); ++i)
      tgt.encoder_grad[i] += align.target_enc[i];
  }

  clip_global_norm(src.encoder_grad, trainer.source_trainer.clip_norm);
  clip_global_norm(src.decoder_grad, trainer.source_trainer.clip_norm);
  clip_global_norm(tgt.encoder_grad, trainer.target_trainer.clip_norm);
  clip_global_norm(tgt.decoder_grad, trainer.target_trainer.clip_norm);
  adam_step(pair.source.encoder_params, src.encoder_grad, trainer.source_trainer.encoder_adam);
  adam_step(pair.source.decoder_params, src.decoder_grad, trainer.source_trainer.decoder_adam);
  adam_step(pair.target.encoder_params, tgt.encoder_grad, trainer.target_trainer.encoder_adam);
  adam_step(pair.target.decoder_params, tgt.decoder_grad, trainer.target_trainer.decoder_adam);
  return losses;
}

/// Evaluation-only alignment of a pair under matched observation fractions.
inline double alignment_error(const PairedModels& pair, const PairedDemo& demo,
                              const std::vector<double>& fractions) {
  std::vector<LatentVector> src, tgt;
  for (double f : fractions) {
    src.push_back(encode(pair.source, {f, demo.gamma(), demo.source_traj.value_at(f)}));
    tgt.push_back(encode(pair.target, {f, demo.gamma(), demo.target_traj.value_at(f)}));
  }
  return align_mse(aggregate(src), aggregate(tgt));
}

/// Aggregated source-encoder representation of a whole trajectory from
/// sampled observation fractions.
inline LatentVector observe_with(const CNMPModel& model, const Trajectory& traj, int n_obs,
                                 Rng& rng) {
  if (n_obs < 1) throw std::invalid_argument("observe_with: n_obs must be >= 1");
  std::vector<LatentVector> latents;
  latents.reserve(n_obs);
  for (int k = 0; k < n_obs; ++k) {
    const double f = uniform(rng, 0.0, 1.0);
    latents.push_back(encode(model, {f, traj.task_params, traj.value_at(f)}));
  }
  return aggregate(latents);
}

/// Decodes the source robot's solution through the target robot's decoder:
/// the source encoder observes the solution, and the target decoder renders
/// the shared representation in its own joint space. The output width is the
/// target's, whatever the source width was.
inline Trajectory cross_generate(const PairedModels& pair, const Trajectory& source_solution,
                                 const std::vector<double>& query_times, int n_obs,
                                 std::uint64_t observation_seed) {
  pair.validate();
  Rng rng = make_rng(observation_seed);
  const LatentVector rep = observe_with(pair.source, source_solution, n_obs, rng);
  Trajectory out;
  out.id = "transferred";
  out.task_params = source_solution.task_params;
  out.times = query_times;
  out.values.reserve(query_times.size());
  for (double t : query_times)
    out.values.push_back(decode(pair.target, rep, t, source_solution.task_params).mu);
  return out;
}

struct TransferConfig {
  AdaptConfig adapt;
  int warmup_steps = 2000;  // supervised steps on the provisional demo set
  int cross_obs = 5;        // observation samples taken from the source solution
};

struct TransferResult {
  Trajectory provisional;  // cross-decoded initialization
  AdaptResult adapt;
};

/// Transfer pipeline for one test task: cross-decode the source solution,
/// assimilate it into the target's demonstration set as a provisional
/// demonstration, briefly train on the grown set, then adapt with RL while
/// replaying it.
inline TransferResult transfer_adapt(PairedModels& pair, const Trajectory& source_solution,
                                     const DemonstrationSet& target_demos, const RewardFn& env,
                                     const TransferConfig& config) {
  TransferResult result;
  result.provisional =
      cross_generate(pair, source_solution, uniform_grid(config.adapt.query_points),
                     config.cross_obs, derive_seed(config.adapt.seed, 0xC505));
  result.provisional.id = "provisional";

  DemonstrationSet grown = assimilate(target_demos, result.provisional);
  CnmpTrainer warmup = make_trainer(pair.target, config.adapt.sl_learning_rate);
  warmup.n_max = config.adapt.n_max;
  Rng warmup_rng = make_rng(derive_seed(config.adapt.seed, 0x3A3));
  for (int s = 0; s < config.warmup_steps; ++s)
    cnmp_train_step(pair.target, grown, warmup, warmup_rng);

  const std::vector<ObservationPoint> conditioning{
      observation_at(result.provisional, 0)};
  result.adapt = interleaved_adapt(pair.target, grown, env, result.provisional.task_params,
                                   conditioning, config.adapt);
  return result;
}

}  // namespace acnmp
