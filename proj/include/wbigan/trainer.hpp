#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "wbigan/config.hpp"
#include "wbigan/model.hpp"
#include "wbigan/sample.hpp"

namespace wbigan {

struct EpochRecord {
  std::size_t epoch = 0;             // 1-based
  double critic_objective = 0.0;     // mean over the epoch's critic updates
  double generator_objective = 0.0;  // mean over the epoch's G/E updates (0 if none)
  double seconds = 0.0;
  std::size_t critic_steps = 0;     // cumulative
  std::size_t generator_steps = 0;  // cumulative
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

// i.i.d. standard normal latent batch (batch x latent_dim). batch must be > 0.
Matrix sample_latent(const TrainConfig& cfg, std::size_t batch, Rng& rng);

// mean D(x, E(x)) - mean D(G(z), z). The critic ascends it; G and E descend it.
double critic_objective(const BiganModel& m, const Matrix& x, const Matrix& z, Mode mode, Rng& rng);

// mean log sigma(D(x, E(x))) + mean log(1 - sigma(D(G(z), z))), logs guarded at 1e-12.
double classical_objective(const BiganModel& m, const Matrix& x, const Matrix& z);

// Clamps every critic weight and bias into [-bound, bound].
void clip_weights(Mlp& critic, double bound);

struct ObjectiveGradients {
  double objective = 0.0;
  MlpGrad critic;
  MlpGrad generator;  // empty unless requested
  MlpGrad encoder;    // empty unless requested
};

// Value of the selected objective and its gradient (d V / d theta) for the three networks,
// from one forward pass with the critic in `mode`.
ObjectiveGradients objective_gradients(const BiganModel& m, const Matrix& x, const Matrix& z,
                                       Objective objective, Mode mode, Rng& rng,
                                       bool with_generator_encoder);

enum class UpdateKind { Critic, GeneratorEncoder };

// Snapshot handed to TrainHooks::on_gradients just before an update is applied.
struct GradientProbe {
  UpdateKind kind;
  std::size_t step;  // 1-based count of updates of this kind
  const BiganModel& model;
  const Matrix& x;
  const Matrix& z;
  Rng dropout_rng;  // generator state used for the pass, replayable
  const ObjectiveGradients& gradients;
};

struct TrainHooks {
  std::function<void(const GradientProbe&)> on_gradients;
  std::function<void(const BiganModel&, std::size_t critic_step)> after_critic_update;
  std::function<void(const BiganModel&, std::size_t generator_step)> after_generator_update;
  std::function<void(const BiganModel&, const EpochRecord&)> after_epoch;
};

struct TrainResult {
  BiganModel model;
  TrainHistory history;
};

// Alternates critic_steps_per_gen_step critic updates (ascent, then clipping in Wasserstein
// mode) with one joint G/E update (descent). Each epoch visits the shuffled training rows in
// batches of batch_size. Deterministic given cfg.seed.
TrainResult train(const TrainConfig& cfg, const Matrix& train_set, const TrainHooks& hooks = {});
// Rejects any sample not labeled normal.
TrainResult train(const TrainConfig& cfg, std::span<const EncodedSample> train_set,
                  const TrainHooks& hooks = {});

}  // namespace wbigan
