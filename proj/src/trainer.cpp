#include "wbigan/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "wbigan/errors.hpp"
#include "wbigan/optimizer.hpp"

namespace wbigan {

namespace {

constexpr double kLogGuard = 1e-12;

enum Stream : std::uint64_t { kInit = 0, kShuffle = 1, kLatent = 2, kDropout = 3 };

void require_pair(const BiganModel& m, const Matrix& x, const Matrix& z) {
  if (x.rows() != z.rows()) throw ShapeError("data and latent batches differ in size");
  if (x.rows() == 0) throw DomainError("objective needs a nonempty batch");
  if (x.cols() != m.input_dim || z.cols() != m.latent_dim) {
    throw ShapeError("batch widths do not match the model");
  }
}

double mean(const Vector& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double log_real(double score) { return std::log(std::max(sigmoid(score), kLogGuard)); }
double log_fake(double score) { return std::log(std::max(sigmoid(-score), kLogGuard)); }

Matrix column_seed(const Vector& per_row) {
  Matrix s(per_row.size(), 1);
  for (std::size_t r = 0; r < per_row.size(); ++r) s(r, 0) = per_row[r];
  return s;
}

void negate(MlpGrad& g) {
  for (auto& l : g.layers) {
    for (double& v : l.weights.values()) v = -v;
    for (double& v : l.bias) v = -v;
  }
}

}  // namespace

Matrix sample_latent(const TrainConfig& cfg, std::size_t batch, Rng& rng) {
  if (batch == 0) throw DomainError("latent batch size must be positive");
  if (cfg.latent_dim == 0) throw DomainError("latent_dim must be positive");
  Matrix z(batch, cfg.latent_dim);
  for (double& v : z.values()) v = rng.normal();
  return z;
}

double critic_objective(const BiganModel& m, const Matrix& x, const Matrix& z, Mode mode, Rng& rng) {
  require_pair(m, x, z);
  const Matrix ex = encode(m, x, mode, rng);
  const Matrix gz = generate(m, z, mode, rng);
  const auto real = criticize(m, x, ex, mode, rng);
  const auto fake = criticize(m, gz, z, mode, rng);
  const double value = mean(real.scores) - mean(fake.scores);
  if (!std::isfinite(value)) throw TrainingFault(0, "critic objective is not finite");
  return value;
}

double classical_objective(const BiganModel& m, const Matrix& x, const Matrix& z) {
  require_pair(m, x, z);
  const auto real = criticize(m, x, encode(m, x));
  const auto fake = criticize(m, generate(m, z), z);
  double total = 0.0;
  for (double s : real.scores) total += log_real(s);
  double fake_total = 0.0;
  for (double s : fake.scores) fake_total += log_fake(s);
  const double n = static_cast<double>(x.rows());
  const double value = total / n + fake_total / n;
  if (!std::isfinite(value)) throw TrainingFault(0, "classical objective is not finite");
  return value;
}

void clip_weights(Mlp& critic, double bound) {
  if (!(bound > 0.0)) throw DomainError("clip bound must be positive");
  for (double* p : parameter_pointers(critic)) *p = std::clamp(*p, -bound, bound);
}

ObjectiveGradients objective_gradients(const BiganModel& m, const Matrix& x, const Matrix& z,
                                       Objective objective, Mode mode, Rng& rng,
                                       bool with_generator_encoder) {
  require_pair(m, x, z);
  Tape enc_tape, gen_tape, real_tape, fake_tape;
  const Matrix ex = encode(m, x, mode, rng, &enc_tape);
  const Matrix gz = generate(m, z, mode, rng, &gen_tape);
  const auto real = criticize(m, x, ex, mode, rng, &real_tape);
  const auto fake = criticize(m, gz, z, mode, rng, &fake_tape);

  const std::size_t batch = x.rows();
  const double inv = 1.0 / static_cast<double>(batch);
  Vector real_seed(batch), fake_seed(batch);
  ObjectiveGradients out;
  if (objective == Objective::Wasserstein) {
    out.objective = mean(real.scores) - mean(fake.scores);
    std::fill(real_seed.begin(), real_seed.end(), inv);
    std::fill(fake_seed.begin(), fake_seed.end(), -inv);
  } else {
    double total = 0.0, fake_total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      total += log_real(real.scores[b]);
      fake_total += log_fake(fake.scores[b]);
      real_seed[b] = sigmoid(-real.scores[b]) * inv;  // d/ds log sigma(s) = 1 - sigma(s)
      fake_seed[b] = -sigmoid(fake.scores[b]) * inv;  // d/ds log(1 - sigma(s)) = -sigma(s)
    }
    out.objective = total * inv + fake_total * inv;
  }

  MlpGrad real_grad = backward(m.critic, real_tape, column_seed(real_seed));
  MlpGrad fake_grad = backward(m.critic, fake_tape, column_seed(fake_seed));
  out.critic = real_grad;
  out.critic.accumulate(fake_grad);
  out.critic.input = Matrix();

  if (with_generator_encoder) {
    out.encoder = backward(m.encoder, enc_tape, real_grad.input.column_slice(m.input_dim, m.latent_dim));
    out.generator = backward(m.generator, gen_tape, fake_grad.input.column_slice(0, m.input_dim));
  }
  return out;
}

TrainResult train(const TrainConfig& cfg, std::span<const EncodedSample> train_set,
                  const TrainHooks& hooks) {
  for (const auto& s : train_set) {
    if (s.truth != Truth::Normal) {
      throw DomainError("training set contains anomalous sample " + std::to_string(s.sample_id));
    }
  }
  if (train_set.empty()) throw DomainError("training set is empty");
  return train(cfg, stack_features(train_set), hooks);
}

TrainResult train(const TrainConfig& cfg, const Matrix& train_set, const TrainHooks& hooks) {
  cfg.validate();
  if (train_set.rows() == 0) throw DomainError("training set is empty");
  if (!train_set.all_finite()) throw DomainError("training set contains non-finite values");

  const Rng root(cfg.seed);
  Rng init_rng = root.fork(kInit);
  Rng shuffle_rng = root.fork(kShuffle);
  Rng latent_rng = root.fork(kLatent);
  Rng dropout_rng = root.fork(kDropout);

  TrainResult result{init_model(cfg, train_set.cols(), init_rng), {}};
  BiganModel& model = result.model;

  const RmsPropOptions options{cfg.learning_rate, cfg.rms_decay, 1e-8};
  RmsPropState critic_state = RmsPropState::for_network(model.critic);
  RmsPropState generator_state = RmsPropState::for_network(model.generator);
  RmsPropState encoder_state = RmsPropState::for_network(model.encoder);

  std::vector<std::size_t> order(train_set.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t critic_steps = 0;
  std::size_t generator_steps = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double critic_sum = 0.0, generator_sum = 0.0;
    std::size_t critic_count = 0, generator_count = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const Matrix x = gather_rows(train_set, std::span(order).subspan(begin, end - begin));

      // Critic: ascend V.
      {
        const Matrix z = sample_latent(cfg, x.rows(), latent_rng);
        const Rng replay = dropout_rng;
        auto grads = objective_gradients(model, x, z, cfg.objective, Mode::Train, dropout_rng, false);
        const std::size_t step = critic_steps + 1;
        if (!std::isfinite(grads.objective)) {
          throw TrainingFault(step, "epoch " + std::to_string(epoch) +
                                        ": non-finite critic objective");
        }
        if (hooks.on_gradients) {
          hooks.on_gradients({UpdateKind::Critic, step, model, x, z, replay, grads});
        }
        negate(grads.critic);
        try {
          rmsprop_step(model.critic, grads.critic, critic_state, options);
        } catch (const TrainingFault& f) {
          throw TrainingFault(step, "epoch " + std::to_string(epoch) + " critic update: " + f.what());
        }
        if (cfg.objective == Objective::Wasserstein) clip_weights(model.critic, cfg.clip_bound);
        critic_steps = step;
        critic_sum += grads.objective;
        ++critic_count;
        if (hooks.after_critic_update) hooks.after_critic_update(model, critic_steps);
      }

      if (critic_steps % cfg.critic_steps_per_gen_step != 0) continue;

      // Generator and encoder: descend V.
      {
        const Matrix z = sample_latent(cfg, x.rows(), latent_rng);
        const Rng replay = dropout_rng;
        auto grads = objective_gradients(model, x, z, cfg.objective, Mode::Train, dropout_rng, true);
        const std::size_t step = generator_steps + 1;
        if (!std::isfinite(grads.objective)) {
          throw TrainingFault(step, "epoch " + std::to_string(epoch) +
                                        ": non-finite generator/encoder objective");
        }
        if (hooks.on_gradients) {
          hooks.on_gradients({UpdateKind::GeneratorEncoder, step, model, x, z, replay, grads});
        }
        try {
          rmsprop_step(model.generator, grads.generator, generator_state, options);
          rmsprop_step(model.encoder, grads.encoder, encoder_state, options);
        } catch (const TrainingFault& f) {
          throw TrainingFault(step, "epoch " + std::to_string(epoch) +
                                        " generator/encoder update: " + f.what());
        }
        generator_steps = step;
        generator_sum += grads.objective;
        ++generator_count;
        if (hooks.after_generator_update) hooks.after_generator_update(model, generator_steps);
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.critic_objective = critic_count ? critic_sum / static_cast<double>(critic_count) : 0.0;
    record.generator_objective =
        generator_count ? generator_sum / static_cast<double>(generator_count) : 0.0;
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    record.critic_steps = critic_steps;
    record.generator_steps = generator_steps;
    result.history.epochs.push_back(record);
    if (hooks.after_epoch) hooks.after_epoch(model, record);
  }
  return result;
}

}  // namespace wbigan
