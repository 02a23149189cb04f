#include "wbigan/config.hpp"

#include <cmath>
#include <numeric>

#include "wbigan/errors.hpp"

namespace wbigan {

std::string to_string(Objective objective) {
  return objective == Objective::Wasserstein ? "wasserstein" : "classical";
}

Objective objective_from_string(const std::string& text) {
  if (text == "wasserstein") return Objective::Wasserstein;
  if (text == "classical" || text == "classical_ce") return Objective::ClassicalCE;
  throw DomainError("unknown objective '" + text + "' (expected wasserstein or classical)");
}

void validate_lambda(const std::vector<double>& lambda) {
  double sum = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] >= 0.0) || !std::isfinite(lambda[i])) {
      throw DomainError("lambda weights must be finite and nonnegative");
    }
    if (i > 0 && lambda[i] < lambda[i - 1]) {
      throw DomainError("lambda weights must be nondecreasing toward the critic output");
    }
    sum += lambda[i];
  }
  if (!(sum < 1.0)) throw DomainError("lambda weights must sum to less than 1");
}

void TrainConfig::validate() const {
  if (latent_dim == 0) throw DomainError("latent_dim must be positive");
  if (!(clip_bound > 0.0) || !std::isfinite(clip_bound)) throw DomainError("clip_bound must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw DomainError("learning_rate must be finite and nonnegative");
  }
  if (!(rms_decay >= 0.0 && rms_decay < 1.0)) throw DomainError("rms_decay must lie in [0, 1)");
  if (critic_steps_per_gen_step == 0) throw DomainError("critic_steps must be positive");
  if (batch_size == 0) throw DomainError("batch_size must be positive");
  validate_lambda(lambda_weights);
  const auto& a = architecture;
  if (a.critic_hidden.size() < lambda_weights.size()) {
    throw DomainError("critic has fewer hidden layers than lambda weights (one tap per weight)");
  }
  for (const auto* widths : {&a.generator_hidden, &a.encoder_hidden, &a.critic_hidden}) {
    for (std::size_t w : *widths) {
      if (w == 0) throw DomainError("hidden layer widths must be positive");
    }
  }
  if (!(a.critic_dropout >= 0.0 && a.critic_dropout < 1.0)) {
    throw DomainError("critic_dropout must lie in [0, 1)");
  }
  if (!(a.leaky_slope >= 0.0) || !std::isfinite(a.leaky_slope)) {
    throw DomainError("leaky_slope must be finite and nonnegative");
  }
}

}  // namespace wbigan
