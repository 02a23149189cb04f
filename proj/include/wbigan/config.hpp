#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace wbigan {

enum class Objective { Wasserstein, ClassicalCE };

std::string to_string(Objective objective);
Objective objective_from_string(const std::string& text);

// Hidden-layer layout of the three networks. Output layers are implied by the data and
// latent widths.
struct Architecture {
  std::vector<std::size_t> generator_hidden{64, 128};
  std::vector<std::size_t> encoder_hidden{128, 64};
  std::vector<std::size_t> critic_hidden{256, 128, 64};
  double leaky_slope = 0.2;
  double critic_dropout = 0.2;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct TrainConfig {
  std::size_t latent_dim = 32;
  double clip_bound = 0.01;
  double learning_rate = 5e-5;
  double rms_decay = 0.99;
  std::size_t critic_steps_per_gen_step = 5;
  std::size_t batch_size = 50;
  std::size_t epochs = 100;
  std::uint64_t seed = 42;
  Objective objective = Objective::Wasserstein;
  // One weight per critic tap, ordered far-from-output first.
  std::vector<double> lambda_weights{0.1, 0.3};
  Architecture architecture;

  // Throws DomainError naming the offending field.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Checks the anomaly-score weights: each >= 0, nondecreasing, sum < 1.
void validate_lambda(const std::vector<double>& lambda);

}  // namespace wbigan
