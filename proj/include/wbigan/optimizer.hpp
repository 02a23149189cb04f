#pragma once

#include <cstddef>
#include <vector>

#include "wbigan/mlp.hpp"

namespace wbigan {

// Running mean of squared gradients, one slot per parameter.
struct RmsPropState {
  std::vector<LayerGrad> mean_square;
  std::size_t step = 0;

  static RmsPropState for_network(const Mlp& net);
};

struct RmsPropOptions {
  double learning_rate = 5e-5;
  double decay = 0.99;
  double epsilon = 1e-8;
};

// One descent step: s <- decay*s + (1-decay)*g^2, p <- p - lr * g / (sqrt(s) + eps).
// Throws TrainingFault (with the 1-based step index) on a non-finite gradient; the
// network and state are left untouched in that case.
void rmsprop_step(Mlp& net, const MlpGrad& grad, RmsPropState& state,
                  const RmsPropOptions& options);

}  // namespace wbigan
