#include "wbigan/optimizer.hpp"

#include <cmath>

#include "wbigan/errors.hpp"

namespace wbigan {

RmsPropState RmsPropState::for_network(const Mlp& net) {
  return RmsPropState{MlpGrad::zeros_like(net).layers, 0};
}

void rmsprop_step(Mlp& net, const MlpGrad& grad, RmsPropState& state,
                  const RmsPropOptions& options) {
  const std::size_t step = state.step + 1;
  if (grad.layers.size() != net.layers.size() || state.mean_square.size() != net.layers.size()) {
    throw ShapeError("optimizer: parameter, gradient and state layer counts differ");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    if (!grad.layers[l].weights.same_shape(layer.weights) ||
        !state.mean_square[l].weights.same_shape(layer.weights) ||
        grad.layers[l].bias.size() != layer.bias.size() ||
        state.mean_square[l].bias.size() != layer.bias.size()) {
      throw ShapeError("optimizer: shape mismatch in layer " + std::to_string(l));
    }
    for (double g : grad.layers[l].weights.values()) {
      if (!std::isfinite(g)) throw TrainingFault(step, "non-finite weight gradient in layer " + std::to_string(l));
    }
    for (double g : grad.layers[l].bias) {
      if (!std::isfinite(g)) throw TrainingFault(step, "non-finite bias gradient in layer " + std::to_string(l));
    }
  }

  const double lr = options.learning_rate;
  const double decay = options.decay;
  const double eps = options.epsilon;
  auto update = [&](double& p, double& s, double g) {
    s = decay * s + (1.0 - decay) * g * g;
    p -= lr * g / (std::sqrt(s) + eps);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto w = net.layers[l].weights.values();
    auto gw = grad.layers[l].weights.values();
    auto sw = state.mean_square[l].weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) update(w[i], sw[i], gw[i]);
    auto& b = net.layers[l].bias;
    const auto& gb = grad.layers[l].bias;
    auto& sb = state.mean_square[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i) update(b[i], sb[i], gb[i]);
  }
  state.step = step;
}

}  // namespace wbigan
