#pragma once

#include <span>
#include <string>

#include "wbigan/matrix.hpp"
#include "wbigan/rng.hpp"

namespace wbigan {

enum class ActivationKind { Identity, ReLU, LeakyReLU, Tanh, Sigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::Identity;
  double slope = 0.2;  // LeakyReLU negative-side slope; ignored otherwise

  static Activation identity() { return {ActivationKind::Identity, 0.0}; }
  static Activation relu() { return {ActivationKind::ReLU, 0.0}; }
  static Activation leaky_relu(double slope = 0.2) { return {ActivationKind::LeakyReLU, slope}; }
  static Activation tanh() { return {ActivationKind::Tanh, 0.0}; }
  static Activation sigmoid() { return {ActivationKind::Sigmoid, 0.0}; }

  double apply(double pre) const noexcept;
  // d activation / d pre, evaluated at `pre`.
  double derivative(double pre) const noexcept;

  std::string tag() const;
  static Activation from_tag(const std::string& tag, double slope = 0.2);

  friend bool operator==(const Activation&, const Activation&) = default;
};

double sigmoid(double x) noexcept;

enum class Mode { Train, Eval };

// Fully connected layer y = activation(W x + b), followed by inverted dropout in Train mode.
struct DenseLayer {
  Matrix weights;  // outputs x inputs
  Vector bias;     // outputs
  Activation activation;
  double dropout_rate = 0.0;

  std::size_t input_width() const noexcept { return weights.cols(); }
  std::size_t output_width() const noexcept { return weights.rows(); }
  std::size_t parameter_count() const noexcept { return weights.size() + bias.size(); }

  // Throws ShapeError / DomainError if the invariants do not hold.
  void validate() const;

  // Glorot-uniform weights in [-a, a], a = sqrt(6 / (fan_in + fan_out)); zero bias.
  static DenseLayer glorot(std::size_t inputs, std::size_t outputs, Activation activation,
                           double dropout_rate, Rng& rng);

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Intermediate values of one layer pass over a batch, kept for backpropagation.
struct LayerPass {
  Matrix pre;     // W x + b
  Matrix mask;    // dropout multipliers (0 or 1/(1-p)); empty when no dropout was applied
  Matrix output;  // activation(pre) * mask
};

LayerPass dense_pass(const DenseLayer& layer, const Matrix& x, Mode mode, Rng& rng);

Matrix dense_forward(const DenseLayer& layer, const Matrix& x, Mode mode, Rng& rng);
Vector dense_forward(const DenseLayer& layer, std::span<const double> x, Mode mode, Rng& rng);

}  // namespace wbigan
