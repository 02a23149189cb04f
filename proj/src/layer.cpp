#include "wbigan/layer.hpp"

#include <cmath>

#include "wbigan/errors.hpp"

namespace wbigan {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double Activation::apply(double pre) const noexcept {
  switch (kind) {
    case ActivationKind::Identity: return pre;
    case ActivationKind::ReLU: return pre > 0.0 ? pre : 0.0;
    case ActivationKind::LeakyReLU: return pre > 0.0 ? pre : slope * pre;
    case ActivationKind::Tanh: return std::tanh(pre);
    case ActivationKind::Sigmoid: return wbigan::sigmoid(pre);
  }
  return pre;
}

double Activation::derivative(double pre) const noexcept {
  switch (kind) {
    case ActivationKind::Identity: return 1.0;
    case ActivationKind::ReLU: return pre > 0.0 ? 1.0 : 0.0;
    case ActivationKind::LeakyReLU: return pre > 0.0 ? 1.0 : slope;
    case ActivationKind::Tanh: {
      double t = std::tanh(pre);
      return 1.0 - t * t;
    }
    case ActivationKind::Sigmoid: {
      double s = wbigan::sigmoid(pre);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

std::string Activation::tag() const {
  switch (kind) {
    case ActivationKind::Identity: return "identity";
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::LeakyReLU: return "leaky_relu";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation Activation::from_tag(const std::string& tag, double slope) {
  if (tag == "identity") return identity();
  if (tag == "relu") return relu();
  if (tag == "leaky_relu") return leaky_relu(slope);
  if (tag == "tanh") return tanh();
  if (tag == "sigmoid") return Activation::sigmoid();
  throw DomainError("unknown activation tag '" + tag + "'");
}

void DenseLayer::validate() const {
  if (bias.size() != weights.rows()) {
    throw ShapeError("bias length " + std::to_string(bias.size()) + " does not match " +
                     std::to_string(weights.rows()) + " layer outputs");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw DomainError("dropout rate must lie in [0, 1), got " + std::to_string(dropout_rate));
  }
}

DenseLayer DenseLayer::glorot(std::size_t inputs, std::size_t outputs, Activation activation,
                              double dropout_rate, Rng& rng) {
  DenseLayer layer{Matrix(outputs, inputs), Vector(outputs, 0.0), activation, dropout_rate};
  const double a = std::sqrt(6.0 / static_cast<double>(inputs + outputs));
  for (double& w : layer.weights.values()) w = rng.uniform(-a, a);
  layer.validate();
  return layer;
}

LayerPass dense_pass(const DenseLayer& layer, const Matrix& x, Mode mode, Rng& rng) {
  layer.validate();
  if (x.cols() != layer.input_width()) {
    throw ShapeError("dense layer expects " + std::to_string(layer.input_width()) +
                     " inputs, got " + shape_string(x));
  }
  const std::size_t batch = x.rows();
  const std::size_t outs = layer.output_width();
  const std::size_t ins = layer.input_width();

  LayerPass pass{Matrix(batch, outs), Matrix(), Matrix(batch, outs)};
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xr = x.row(b).data();
    double* pr = pass.pre.row(b).data();
    for (std::size_t o = 0; o < outs; ++o) {
      const double* wr = layer.weights.row(o).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < ins; ++k) acc += wr[k] * xr[k];
      pr[o] = acc + layer.bias[o];
    }
  }
  for (std::size_t i = 0; i < pass.pre.size(); ++i) {
    pass.output.values()[i] = layer.activation.apply(pass.pre.values()[i]);
  }

  if (mode == Mode::Train && layer.dropout_rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - layer.dropout_rate);
    pass.mask = Matrix(batch, outs);
    auto mask = pass.mask.values();
    auto out = pass.output.values();
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = rng.uniform() < layer.dropout_rate ? 0.0 : keep_scale;
      out[i] *= mask[i];
    }
  }
  return pass;
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& x, Mode mode, Rng& rng) {
  return dense_pass(layer, x, mode, rng).output;
}

Vector dense_forward(const DenseLayer& layer, std::span<const double> x, Mode mode, Rng& rng) {
  return dense_pass(layer, Matrix::from_row(x), mode, rng).output.row_vector(0);
}

}  // namespace wbigan
