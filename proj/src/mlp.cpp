#include "wbigan/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "wbigan/errors.hpp"

namespace wbigan {

std::size_t Mlp::input_width() const {
  if (layers.empty()) throw StateError("empty network has no input width");
  return layers.front().input_width();
}

std::size_t Mlp::output_width() const {
  if (layers.empty()) throw StateError("empty network has no output width");
  return layers.back().output_width();
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

void Mlp::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].validate();
    if (i > 0 && layers[i].input_width() != layers[i - 1].output_width()) {
      throw ShapeError("layer " + std::to_string(i) + " expects " +
                       std::to_string(layers[i].input_width()) + " inputs but layer " +
                       std::to_string(i - 1) + " produces " +
                       std::to_string(layers[i - 1].output_width()));
    }
  }
}

Mlp make_mlp(std::span<const std::size_t> widths, Activation hidden, Activation output,
             double hidden_dropout, Rng& rng) {
  if (widths.size() < 2) throw ShapeError("an Mlp needs at least input and output widths");
  Mlp net;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    bool last = i + 2 == widths.size();
    net.layers.push_back(DenseLayer::glorot(widths[i], widths[i + 1], last ? output : hidden,
                                            last ? 0.0 : hidden_dropout, rng));
  }
  return net;
}

std::size_t Tape::batch_size() const noexcept {
  return records_.empty() ? 0 : records_.front().input.rows();
}

const LayerRecord& Tape::record(std::size_t layer) const {
  if (records_.empty()) throw StateError("tape is empty: run forward before backward");
  if (layer >= records_.size()) throw ShapeError("tape has no layer " + std::to_string(layer));
  return records_[layer];
}

const Matrix& Tape::layer_output(std::size_t layer) const { return record(layer).pass.output; }

const Matrix& Tape::output() const {
  if (records_.empty()) throw StateError("tape is empty: run forward first");
  return records_.back().pass.output;
}

Matrix forward(const Mlp& net, const Matrix& x, Mode mode, Rng& rng, Tape* tape) {
  net.validate();
  if (x.cols() != net.input_width()) {
    throw ShapeError("network expects " + std::to_string(net.input_width()) + " inputs, got " +
                     shape_string(x));
  }
  if (tape) tape->records_.clear();
  Matrix current = x;
  for (const auto& layer : net.layers) {
    LayerPass pass = dense_pass(layer, current, mode, rng);
    Matrix next = pass.output;
    if (tape) tape->records_.push_back({std::move(current), std::move(pass)});
    current = std::move(next);
  }
  return current;
}

Matrix forward(const Mlp& net, const Matrix& x) {
  Rng unused(0);
  return forward(net, x, Mode::Eval, unused);
}

Vector forward(const Mlp& net, std::span<const double> x) {
  return forward(net, Matrix::from_row(x)).row_vector(0);
}

MlpGrad MlpGrad::zeros_like(const Mlp& net) {
  MlpGrad g;
  g.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.layers.push_back({Matrix(l.weights.rows(), l.weights.cols()), Vector(l.bias.size(), 0.0)});
  }
  return g;
}

void MlpGrad::accumulate(const MlpGrad& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("gradient layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto dst = layers[l].weights.values();
    auto src = other.layers[l].weights.values();
    if (dst.size() != src.size()) throw ShapeError("gradient weight shape mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    auto& db = layers[l].bias;
    const auto& sb = other.layers[l].bias;
    if (db.size() != sb.size()) throw ShapeError("gradient bias shape mismatch");
    for (std::size_t i = 0; i < db.size(); ++i) db[i] += sb[i];
  }
}

bool MlpGrad::all_finite() const noexcept {
  for (const auto& l : layers) {
    if (!l.weights.all_finite()) return false;
    if (!std::all_of(l.bias.begin(), l.bias.end(), [](double v) { return std::isfinite(v); }))
      return false;
  }
  return input.all_finite();
}

MlpGrad backward(const Mlp& net, const Tape& tape, const Matrix& output_seed,
                 std::span<const LayerSeed> layer_seeds, std::vector<std::size_t>* visit_order) {
  if (tape.empty()) throw StateError("backward called before forward: tape is empty");
  if (tape.size() != net.layers.size()) {
    throw StateError("tape was recorded for a network with " + std::to_string(tape.size()) +
                     " layers, got " + std::to_string(net.layers.size()));
  }
  if (!output_seed.same_shape(tape.output())) {
    throw ShapeError("output seed " + shape_string(output_seed) + " does not match output " +
                     shape_string(tape.output()));
  }
  for (const auto& s : layer_seeds) {
    if (s.layer >= tape.size() || !s.gradient.same_shape(tape.layer_output(s.layer))) {
      throw ShapeError("layer seed for layer " + std::to_string(s.layer) + " has wrong shape");
    }
  }

  MlpGrad grad = MlpGrad::zeros_like(net);
  Matrix upstream = output_seed;  // d loss / d output of the current layer
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    if (visit_order) visit_order->push_back(l);
    const DenseLayer& layer = net.layers[l];
    const LayerRecord& rec = tape.record(l);
    for (const auto& s : layer_seeds) {
      if (s.layer != l) continue;
      auto u = upstream.values();
      auto g = s.gradient.values();
      for (std::size_t i = 0; i < u.size(); ++i) u[i] += g[i];
    }

    const std::size_t batch = rec.input.rows();
    const std::size_t outs = layer.output_width();
    const std::size_t ins = layer.input_width();

    // Through dropout and activation: d loss / d pre.
    Matrix dpre(batch, outs);
    {
      auto d = dpre.values();
      auto u = upstream.values();
      auto pre = rec.pass.pre.values();
      const bool masked = !rec.pass.mask.empty();
      for (std::size_t i = 0; i < d.size(); ++i) {
        double g = masked ? u[i] * rec.pass.mask.values()[i] : u[i];
        d[i] = g * layer.activation.derivative(pre[i]);
      }
    }

    LayerGrad& lg = grad.layers[l];
    Matrix dinput(batch, ins);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* dr = dpre.row(b).data();
      const double* xr = rec.input.row(b).data();
      double* dxr = dinput.row(b).data();
      for (std::size_t o = 0; o < outs; ++o) {
        const double g = dr[o];
        if (g == 0.0) continue;
        lg.bias[o] += g;
        double* gw = lg.weights.row(o).data();
        const double* w = layer.weights.row(o).data();
        for (std::size_t k = 0; k < ins; ++k) {
          gw[k] += g * xr[k];
          dxr[k] += g * w[k];
        }
      }
    }
    upstream = std::move(dinput);
  }
  grad.input = std::move(upstream);
  return grad;
}

std::vector<double*> parameter_pointers(Mlp& net) {
  std::vector<double*> ptrs;
  ptrs.reserve(net.parameter_count());
  for (auto& l : net.layers) {
    for (double& w : l.weights.values()) ptrs.push_back(&w);
    for (double& b : l.bias) ptrs.push_back(&b);
  }
  return ptrs;
}

}  // namespace wbigan
