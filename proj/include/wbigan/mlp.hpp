#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wbigan/layer.hpp"
#include "wbigan/matrix.hpp"
#include "wbigan/rng.hpp"

namespace wbigan {

// Feed-forward stack of dense layers.
struct Mlp {
  std::vector<DenseLayer> layers;

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t parameter_count() const noexcept;
  // Throws ShapeError when consecutive layer widths disagree.
  void validate() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

// Layer widths [in, h1, ..., out]; `hidden` applies to every layer but the last.
Mlp make_mlp(std::span<const std::size_t> widths, Activation hidden, Activation output,
             double hidden_dropout, Rng& rng);

struct LayerRecord {
  Matrix input;
  LayerPass pass;
};

// Forward-pass record of an Mlp over one batch. Filled by forward(), read by backward().
class Tape {
 public:
  bool empty() const noexcept { return records_.empty(); }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t batch_size() const noexcept;
  const LayerRecord& record(std::size_t layer) const;
  // Post-dropout activation of `layer` (what the next layer consumed).
  const Matrix& layer_output(std::size_t layer) const;
  const Matrix& output() const;

 private:
  friend Matrix forward(const Mlp&, const Matrix&, Mode, Rng&, Tape*);
  std::vector<LayerRecord> records_;
};

Matrix forward(const Mlp& net, const Matrix& x, Mode mode, Rng& rng, Tape* tape = nullptr);
// Eval-mode conveniences.
Matrix forward(const Mlp& net, const Matrix& x);
Vector forward(const Mlp& net, std::span<const double> x);

struct LayerGrad {
  Matrix weights;
  Vector bias;
};

struct MlpGrad {
  std::vector<LayerGrad> layers;
  Matrix input;  // d loss / d network input, one row per batch sample

  static MlpGrad zeros_like(const Mlp& net);
  // Adds parameter gradients (the input gradient is left untouched).
  void accumulate(const MlpGrad& other);
  bool all_finite() const noexcept;
};

// Extra gradient injected at the output of an intermediate layer.
struct LayerSeed {
  std::size_t layer;
  Matrix gradient;
};

// Reverse pass over `tape`. `output_seed` is d loss / d network output (batch x out).
// `layer_seeds` add gradient at intermediate outputs. When `visit_order` is given,
// the layer indices are appended in the order the backward pass processed them.
MlpGrad backward(const Mlp& net, const Tape& tape, const Matrix& output_seed,
                 std::span<const LayerSeed> layer_seeds = {},
                 std::vector<std::size_t>* visit_order = nullptr);

// Visits (parameter, gradient) pairs in a fixed order: layer by layer, weights then bias.
template <typename Fn>
void for_each_parameter(Mlp& net, const MlpGrad& grad, Fn&& fn) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto w = net.layers[l].weights.values();
    auto gw = grad.layers[l].weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) fn(w[i], gw[i]);
    auto& b = net.layers[l].bias;
    const auto& gb = grad.layers[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i) fn(b[i], gb[i]);
  }
}

// Flat view over all parameters of `net` in for_each_parameter order.
std::vector<double*> parameter_pointers(Mlp& net);

}  // namespace wbigan
