#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "doctest.h"
#include "support/oracles.hpp"
#include "wbigan/checkpoint.hpp"
#include "wbigan/errors.hpp"
#include "wbigan/layer.hpp"
#include "wbigan/matrix.hpp"
#include "wbigan/mlp.hpp"
#include "wbigan/optimizer.hpp"
#include "wbigan/rng.hpp"

using namespace wbigan;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

DenseLayer random_layer(std::size_t in, std::size_t out, Activation act, double p, Rng& rng) {
  DenseLayer layer{random_matrix(out, in, rng), Vector(out), act, p};
  for (double& b : layer.bias) b = rng.uniform(-1.0, 1.0);
  return layer;
}

}  // namespace

TEST_SUITE("tensor-core") {

TEST_CASE("matrix construction and shape helpers") {
  Matrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6);
  CHECK(m.row_vector(0) == Vector{1, 2, 3});
  CHECK(m.column_slice(1, 2) == Matrix{{2, 3}, {5, 6}});
  CHECK_THROWS_AS(m.column_slice(2, 2), ShapeError);
  CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);

  Matrix a{{1}, {2}};
  CHECK(hconcat(a, m) == Matrix{{1, 1, 2, 3}, {2, 4, 5, 6}});
  CHECK_THROWS_AS(hconcat(Matrix(3, 1), m), ShapeError);

  const std::size_t idx[] = {1, 0, 1};
  CHECK(gather_rows(m, idx) == Matrix{{4, 5, 6}, {1, 2, 3}, {4, 5, 6}});
  const std::size_t bad[] = {2};
  CHECK_THROWS_AS(gather_rows(m, bad), ShapeError);

  CHECK(Matrix::identity(2) == Matrix{{1, 0}, {0, 1}});
  m(0, 0) = std::nan("");
  CHECK_FALSE(m.all_finite());
}

TEST_CASE("rng streams are reproducible and forks are independent") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(7);
  Rng f1 = c.fork(1), f2 = c.fork(2);
  CHECK(f1.next_u64() != f2.next_u64());
  CHECK(c.counter() == 0);

  Rng u(3);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double v = u.uniform();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);

  Rng bins(11);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[bins.below(5)];
  for (int n : counts) CHECK(std::abs(n - 10000) < 500);

  Rng g(5);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double v = g.normal();
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("dense_forward identity case") {
  DenseLayer layer{Matrix::identity(2), Vector{0, 0}, Activation::identity(), 0.0};
  Rng rng(1);
  const Vector x{3, -1};
  CHECK(dense_forward(layer, x, Mode::Eval, rng) == Vector{3, -1});
  CHECK(dense_forward(layer, x, Mode::Train, rng) == Vector{3, -1});
}

TEST_CASE("dense_forward of the zero vector returns the bias") {
  Rng rng(2);
  DenseLayer layer = random_layer(5, 4, Activation::identity(), 0.3, rng);
  const Vector zero(5, 0.0);
  CHECK(dense_forward(layer, zero, Mode::Eval, rng) == layer.bias);
}

TEST_CASE("dense_forward matches by-hand dot products") {
  Rng rng(3);
  for (auto act : {Activation::identity(), Activation::relu(), Activation::leaky_relu(0.2),
                   Activation::tanh(), Activation::sigmoid()}) {
    DenseLayer layer = random_layer(3, 4, act, 0.0, rng);
    Vector x{0.3, -1.2, 0.7};
    Vector expect = oracle::affine(layer.weights, layer.bias, x);
    for (double& v : expect) {
      switch (act.kind) {
        case ActivationKind::Identity: break;
        case ActivationKind::ReLU: v = v > 0 ? v : 0.0; break;
        case ActivationKind::LeakyReLU: v = v > 0 ? v : 0.2 * v; break;
        case ActivationKind::Tanh: v = std::tanh(v); break;
        case ActivationKind::Sigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
      }
    }
    const Vector got = dense_forward(layer, x, Mode::Eval, rng);
    REQUIRE(got.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-14));
  }
}

TEST_CASE("dense_forward rejects mismatched input") {
  Rng rng(4);
  DenseLayer layer = random_layer(3, 2, Activation::identity(), 0.0, rng);
  const Vector x{1, 2};
  CHECK_THROWS_AS(dense_forward(layer, x, Mode::Eval, rng), ShapeError);
  DenseLayer broken = layer;
  broken.bias.pop_back();
  CHECK_THROWS_AS(broken.validate(), ShapeError);
  broken = layer;
  broken.dropout_rate = 1.0;
  CHECK_THROWS_AS(broken.validate(), DomainError);
}

TEST_CASE("eval mode is deterministic and consumes no randomness") {
  Rng init(5);
  DenseLayer layer = random_layer(6, 8, Activation::leaky_relu(), 0.5, init);
  Matrix x = random_matrix(4, 6, init);
  Rng a(9), b(1234);
  CHECK(dense_forward(layer, x, Mode::Eval, a) == dense_forward(layer, x, Mode::Eval, b));
  CHECK(a.counter() == 0);
}

TEST_CASE("inverted dropout masks are 0 or 1/(1-p) and preserve the expectation") {
  Rng init(6);
  const double p = 0.2;
  DenseLayer layer = random_layer(3, 2, Activation::identity(), p, init);
  const Matrix x = Matrix::from_row(Vector{0.5, -0.25, 1.0});
  const Matrix eval = dense_forward(layer, x, Mode::Eval, init);

  Rng rng(7);
  const LayerPass pass = dense_pass(layer, x, Mode::Train, rng);
  for (double m : pass.mask.values()) CHECK((m == 0.0 || m == doctest::Approx(1.0 / (1.0 - p))));

  const int draws = 20000;
  Vector mean(2, 0.0);
  for (int i = 0; i < draws; ++i) {
    Matrix y = dense_forward(layer, x, Mode::Train, rng);
    for (std::size_t j = 0; j < 2; ++j) mean[j] += y(0, j) / draws;
  }
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(mean[j] - eval(0, j)) <= 0.02 * std::abs(eval(0, j)));
  }
}

TEST_CASE("glorot initialization range") {
  Rng rng(8);
  DenseLayer layer = DenseLayer::glorot(30, 20, Activation::relu(), 0.0, rng);
  const double a = std::sqrt(6.0 / 50.0);
  double hi = 0.0;
  for (double w : layer.weights.values()) {
    CHECK(std::abs(w) <= a);
    hi = std::max(hi, std::abs(w));
  }
  CHECK(hi > 0.9 * a);
  for (double b : layer.bias) CHECK(b == 0.0);
}

TEST_CASE("backward of a constant head yields zero gradients") {
  Rng rng(9);
  const std::size_t widths[] = {4, 6, 1};
  Mlp net = make_mlp(widths, Activation::tanh(), Activation::identity(), 0.0, rng);
  for (double& w : net.layers[1].weights.values()) w = 0.0;
  net.layers[1].bias = {2.5};
  Matrix x = random_matrix(3, 4, rng);
  Tape tape;
  Matrix y = forward(net, x, Mode::Eval, rng, &tape);
  for (double v : y.values()) CHECK(v == 2.5);
  MlpGrad g = backward(net, tape, Matrix(3, 1, 1.0));
  for (double v : g.input.values()) CHECK(v == 0.0);
  for (double v : g.layers[0].weights.values()) CHECK(v == 0.0);
  for (double v : g.layers[0].bias) CHECK(v == 0.0);
}

TEST_CASE("backward of a linear map gives W^T seed") {
  Rng rng(10);
  DenseLayer layer = random_layer(3, 2, Activation::identity(), 0.0, rng);
  layer.bias = {0.0, 0.0};
  Mlp net{{layer}};
  const Matrix x = Matrix::from_row(Vector{1.0, 2.0, 3.0});
  const Matrix seed = Matrix::from_row(Vector{0.7, -1.3});
  Tape tape;
  forward(net, x, Mode::Eval, rng, &tape);
  MlpGrad g = backward(net, tape, seed);
  for (std::size_t c = 0; c < 3; ++c) {
    const double expect = layer.weights(0, c) * 0.7 + layer.weights(1, c) * -1.3;
    CHECK(g.input(0, c) == doctest::Approx(expect).epsilon(1e-15));
  }
  // dL/dW = seed x^T
  CHECK(g.layers[0].weights(1, 2) == doctest::Approx(-1.3 * 3.0));
}

TEST_CASE("backward before forward is a state error") {
  Rng rng(11);
  const std::size_t widths[] = {2, 3, 1};
  Mlp net = make_mlp(widths, Activation::relu(), Activation::identity(), 0.0, rng);
  Tape empty;
  CHECK_THROWS_AS(backward(net, empty, Matrix(1, 1, 1.0)), StateError);
  CHECK_THROWS_AS(empty.output(), StateError);
}

TEST_CASE("backward visits every layer once in reverse order") {
  Rng rng(12);
  const std::size_t widths[] = {3, 5, 4, 2, 1};
  Mlp net = make_mlp(widths, Activation::leaky_relu(), Activation::identity(), 0.1, rng);
  Tape tape;
  forward(net, random_matrix(2, 3, rng), Mode::Train, rng, &tape);
  std::vector<std::size_t> order;
  backward(net, tape, Matrix(2, 1, 1.0), {}, &order);
  CHECK(order == std::vector<std::size_t>{3, 2, 1, 0});
}

TEST_CASE("backward rejects seeds of the wrong shape") {
  Rng rng(13);
  const std::size_t widths[] = {3, 4, 2};
  Mlp net = make_mlp(widths, Activation::relu(), Activation::identity(), 0.0, rng);
  Tape tape;
  forward(net, random_matrix(2, 3, rng), Mode::Eval, rng, &tape);
  CHECK_THROWS_AS(backward(net, tape, Matrix(2, 3)), ShapeError);
  const LayerSeed bad[] = {{0, Matrix(2, 5)}};
  CHECK_THROWS_AS(backward(net, tape, Matrix(2, 2), bad), ShapeError);
}

TEST_CASE("three-layer MLP gradients match central differences") {
  Rng rng(14);
  for (auto act : {Activation::leaky_relu(0.2), Activation::tanh(), Activation::sigmoid()}) {
    const std::size_t widths[] = {5, 7, 6, 3};
    Mlp net = make_mlp(widths, act, Activation::sigmoid(), 0.25, rng);
    Matrix x = random_matrix(4, 5, rng);
    Matrix seed = random_matrix(4, 3, rng);
    for (auto mode : {Mode::Eval, Mode::Train}) {
      Rng pick(15);
      auto result = oracle::check_mlp_gradients(net, x, seed, mode, Rng(16), 1000, pick);
      CHECK(result.checked == net.parameter_count() + x.size());
      CHECK(result.max_relative_error < 1e-4);
    }
  }
}

TEST_CASE("gradients injected at intermediate layers match central differences") {
  Rng rng(17);
  const std::size_t widths[] = {4, 6, 5, 1};
  Mlp net = make_mlp(widths, Activation::tanh(), Activation::identity(), 0.0, rng);
  Matrix x = random_matrix(3, 4, rng);
  Matrix out_seed = random_matrix(3, 1, rng);
  std::vector<LayerSeed> seeds{{0, random_matrix(3, 6, rng)}, {1, random_matrix(3, 5, rng)}};

  Tape tape;
  forward(net, x, Mode::Eval, rng, &tape);
  MlpGrad g = backward(net, tape, out_seed, seeds);

  Mlp probe = net;
  auto loss = [&] {
    Rng r(0);
    Tape t;
    forward(probe, x, Mode::Eval, r, &t);
    double s = 0.0;
    for (std::size_t i = 0; i < t.output().size(); ++i) s += out_seed.values()[i] * t.output().values()[i];
    for (const auto& ls : seeds) {
      const Matrix& a = t.layer_output(ls.layer);
      for (std::size_t i = 0; i < a.size(); ++i) s += ls.gradient.values()[i] * a.values()[i];
    }
    return s;
  };
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto w = probe.layers[l].weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      worst = std::max(worst, oracle::relative_error(g.layers[l].weights.values()[i],
                                                      oracle::central_difference(w[i], 1e-5, loss)));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("rmsprop: zero gradient leaves parameters and decays state") {
  Rng rng(18);
  const std::size_t widths[] = {2, 3, 1};
  Mlp net = make_mlp(widths, Activation::relu(), Activation::identity(), 0.0, rng);
  const Mlp before = net;
  RmsPropState state = RmsPropState::for_network(net);
  for (auto& l : state.mean_square) l.weights.fill(0.5);
  rmsprop_step(net, MlpGrad::zeros_like(net), state, {});
  CHECK(net == before);
  for (double s : state.mean_square[0].weights.values()) CHECK(s == doctest::Approx(0.99 * 0.5));
  CHECK(state.step == 1);
}

TEST_CASE("rmsprop: two steps match the hand recurrence") {
  DenseLayer layer{Matrix{{1.0}}, Vector{0.0}, Activation::identity(), 0.0};
  Mlp net{{layer}};
  RmsPropState state = RmsPropState::for_network(net);
  MlpGrad g = MlpGrad::zeros_like(net);
  g.layers[0].weights(0, 0) = 0.5;
  const RmsPropOptions opt{0.1, 0.9, 1e-8};
  rmsprop_step(net, g, state, opt);
  rmsprop_step(net, g, state, opt);

  double p = 1.0, s = 0.0;
  for (int i = 0; i < 2; ++i) {
    s = 0.9 * s + (1.0 - 0.9) * 0.5 * 0.5;
    p -= 0.1 * 0.5 / (std::sqrt(s) + 1e-8);
  }
  CHECK(net.layers[0].weights(0, 0) == p);
  CHECK(state.mean_square[0].weights(0, 0) == s);
  // Hand values: s1 = 0.025, s2 = 0.0475.
  CHECK(s == doctest::Approx(0.0475).epsilon(1e-15));
}

TEST_CASE("rmsprop: zero learning rate leaves parameters") {
  Rng rng(19);
  const std::size_t widths[] = {3, 2};
  Mlp net = make_mlp(widths, Activation::relu(), Activation::identity(), 0.0, rng);
  const Mlp before = net;
  RmsPropState state = RmsPropState::for_network(net);
  MlpGrad g = MlpGrad::zeros_like(net);
  g.layers[0].weights.fill(1.0);
  rmsprop_step(net, g, state, {0.0, 0.99, 1e-8});
  CHECK(net == before);
}

TEST_CASE("rmsprop: non-finite gradient is a training fault with the step index") {
  Rng rng(20);
  const std::size_t widths[] = {3, 2};
  Mlp net = make_mlp(widths, Activation::relu(), Activation::identity(), 0.0, rng);
  RmsPropState state = RmsPropState::for_network(net);
  MlpGrad g = MlpGrad::zeros_like(net);
  rmsprop_step(net, g, state, {});
  rmsprop_step(net, g, state, {});
  const Mlp before = net;
  g.layers[0].bias[1] = std::numeric_limits<double>::infinity();
  try {
    rmsprop_step(net, g, state, {});
    FAIL("expected TrainingFault");
  } catch (const TrainingFault& f) {
    CHECK(f.step() == 3);
  }
  CHECK(net == before);
  CHECK(state.step == 2);

  MlpGrad wrong = MlpGrad::zeros_like(net);
  wrong.layers.pop_back();
  CHECK_THROWS_AS(rmsprop_step(net, wrong, state, {}), ShapeError);
}

TEST_CASE("network json round trip is bit exact") {
  Rng rng(21);
  const std::size_t widths[] = {5, 9, 4, 2};
  Mlp net = make_mlp(widths, Activation::leaky_relu(0.2), Activation::sigmoid(), 0.2, rng);
  for (double& b : net.layers[1].bias) b = rng.normal() / 3.0;
  const Mlp back = mlp_from_json(nlohmann::json::parse(mlp_to_json(net).dump()));
  CHECK(back == net);
  Matrix x = random_matrix(3, 5, rng);
  CHECK(forward(back, x) == forward(net, x));

  nlohmann::json doc = mlp_to_json(net);
  doc["layers"][0]["weights"].erase(0);
  CHECK_THROWS_AS(mlp_from_json(doc), ShapeError);
}

}  // TEST_SUITE
