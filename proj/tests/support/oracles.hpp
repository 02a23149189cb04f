#pragma once

// Independent reference computations used by the unit and acceptance tests. None of these
// call into the code paths they check.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "wbigan/matrix.hpp"
#include "wbigan/mlp.hpp"
#include "wbigan/model.hpp"
#include "wbigan/rng.hpp"
#include "wbigan/sample.hpp"
#include "wbigan/scorer.hpp"

namespace oracle {

using wbigan::Matrix;
using wbigan::Vector;

// |a - n| / max(|a|, |n|, floor). The floor keeps vanishing gradients from turning
// rounding noise into large relative errors.
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Central difference (f(p + h) - f(p - h)) / 2h with p restored afterwards.
double central_difference(double& parameter, double h, const std::function<double()>& f);

// y = W x + b by explicit dot products.
Vector affine(const Matrix& weights, std::span<const double> bias, std::span<const double> x);

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

// Checks backward() for loss = sum(seed .* forward(net, x)) against central differences.
// Up to `per_layer` weights and biases per layer and every input entry are checked. The
// dropout stream is replayed from `dropout` for every evaluation.
GradCheck check_mlp_gradients(const wbigan::Mlp& net, const Matrix& x, const Matrix& seed,
                              wbigan::Mode mode, const wbigan::Rng& dropout, std::size_t per_layer,
                              wbigan::Rng& pick, double h = 1e-5);

// Minimum transport cost between two discrete distributions on the line, by enumerating
// every vertex of the transport polytope (basic feasible solutions = spanning trees of the
// complete bipartite support graph). Exact for up to 5 x 5 outcomes.
class TransportOracle {
 public:
  explicit TransportOracle(std::size_t n = 5);
  double min_cost(std::span<const double> p_pos, std::span<const double> p,
                  std::span<const double> q_pos, std::span<const double> q) const;
  std::size_t tree_count() const noexcept { return trees_.size(); }

 private:
  std::size_t n_;
  std::vector<std::vector<std::size_t>> trees_;  // edges e = i * n + j
};

// Indices flagged by "top k scores, ties to lower sample id" via a full sort.
std::vector<bool> top_k_by_sort(std::span<const double> scores, std::span<const std::size_t> ids,
                                std::size_t k);

// Smallest tau among midpoints of distinct sorted scores maximizing F1 of "score > tau".
double best_midpoint(std::span<const double> scores, std::span<const wbigan::Truth> truths);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};
Confusion count_confusion(std::span<const wbigan::Verdict> verdicts,
                          std::span<const wbigan::Truth> truths);

// L1 sum of |a - b| by plain loop.
double l1(std::span<const double> a, std::span<const double> b);

}  // namespace oracle
