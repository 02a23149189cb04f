#pragma once

#include <cstddef>
#include <span>

#include "wbigan/sample.hpp"
#include "wbigan/scorer.hpp"

namespace wbigan {

// Confusion counts with anomalous as the positive class. A ratio whose denominator is zero
// is reported as 0 and flagged degenerate.
struct EvalMetrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;

  std::size_t total() const noexcept {
    return true_positives + false_positives + false_negatives + true_negatives;
  }
  bool degenerate() const noexcept { return precision_degenerate || recall_degenerate || f1_degenerate; }

  friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

// 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall) noexcept;

EvalMetrics compute_metrics(std::span<const Verdict> verdicts, std::span<const Truth> truths);

}  // namespace wbigan
