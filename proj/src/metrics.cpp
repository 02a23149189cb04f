#include "wbigan/metrics.hpp"

#include "wbigan/errors.hpp"

namespace wbigan {

double f1_score(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

EvalMetrics compute_metrics(std::span<const Verdict> verdicts, std::span<const Truth> truths) {
  if (verdicts.size() != truths.size()) {
    throw ShapeError("compute_metrics: " + std::to_string(verdicts.size()) + " verdicts for " +
                     std::to_string(truths.size()) + " labels");
  }
  EvalMetrics m;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const bool flagged = verdicts[i] == Verdict::Anomalous;
    const bool positive = truths[i] == Truth::Anomalous;
    if (flagged && positive) ++m.true_positives;
    else if (flagged) ++m.false_positives;
    else if (positive) ++m.false_negatives;
    else ++m.true_negatives;
  }
  const std::size_t predicted = m.true_positives + m.false_positives;
  const std::size_t actual = m.true_positives + m.false_negatives;
  if (predicted > 0) {
    m.precision = static_cast<double>(m.true_positives) / static_cast<double>(predicted);
  } else {
    m.precision_degenerate = true;
  }
  if (actual > 0) {
    m.recall = static_cast<double>(m.true_positives) / static_cast<double>(actual);
  } else {
    m.recall_degenerate = true;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = f1_score(m.precision, m.recall);
  } else {
    m.f1_degenerate = true;
  }
  return m;
}

}  // namespace wbigan
