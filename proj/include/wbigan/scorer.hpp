#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wbigan/model.hpp"
#include "wbigan/sample.hpp"

namespace wbigan {

struct ScoreReport {
  std::size_t sample_id = 0;
  double residual = 0.0;              // L_R
  std::vector<double> discrimination;  // L_D1 .. L_Dn, one per critic tap
  double score = 0.0;                 // S

  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

// S = (1 - sum lambda) * residual + sum lambda_i * discrimination_i.
double combine_score(double residual, std::span<const double> discrimination,
                     std::span<const double> lambda);

// L1 distance between a sample and its reconstruction.
double residual_loss(std::span<const double> x, std::span<const double> x_hat);

// Per tap i: sum |f_i(x, z) - f_i(G(z), z)|, critic in Eval mode.
std::vector<double> discrimination_loss(const BiganModel& m, std::span<const double> x,
                                        std::span<const double> z);

// Single pass: z = E(x), x_hat = G(z), then residual and discrimination terms.
ScoreReport anomaly_score(const BiganModel& m, std::span<const double> x,
                          std::span<const double> lambda, std::size_t sample_id = 0);

// Batched anomaly_score over rows of `x`; sample ids are taken from `ids` (row index if empty).
// Work is split across `threads` workers; the reports do not depend on the split.
std::vector<ScoreReport> score_batch(const BiganModel& m, const Matrix& x,
                                     std::span<const double> lambda,
                                     std::span<const std::size_t> ids = {},
                                     std::size_t threads = 1);
std::vector<ScoreReport> score_samples(const BiganModel& m, std::span<const EncodedSample> samples,
                                       std::span<const double> lambda, std::size_t threads = 1);

// Throws StateError when every score in a calibration batch is identical, the signature of
// an untrained or collapsed model.
void check_not_degenerate(std::span<const ScoreReport> reports);

struct SearchResult {
  Vector z;                    // best latent point visited
  double best_loss = 0.0;
  std::vector<double> losses;  // loss at each visited point, in order
};

// Iterative latent search: start from z_1 ~ N(0, I) and take `steps` loss evaluations,
// moving z by fixed-step gradient descent on the anomaly-score loss with the model frozen.
SearchResult anogan_search(const BiganModel& m, std::span<const double> x,
                           std::span<const double> lambda, std::size_t steps, double step_size,
                           Rng& rng);

// Anomaly-score loss of x against latent point z and its gradient with respect to z.
struct LatentLoss {
  double loss = 0.0;
  Vector gradient;
};
LatentLoss latent_loss(const BiganModel& m, std::span<const double> x, std::span<const double> z,
                       std::span<const double> lambda);

enum class Verdict { Normal, Anomalous };

inline const char* to_string(Verdict v) noexcept { return v == Verdict::Normal ? "normal" : "anomalous"; }
Verdict verdict_from_string(const std::string& text);

class ThresholdRule {
 public:
  enum class Kind { FixedThreshold, ContaminationRate };

  static ThresholdRule fixed(double tau);
  static ThresholdRule contamination(double rate);
  // "threshold:<tau>" or "contamination:<rate>".
  static ThresholdRule parse(const std::string& text);

  Kind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }
  std::string to_string() const;

 private:
  ThresholdRule(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

// Number flagged by the top-c rule: floor(c * n + 0.5).
std::size_t contamination_quota(double rate, std::size_t n);

// FixedThreshold: anomalous iff score > tau. ContaminationRate: the quota highest scores,
// ties broken by ascending sample_id.
std::vector<Verdict> apply_threshold(std::span<const ScoreReport> reports, const ThresholdRule& rule);

// tau maximizing F1 over midpoints between consecutive distinct sorted scores; the smallest
// such tau wins ties. Throws DomainError for single-class input or when all scores are equal.
double calibrate_threshold(std::span<const ScoreReport> reports, std::span<const Truth> truths);

}  // namespace wbigan
