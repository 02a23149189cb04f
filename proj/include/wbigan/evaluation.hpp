#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wbigan/metrics.hpp"
#include "wbigan/model.hpp"
#include "wbigan/sample.hpp"
#include "wbigan/scorer.hpp"

namespace wbigan {

// The contamination grid of the reference experiments.
inline constexpr double kReferenceRates[] = {0.2, 0.1, 0.05, 0.01};

struct SweepRow {
  double rate = 0.0;
  std::size_t test_size = 0;
  std::size_t anomalies = 0;  // anomalous samples in the drawn test set
  std::size_t flagged = 0;
  EvalMetrics metrics;
};

// For each rate: draw a test set at that contamination from the scored pool, flag the top
// rate fraction and compute metrics. `pool_reports[i]` and `pool_truths[i]` describe the
// same pool sample.
std::vector<SweepRow> contamination_sweep(std::span<const ScoreReport> pool_reports,
                                          std::span<const Truth> pool_truths,
                                          std::span<const double> rates);

std::vector<SweepRow> contamination_sweep(const BiganModel& m, std::span<const EncodedSample> pool,
                                          std::span<const double> lambda,
                                          std::span<const double> rates, std::size_t threads = 1);

struct TimingStats {
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;  // sample standard deviation; 0 for one repetition
  std::size_t repetitions = 0;
};

TimingStats summarize_timings(std::span<const double> seconds);

struct BenchOptions {
  std::size_t repetitions = 100;        // encoder-path batches timed
  std::size_t search_repetitions = 3;   // latent-search batches timed
  std::size_t warmup = 2;               // untimed encoder-path batches before timing
  std::size_t search_steps = 500;
  double search_step_size = 1e-3;
  std::uint64_t seed = 7;
};

struct BenchReport {
  TimingStats encoder_path;
  TimingStats search_path;
  double speedup = 0.0;  // search mean / encoder mean
  std::size_t batch_size = 0;
  BenchOptions options;
};

// Per-batch wall-clock of single-pass encoder scoring versus iterative latent search on the
// same batch, both single-threaded.
BenchReport benchmark(const BiganModel& m, const Matrix& batch, std::span<const double> lambda,
                      const BenchOptions& options = {});

}  // namespace wbigan
