#include "wbigan/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "wbigan/errors.hpp"
#include "wbigan/kdd.hpp"

namespace wbigan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<SweepRow> contamination_sweep(std::span<const ScoreReport> pool_reports,
                                          std::span<const Truth> pool_truths,
                                          std::span<const double> rates) {
  if (pool_reports.size() != pool_truths.size()) {
    throw ShapeError("one truth label per pool report required");
  }
  std::vector<std::size_t> positions(pool_reports.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});

  std::vector<SweepRow> rows;
  for (double rate : rates) {
    const auto test = draw_test_set(positions, pool_truths, rate);
    std::vector<ScoreReport> reports;
    std::vector<Truth> truths;
    for (std::size_t p : test) {
      reports.push_back(pool_reports[p]);
      truths.push_back(pool_truths[p]);
    }
    const auto verdicts = apply_threshold(reports, ThresholdRule::contamination(rate));
    SweepRow row;
    row.rate = rate;
    row.test_size = test.size();
    row.anomalies = static_cast<std::size_t>(std::count(truths.begin(), truths.end(), Truth::Anomalous));
    row.flagged = static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), Verdict::Anomalous));
    row.metrics = compute_metrics(verdicts, truths);
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> contamination_sweep(const BiganModel& m, std::span<const EncodedSample> pool,
                                          std::span<const double> lambda,
                                          std::span<const double> rates, std::size_t threads) {
  const auto reports = score_samples(m, pool, lambda, threads);
  std::vector<Truth> truths;
  truths.reserve(pool.size());
  for (const auto& s : pool) truths.push_back(s.truth);
  return contamination_sweep(reports, truths, rates);
}

TimingStats summarize_timings(std::span<const double> seconds) {
  TimingStats t;
  t.repetitions = seconds.size();
  if (seconds.empty()) return t;
  t.mean_seconds = std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
  if (seconds.size() > 1) {
    double ss = 0.0;
    for (double s : seconds) ss += (s - t.mean_seconds) * (s - t.mean_seconds);
    t.stddev_seconds = std::sqrt(ss / static_cast<double>(seconds.size() - 1));
  }
  return t;
}

BenchReport benchmark(const BiganModel& m, const Matrix& batch, std::span<const double> lambda,
                      const BenchOptions& options) {
  if (options.repetitions == 0 || options.search_repetitions == 0) {
    throw DomainError("benchmark needs at least one repetition per path");
  }
  if (batch.rows() == 0) throw DomainError("benchmark batch is empty");

  BenchReport report;
  report.batch_size = batch.rows();
  report.options = options;

  double sink = 0.0;  // keeps results observable so no pass is optimized away
  for (std::size_t w = 0; w < options.warmup; ++w) {
    sink += score_batch(m, batch, lambda).front().score;
  }
  std::vector<double> encoder_times;
  for (std::size_t r = 0; r < options.repetitions; ++r) {
    const auto start = Clock::now();
    const auto reports = score_batch(m, batch, lambda);
    encoder_times.push_back(seconds_since(start));
    sink += reports.back().score;
  }

  Rng rng(options.seed);
  std::vector<double> search_times;
  for (std::size_t r = 0; r < options.search_repetitions; ++r) {
    const auto start = Clock::now();
    for (std::size_t i = 0; i < batch.rows(); ++i) {
      sink += anogan_search(m, batch.row(i), lambda, options.search_steps,
                            options.search_step_size, rng).best_loss;
    }
    search_times.push_back(seconds_since(start));
  }
  if (!std::isfinite(sink)) throw StateError("benchmark produced non-finite scores");

  report.encoder_path = summarize_timings(encoder_times);
  report.search_path = summarize_timings(search_times);
  report.speedup = report.encoder_path.mean_seconds > 0.0
                       ? report.search_path.mean_seconds / report.encoder_path.mean_seconds
                       : 0.0;
  return report;
}

}  // namespace wbigan
