#include "wbigan/scorer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numeric>
#include <thread>

#include "wbigan/errors.hpp"

namespace wbigan {

namespace {

constexpr std::size_t kChunkRows = 128;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double lambda_sum(std::span<const double> lambda) {
  return std::accumulate(lambda.begin(), lambda.end(), 0.0);
}

void check_lambda_for(const BiganModel& m, std::span<const double> lambda) {
  validate_lambda(std::vector<double>(lambda.begin(), lambda.end()));
  if (lambda.size() != m.tap_indices.size()) {
    throw ShapeError("got " + std::to_string(lambda.size()) + " lambda weights for " +
                     std::to_string(m.tap_indices.size()) + " critic taps");
  }
}

// Scores rows [begin, end) of x into out[begin, end).
void score_rows(const BiganModel& m, const Matrix& x, std::span<const double> lambda,
                std::span<const std::size_t> ids, std::size_t begin, std::size_t end,
                std::vector<ScoreReport>& out) {
  std::vector<std::size_t> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  const Matrix xs = gather_rows(x, rows);
  const Matrix z = encode(m, xs);
  const Matrix x_hat = generate(m, z);
  const auto real = criticize(m, xs, z);
  const auto fake = criticize(m, x_hat, z);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ScoreReport rep;
    rep.sample_id = ids.empty() ? rows[r] : ids[rows[r]];
    rep.residual = residual_loss(xs.row(r), x_hat.row(r));
    for (std::size_t t = 0; t < real.taps.size(); ++t) {
      rep.discrimination.push_back(residual_loss(real.taps[t].row(r), fake.taps[t].row(r)));
    }
    rep.score = combine_score(rep.residual, rep.discrimination, lambda);
    out[rows[r]] = std::move(rep);
  }
}

}  // namespace

double combine_score(double residual, std::span<const double> discrimination,
                     std::span<const double> lambda) {
  if (discrimination.size() != lambda.size()) {
    throw ShapeError("discrimination terms and lambda weights differ in count");
  }
  double s = (1.0 - lambda_sum(lambda)) * residual;
  for (std::size_t i = 0; i < lambda.size(); ++i) s += lambda[i] * discrimination[i];
  return s;
}

double residual_loss(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size()) {
    throw ShapeError("residual_loss: lengths " + std::to_string(x.size()) + " and " +
                     std::to_string(x_hat.size()) + " differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - x_hat[i]);
  return sum;
}

std::vector<double> discrimination_loss(const BiganModel& m, std::span<const double> x,
                                        std::span<const double> z) {
  const Vector x_hat = generate(m, z);
  const auto real = criticize(m, x, z);
  const auto fake = criticize(m, x_hat, z);
  std::vector<double> out;
  for (std::size_t t = 0; t < real.taps.size(); ++t) {
    out.push_back(residual_loss(real.taps[t], fake.taps[t]));
  }
  return out;
}

ScoreReport anomaly_score(const BiganModel& m, std::span<const double> x,
                          std::span<const double> lambda, std::size_t sample_id) {
  const std::size_t ids[] = {sample_id};
  return score_batch(m, Matrix::from_row(x), lambda, ids, 1).front();
}

std::vector<ScoreReport> score_batch(const BiganModel& m, const Matrix& x,
                                     std::span<const double> lambda,
                                     std::span<const std::size_t> ids, std::size_t threads) {
  check_lambda_for(m, lambda);
  if (x.cols() != m.input_dim) {
    throw ShapeError("score batch must have " + std::to_string(m.input_dim) + " columns, got " +
                     shape_string(x));
  }
  if (!ids.empty() && ids.size() != x.rows()) throw ShapeError("one sample id per row required");
  std::vector<ScoreReport> out(x.rows());
  const std::size_t chunks = (x.rows() + kChunkRows - 1) / kChunkRows;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      const std::size_t begin = c * kChunkRows;
      score_rows(m, x, lambda, ids, begin, std::min(x.rows(), begin + kChunkRows), out);
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(chunks, 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return out;
}

std::vector<ScoreReport> score_samples(const BiganModel& m, std::span<const EncodedSample> samples,
                                       std::span<const double> lambda, std::size_t threads) {
  std::vector<std::size_t> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) ids.push_back(s.sample_id);
  if (samples.empty()) return {};
  return score_batch(m, stack_features(samples), lambda, ids, threads);
}

void check_not_degenerate(std::span<const ScoreReport> reports) {
  if (reports.size() < 2) return;
  const double first = reports.front().score;
  bool all_same = std::all_of(reports.begin(), reports.end(),
                              [&](const ScoreReport& r) { return r.score == first; });
  if (all_same) {
    throw StateError("all " + std::to_string(reports.size()) +
                     " anomaly scores are identical: model is untrained or degenerate");
  }
}

LatentLoss latent_loss(const BiganModel& m, std::span<const double> x, std::span<const double> z,
                       std::span<const double> lambda) {
  check_lambda_for(m, lambda);
  if (x.size() != m.input_dim || z.size() != m.latent_dim) {
    throw ShapeError("latent_loss: sample or latent width does not match the model");
  }
  Rng unused(0);
  const Matrix xm = Matrix::from_row(x);
  const Matrix zm = Matrix::from_row(z);
  Tape gen_tape, real_tape, fake_tape;
  const Matrix x_hat = generate(m, zm, Mode::Eval, unused, &gen_tape);
  const auto real = criticize(m, xm, zm, Mode::Eval, unused, &real_tape);
  const auto fake = criticize(m, x_hat, zm, Mode::Eval, unused, &fake_tape);

  const double residual_weight = 1.0 - lambda_sum(lambda);
  LatentLoss out;
  std::vector<double> disc;
  std::vector<LayerSeed> real_seeds, fake_seeds;
  for (std::size_t t = 0; t < m.tap_indices.size(); ++t) {
    const auto a = real.taps[t].row(0);
    const auto b = fake.taps[t].row(0);
    disc.push_back(residual_loss(a, b));
    Matrix gr(1, a.size()), gf(1, a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double s = lambda[t] * sign(a[i] - b[i]);
      gr(0, i) = s;
      gf(0, i) = -s;
    }
    real_seeds.push_back({m.tap_indices[t], std::move(gr)});
    fake_seeds.push_back({m.tap_indices[t], std::move(gf)});
  }
  out.loss = combine_score(residual_loss(x, x_hat.row(0)), disc, lambda);

  const Matrix no_output_seed(1, 1);
  const MlpGrad real_grad = backward(m.critic, real_tape, no_output_seed, real_seeds);
  const MlpGrad fake_grad = backward(m.critic, fake_tape, no_output_seed, fake_seeds);

  Matrix dx_hat = fake_grad.input.column_slice(0, m.input_dim);
  for (std::size_t i = 0; i < m.input_dim; ++i) {
    dx_hat(0, i) -= residual_weight * sign(x[i] - x_hat(0, i));
  }
  const MlpGrad gen_grad = backward(m.generator, gen_tape, dx_hat);

  out.gradient.assign(m.latent_dim, 0.0);
  for (std::size_t j = 0; j < m.latent_dim; ++j) {
    out.gradient[j] = gen_grad.input(0, j) + real_grad.input(0, m.input_dim + j) +
                      fake_grad.input(0, m.input_dim + j);
  }
  return out;
}

SearchResult anogan_search(const BiganModel& m, std::span<const double> x,
                           std::span<const double> lambda, std::size_t steps, double step_size,
                           Rng& rng) {
  if (steps == 0) throw DomainError("anogan_search needs at least one step");
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) {
    throw DomainError("step size must be finite and nonnegative");
  }
  Vector z(m.latent_dim);
  for (double& v : z) v = rng.normal();

  SearchResult result;
  result.losses.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const LatentLoss ll = latent_loss(m, x, z, lambda);
    if (!std::isfinite(ll.loss)) {
      throw TrainingFault(t + 1, "latent search produced a non-finite loss");
    }
    result.losses.push_back(ll.loss);
    if (t == 0 || ll.loss < result.best_loss) {
      result.best_loss = ll.loss;
      result.z = z;
    }
    if (t + 1 == steps) break;
    for (std::size_t j = 0; j < z.size(); ++j) z[j] -= step_size * ll.gradient[j];
  }
  return result;
}

Verdict verdict_from_string(const std::string& text) {
  if (text == "normal") return Verdict::Normal;
  if (text == "anomalous") return Verdict::Anomalous;
  throw DomainError("unknown verdict '" + text + "'");
}

ThresholdRule ThresholdRule::fixed(double tau) {
  if (!std::isfinite(tau)) throw DomainError("threshold must be finite");
  return ThresholdRule(Kind::FixedThreshold, tau);
}

ThresholdRule ThresholdRule::contamination(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw DomainError("contamination rate must lie in [0, 1], got " + std::to_string(rate));
  }
  return ThresholdRule(Kind::ContaminationRate, rate);
}

ThresholdRule ThresholdRule::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw DomainError("rule '" + text + "' must be threshold:<tau> or contamination:<rate>");
  }
  const std::string kind = text.substr(0, colon);
  const std::string number = text.substr(colon + 1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (ec != std::errc() || ptr != number.data() + number.size()) {
    throw DomainError("rule value '" + number + "' is not a number");
  }
  if (kind == "threshold") return fixed(value);
  if (kind == "contamination") return contamination(value);
  throw DomainError("unknown rule kind '" + kind + "'");
}

std::string ThresholdRule::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s:%.17g",
                kind_ == Kind::FixedThreshold ? "threshold" : "contamination", value_);
  return buf;
}

std::size_t contamination_quota(double rate, std::size_t n) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw DomainError("contamination rate must lie in [0, 1]");
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 0.5));
}

std::vector<Verdict> apply_threshold(std::span<const ScoreReport> reports, const ThresholdRule& rule) {
  std::vector<Verdict> verdicts(reports.size(), Verdict::Normal);
  if (rule.kind() == ThresholdRule::Kind::FixedThreshold) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (reports[i].score > rule.value()) verdicts[i] = Verdict::Anomalous;
    }
    return verdicts;
  }
  if (reports.empty()) throw DomainError("contamination rule needs at least one report");
  const std::size_t k = contamination_quota(rule.value(), reports.size());
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (reports[a].score != reports[b].score) return reports[a].score > reports[b].score;
                      return reports[a].sample_id < reports[b].sample_id;
                    });
  for (std::size_t i = 0; i < k; ++i) verdicts[order[i]] = Verdict::Anomalous;
  return verdicts;
}

double calibrate_threshold(std::span<const ScoreReport> reports, std::span<const Truth> truths) {
  if (reports.size() != truths.size()) throw ShapeError("one truth label per report required");
  const auto positives =
      static_cast<std::size_t>(std::count(truths.begin(), truths.end(), Truth::Anomalous));
  if (positives == 0 || positives == truths.size()) {
    throw DomainError("threshold calibration needs both normal and anomalous samples");
  }
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return reports[a].score < reports[b].score; });

  // Sweep candidate thresholds upward; everything above the cut is flagged.
  std::size_t tp = positives;
  std::size_t fp = truths.size() - positives;
  double best_f1 = -1.0;
  double best_tau = 0.0;
  bool found = false;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (truths[order[i]] == Truth::Anomalous) --tp; else --fp;
    const double lo = reports[order[i]].score;
    const double hi = reports[order[i + 1]].score;
    if (!(hi > lo)) continue;
    const std::size_t fn = positives - tp;
    const double f1 = tp == 0 ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_tau = 0.5 * (lo + hi);
      found = true;
    }
  }
  if (!found) throw DomainError("all scores are equal: no separating threshold exists");
  return best_tau;
}

}  // namespace wbigan
