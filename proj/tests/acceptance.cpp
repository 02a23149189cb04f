// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit if any fails.
// Set WBIGAN_KDD_PATH to a KDD-99 10% file to add the opt-in long run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "support/oracles.hpp"
#include "wbigan/cli.hpp"
#include "wbigan/csv.hpp"
#include "wbigan/divergence.hpp"
#include "wbigan/evaluation.hpp"
#include "wbigan/kdd.hpp"
#include "wbigan/run_config.hpp"
#include "wbigan/scorer.hpp"
#include "wbigan/trainer.hpp"

using namespace wbigan;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run_criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != kExitOk) std::cerr << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double metric(const fs::path& metrics_csv, const std::string& column) {
  const CsvTable t = read_csv(metrics_csv);
  if (t.rows.size() != 1) throw std::runtime_error("metrics CSV must have one row");
  return parse_double(t.rows[0][t.column(column)]);
}

std::vector<double> random_probs(std::size_t n, Rng& rng) {
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) {
    v = rng.uniform() < 0.25 ? 0.0 : -std::log(1.0 - rng.uniform());
    total += v;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  double sum = 0.0;
  for (double v : p) sum += v;
  *std::max_element(p.begin(), p.end()) += 1.0 - sum;
  return p;
}

std::vector<double> random_positions(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  double at = rng.uniform(-2.0, 0.0);
  for (double& v : x) v = (at += rng.uniform(0.05, 1.0));
  return x;
}

// Two clusters over 5 one-hot blocks of 4 categories; each block takes its cluster's
// preferred category with probability 0.8.
Matrix one_hot_toy(std::size_t n, Rng& rng) {
  Matrix x(n, 20, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cluster = rng.below(2);
    for (std::size_t b = 0; b < 5; ++b) {
      const std::size_t preferred = (b + 2 * cluster) % 4;
      const std::size_t cat = rng.uniform() < 0.8 ? preferred : rng.below(4);
      x(i, 4 * b + cat) = 1.0;
    }
  }
  return x;
}

double mean_residual(const BiganModel& m, const Matrix& x) {
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Vector row = x.row_vector(r);
    total += oracle::l1(row, generate(m, encode(m, row)));
  }
  return total / static_cast<double>(x.rows());
}

}  // namespace

int main() {
  const fs::path fixture = fs::path(WBIGAN_DATA_DIR) / "synthetic_kdd_2000.csv";
  const fs::path work = fs::temp_directory_path() / "wbigan_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path run = work / "run";
  const fs::path replay = work / "replay";

  const auto records = read_kdd_file(fixture);
  const std::size_t width = fit_schema(records).total_width;

  run_criterion(1, "gradient correctness", [&] {
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::uint64_t draw = 0; draw < 20; ++draw) {
      TrainConfig cfg;
      Rng init(1000 + draw);
      const BiganModel m = init_model(cfg, width, init);
      Rng rng(2000 + draw);
      struct Net {
        const Mlp* net;
        Mode mode;
      };
      for (const Net& n : {Net{&m.generator, Mode::Eval}, Net{&m.encoder, Mode::Eval}, Net{&m.critic, Mode::Train}}) {
        Matrix x(2, n.net->input_width()), seed(2, n.net->output_width());
        for (double& v : x.values()) v = rng.uniform();
        for (double& v : seed.values()) v = rng.uniform(-1.0, 1.0);
        Rng pick = rng.fork(draw);
        const auto r = oracle::check_mlp_gradients(*n.net, x, seed, n.mode, rng.fork(100 + draw), 6, pick, 1e-5);
        worst = std::max(worst, r.max_relative_error);
        checked += r.checked;
      }
    }
    return Outcome{worst < 1e-4, "max relative error " + fmt("%.3g", worst) + " over " + std::to_string(checked) +
                                     " entries, 20 draws x 3 networks, input width " + std::to_string(width)};
  });

  run_criterion(2, "divergence identities", [&] {
    const double ln2 = std::log(2.0);
    Rng rng(7);
    bool ok = true;
    for (int t = 0; t < 500 && ok; ++t) {
      const auto pos = random_positions(6, rng);
      const DiscreteDist p(pos, random_probs(6, rng)), q(pos, random_probs(6, rng));
      const double a = js(p, q), b = js(q, p);
      ok = std::abs(a - b) <= 1e-15 && a >= 0.0 && a <= ln2 + 1e-15 && kl(p, p) == 0.0;
    }
    const DiscreteDist left({0.0, 1.0}, {0.3, 0.7}), right({2.0, 3.0}, {0.6, 0.4});
    ok = ok && js(left, right) == ln2;
    const auto p = DiscreteDist::on_grid({0.5, 0.5}), q = DiscreteDist::on_grid({0.9, 0.1});
    ok = ok && std::abs(kl(p, q) - kl(q, p)) > 0.1;
    for (int t = 0; t < 100 && ok; ++t) {
      const double a = rng.uniform(-5, 5), b = rng.uniform(-5, 5);
      ok = wasserstein1(DiscreteDist::point_mass(a), DiscreteDist::point_mass(b)) ==
           std::abs(a - b);
    }
    const oracle::TransportOracle transport(5);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const auto pp = random_positions(5, rng), qp = random_positions(5, rng);
      const auto pw = random_probs(5, rng), qw = random_probs(5, rng);
      const double expect = transport.min_cost(pp, pw, qp, qw);
      const double got = wasserstein1(DiscreteDist(pp, pw), DiscreteDist(qp, qw));
      worst = std::max(worst, std::abs(got - expect) / std::max(1.0, std::abs(expect)));
    }
    const bool identities = ok;
    ok = ok && worst <= 1e-9;
    return Outcome{ok, std::string(identities ? "identities hold" : "an identity fails") + "; transport oracle max error " + fmt("%.3g", worst) + " on 200 pairs"};
  });

  // Criteria 3, 5, 7, 8 and 9 share one run trained on the fixture with the default config.
  const auto train_start = Clock::now();
  const int trained = cli({"train", "--data", fixture.string(), "--out", run.string()});
  const double train_seconds = std::chrono::duration<double>(Clock::now() - train_start).count();

  run_criterion(3, "score decomposition", [&] {
    if (trained != kExitOk) return Outcome{false, "training failed"};
    const BiganModel m = load_checkpoint(run / "checkpoint.json");
    const EncodingSchema schema = load_schema(run / "schema.json");
    const auto classes = swap_labels(records);
    std::vector<std::size_t> idx(1000);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i * 2;
    const auto samples = encode_records(records, classes, idx, schema);
    const std::vector<double> lambda{0.1, 0.3}, zero{0.0, 0.0};
    const auto reports = score_samples(m, samples, lambda);
    const auto pure = score_samples(m, samples, zero);
    double worst = 0.0;
    bool collapse = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      const double s = (1.0 - 0.1 - 0.3) * r.residual + 0.1 * r.discrimination[0] + 0.3 * r.discrimination[1];
      worst = std::max(worst, std::abs(s - r.score));
      const double l1 = oracle::l1(samples[i].features, generate(m, encode(m, samples[i].features)));
      worst = std::max(worst, std::abs(l1 - r.residual));
      collapse = collapse && pure[i].score == pure[i].residual && pure[i].residual == r.residual;
    }
    return Outcome{worst <= 1e-12 && collapse,
                   "max recombination error " + fmt("%.3g", worst) + " on 1000 samples; lambda = 0 collapse " +
                       (collapse ? "exact" : "broken")};
  });

  run_criterion(4, "threshold oracle", [&] {
    Rng rng(11);
    std::size_t mismatches = 0, checks = 0;
    for (int t = 0; t < 500; ++t) {
      const std::size_t n = 1 + rng.below(400);
      std::vector<ScoreReport> reports(n);
      std::vector<double> scores(n);
      std::vector<std::size_t> ids(n);
      const bool ties = t % 3 == 0;
      for (std::size_t i = 0; i < n; ++i) {
        scores[i] = ties ? static_cast<double>(rng.below(5)) : rng.normal();
        ids[i] = (i * 7919) % 100003;
        reports[i] = {ids[i], scores[i], {}, scores[i]};
      }
      for (double c : {0.0, 0.01, 0.05, 0.1, 0.2, 1.0}) {
        const std::size_t k = static_cast<std::size_t>(std::floor(c * static_cast<double>(n) + 0.5));
        const auto expect = oracle::top_k_by_sort(scores, ids, k);
        const auto got = apply_threshold(reports, ThresholdRule::contamination(c));
        std::size_t flagged = 0;
        bool same = true;
        for (std::size_t i = 0; i < n; ++i) {
          const bool f = got[i] == Verdict::Anomalous;
          flagged += f;
          same = same && f == expect[i];
        }
        ++checks;
        mismatches += !(same && flagged == k);
      }
    }
    return Outcome{mismatches == 0, std::to_string(checks - mismatches) + "/" + std::to_string(checks) +
                                        " vector x rate cases match the sort oracle"};
  });

  run_criterion(5, "toy-data detection", [&] {
    if (trained != kExitOk) return Outcome{false, "training failed"};
    if (cli({"score", "--run", run.string(), "--data", fixture.string()}) != kExitOk ||
        cli({"eval", "--scores", (run / "scores.csv").string(), "--rule", "contamination:0.2", "--run",
             run.string()}) != kExitOk) {
      return Outcome{false, "score or eval failed"};
    }
    const double f1 = metric(run / "metrics.csv", "f1");
    const double p = metric(run / "metrics.csv", "precision"), r = metric(run / "metrics.csv", "recall");
    return Outcome{f1 >= 0.9 && train_seconds <= 600.0,
                   "precision " + fmt("%.4f", p) + " recall " + fmt("%.4f", r) + " f1 " + fmt("%.4f", f1) +
                       " at c = 0.2; training took " + fmt("%.1f", train_seconds) + " s"};
  });

  run_criterion(6, "objective ablation", [&] {
    std::string detail;
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      Rng rng(seed * 77);
      const Matrix train_x = one_hot_toy(1000, rng), held_out = one_hot_toy(300, rng);
      double lr[2];
      for (int i = 0; i < 2; ++i) {
        TrainConfig cfg;
        cfg.epochs = 20;
        cfg.seed = seed;
        cfg.objective = i == 0 ? Objective::Wasserstein : Objective::ClassicalCE;
        lr[i] = mean_residual(train(cfg, train_x).model, held_out);
      }
      ok = ok && lr[0] < lr[1];
      detail += (seed > 1 ? "; " : "") + std::string("seed ") + std::to_string(seed) + " wasserstein " +
                fmt("%.4f", lr[0]) + " vs classical " + fmt("%.4f", lr[1]);
    }
    return Outcome{ok, "held-out mean L_R " + detail};
  });

  run_criterion(7, "contamination sweep shape", [&] {
    if (trained != kExitOk) return Outcome{false, "training failed"};
    if (cli({"sweep", "--run", run.string(), "--data", fixture.string()}) != kExitOk) {
      return Outcome{false, "sweep failed"};
    }
    const CsvTable t = read_csv(run / "sweep.csv");
    bool ok = t.rows.size() == 4;
    std::string counts;
    for (std::size_t i = 0; ok && i < t.rows.size(); ++i) {
      const std::size_t a = parse_size(t.rows[i][t.column("anomalies")]);
      const std::size_t f = parse_size(t.rows[i][t.column("flagged")]);
      const std::size_t n = parse_size(t.rows[i][t.column("test_size")]);
      const double rate = parse_double(t.rows[i][t.column("rate")]);
      ok = ok && a == contamination_quota(rate, n) && f == a;
      if (i > 0) {
        ok = ok && a <= parse_size(t.rows[i - 1][t.column("anomalies")]) &&
             f <= parse_size(t.rows[i - 1][t.column("flagged")]);
      }
      counts += (i ? ", " : "") + std::to_string(a) + "/" + std::to_string(n);
    }
    return Outcome{ok, std::to_string(t.rows.size()) + " rows, anomalies/test size " + counts};
  });

  run_criterion(8, "encoder vs search speedup", [&] {
    if (trained != kExitOk) return Outcome{false, "training failed"};
    const BiganModel m = load_checkpoint(run / "checkpoint.json");
    const EncodingSchema schema = load_schema(run / "schema.json");
    const auto classes = swap_labels(records);
    std::vector<std::size_t> idx(50);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const Matrix batch = stack_features(encode_records(records, classes, idx, schema));
    BenchOptions o;
    o.repetitions = 100;
    o.search_repetitions = 2;
    o.search_steps = 500;
    const std::vector<double> lambda{0.1, 0.3};
    const BenchReport r = benchmark(m, batch, lambda, o);
    return Outcome{r.speedup >= 50.0, "encoder " + fmt("%.3g", r.encoder_path.mean_seconds) + " s/batch, search " +
                                          fmt("%.3g", r.search_path.mean_seconds) + " s/batch, speedup " +
                                          fmt("%.0f", r.speedup) + "x at 500 steps"};
  });

  run_criterion(9, "determinism", [&] {
    if (trained != kExitOk) return Outcome{false, "training failed"};
    if (cli({"train", "--from-manifest", (run / "manifest.json").string(), "--data", fixture.string(), "--out",
             replay.string()}) != kExitOk ||
        cli({"score", "--run", replay.string(), "--data", fixture.string()}) != kExitOk ||
        cli({"eval", "--scores", (replay / "scores.csv").string(), "--rule", "contamination:0.2"}) != kExitOk) {
      return Outcome{false, "replay failed"};
    }
    const bool ckpt = slurp(run / "checkpoint.json") == slurp(replay / "checkpoint.json");
    const bool scores = slurp(run / "scores.csv") == slurp(replay / "scores.csv");
    const bool metrics = slurp(run / "metrics.csv") == slurp(replay / "metrics.csv");
    return Outcome{ckpt && scores && metrics, std::string("checkpoint ") + (ckpt ? "identical" : "differs") +
                                                  ", scores " + (scores ? "identical" : "differ") + ", metrics " +
                                                  (metrics ? "identical" : "differ")};
  });

  if (const char* kdd = std::getenv("WBIGAN_KDD_PATH")) {
    const fs::path kdd_run = work / "kdd";
    const auto start = Clock::now();
    const bool ok = cli({"train", "--data", kdd, "--out", kdd_run.string(), "--set", "max_train=50000"}) == kExitOk &&
                    cli({"score", "--run", kdd_run.string(), "--data", kdd}) == kExitOk &&
                    cli({"eval", "--scores", (kdd_run / "scores.csv").string(), "--rule", "contamination:0.2"}) ==
                        kExitOk;
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (!ok) {
      std::printf("[INFO] KDD-99 opt-in run failed (%.1f s)\n", secs);
    } else {
      const double f1 = metric(kdd_run / "metrics.csv", "f1");
      std::printf("[INFO] KDD-99 opt-in run: f1 %.4f at c = 0.2, soft target 0.80 %s (%.1f s)\n", f1,
                  f1 >= 0.80 ? "met" : "missed", secs);
    }
  }

  fs::remove_all(work);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
