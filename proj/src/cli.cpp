#include "wbigan/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "wbigan/csv.hpp"
#include "wbigan/divergence.hpp"
#include "wbigan/errors.hpp"
#include "wbigan/evaluation.hpp"
#include "wbigan/kdd.hpp"
#include "wbigan/metrics.hpp"
#include "wbigan/run_config.hpp"
#include "wbigan/scorer.hpp"
#include "wbigan/trainer.hpp"

namespace wbigan {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kCheckpointFile = "checkpoint.json";
constexpr const char* kSchemaFile = "schema.json";
constexpr const char* kHistoryFile = "history.csv";

struct Options {
  // train
  std::string config_path;
  std::string manifest_path;
  std::string data_path;
  std::string out_path;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::size_t checkpoint_every = 0;
  bool cache = false;
  // score / sweep / bench
  std::string run_dir;
  std::optional<double> contamination;
  std::string rule;
  std::optional<std::size_t> threads;
  // eval
  std::string scores_path;
  std::string calibration_path;
  // sweep
  std::vector<double> rates{std::begin(kReferenceRates), std::end(kReferenceRates)};
  // bench
  std::size_t repetitions = 100;
  std::size_t search_repetitions = 3;
  std::size_t batch_size = 50;
  std::size_t search_steps = 500;
  double step_size = 1e-3;
  std::size_t warmup = 2;
  // divergence-demo
  std::vector<double> separations;
};

// Tracks which pipeline stage is running so failures can name it.
struct Stage {
  std::string name = "startup";
  void operator()(std::string next) { name = std::move(next); }
};

// A malformed --rule is a usage problem, not a data problem.
ThresholdRule parse_rule_option(const std::string& text) {
  try {
    return ThresholdRule::parse(text);
  } catch (const DomainError& e) {
    throw UsageError(std::string("--rule: ") + e.what());
  }
}

struct LoadedData {
  std::vector<RawRecord> records;
  std::vector<Truth> classes;
  std::string sha256;
};

LoadedData load_data(const std::string& path) {
  if (path.empty()) throw UsageError("--data is required");
  if (!fs::exists(path)) throw UsageError("data file " + path + " does not exist");
  LoadedData d;
  d.sha256 = sha256_file(path);
  d.records = read_kdd_file(path);
  if (d.records.empty()) throw DomainError("data file " + path + " contains no records");
  d.classes = swap_labels(d.records);
  return d;
}

SplitOptions split_options(const RunConfig& cfg, std::optional<double> contamination) {
  return SplitOptions{contamination.value_or(cfg.contamination), cfg.test_size, cfg.max_train};
}

std::vector<RawRecord> pick(const std::vector<RawRecord>& records, const std::vector<std::size_t>& idx) {
  std::vector<RawRecord> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(records[i]);
  return out;
}

struct LoadedRun {
  fs::path dir;
  RunManifest manifest;
  BiganModel model;
  EncodingSchema schema;
};

LoadedRun load_run(const std::string& dir) {
  if (dir.empty()) throw UsageError("--run is required");
  LoadedRun run;
  run.dir = dir;
  run.manifest = load_manifest(run.dir / kManifestFile);
  run.model = load_checkpoint(run.dir / run.manifest.checkpoint);
  run.schema = load_schema(run.dir / run.manifest.schema);
  if (run.schema.total_width != run.model.input_dim) {
    throw DomainError("schema width does not match the checkpoint's input width");
  }
  return run;
}

void require_digest(const LoadedRun& run, const LoadedData& data) {
  if (run.manifest.dataset_sha256 != data.sha256) {
    throw DomainError("data file digest " + data.sha256 + " does not match the run's dataset digest " +
                      run.manifest.dataset_sha256);
  }
}

std::vector<EncodedSample> encode_subset(const LoadedData& data, const std::vector<std::size_t>& idx,
                                         const EncodingSchema& schema) {
  return encode_records(data.records, data.classes, idx, schema);
}

CsvTable scores_table(std::span<const ScoreReport> reports, std::span<const Verdict> verdicts,
                      std::span<const Truth> truths, std::size_t taps) {
  CsvTable t;
  t.header = {"sample_id", "residual"};
  for (std::size_t i = 1; i <= taps; ++i) t.header.push_back("L_D" + std::to_string(i));
  t.header.insert(t.header.end(), {"score", "verdict", "truth"});
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::vector<std::string> row{std::to_string(reports[i].sample_id), format_double(reports[i].residual)};
    for (double d : reports[i].discrimination) row.push_back(format_double(d));
    row.push_back(format_double(reports[i].score));
    row.push_back(verdicts.empty() ? "" : to_string(verdicts[i]));
    row.push_back(truths.empty() ? "" : to_string(truths[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct ScoresFile {
  std::vector<ScoreReport> reports;
  std::vector<Truth> truths;
};

ScoresFile read_scores(const std::string& path) {
  if (path.empty()) throw UsageError("--scores is required");
  const CsvTable t = read_csv(path);
  const std::size_t id = t.column("sample_id");
  const std::size_t residual = t.column("residual");
  const std::size_t score = t.column("score");
  const std::size_t truth = t.column("truth");
  std::vector<std::size_t> taps;
  for (std::size_t i = 1; t.has_column("L_D" + std::to_string(i)); ++i) {
    taps.push_back(t.column("L_D" + std::to_string(i)));
  }
  ScoresFile f;
  for (const auto& row : t.rows) {
    ScoreReport r;
    r.sample_id = parse_size(row[id]);
    r.residual = parse_double(row[residual]);
    for (std::size_t c : taps) r.discrimination.push_back(parse_double(row[c]));
    r.score = parse_double(row[score]);
    f.reports.push_back(std::move(r));
    if (!row[truth].empty()) f.truths.push_back(truth_from_string(row[truth]));
  }
  if (!f.truths.empty() && f.truths.size() != f.reports.size()) {
    throw DomainError("scores file has truth labels on only some rows");
  }
  return f;
}

std::vector<std::string> metrics_header() {
  return {"tp", "fp", "fn", "tn", "precision", "recall", "f1", "degenerate"};
}

std::vector<std::string> metrics_fields(const EvalMetrics& m) {
  return {std::to_string(m.true_positives), std::to_string(m.false_positives),
          std::to_string(m.false_negatives), std::to_string(m.true_negatives),
          format_double(m.precision), format_double(m.recall), format_double(m.f1),
          m.degenerate() ? "1" : "0"};
}

void write_table(const CsvTable& t, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    write_csv(out, t);
  } else {
    write_csv(fs::path(path), t);
  }
}

// ---- subcommands ----

int cmd_train(const Options& o, Stage& stage, std::ostream& out) {
  stage("config");
  RunConfig cfg;
  std::optional<RunManifest> source;
  if (!o.manifest_path.empty()) {
    source = load_manifest(o.manifest_path);
    cfg = source->config;
  } else if (!o.config_path.empty()) {
    cfg = load_config(o.config_path);
  }
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.epochs) cfg.train.epochs = *o.epochs;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  if (o.out_path.empty()) throw UsageError("--out is required");

  stage("data");
  const LoadedData data = load_data(o.data_path);
  if (source && source->dataset_sha256 != data.sha256) {
    throw DomainError("data digest does not match the manifest being replayed");
  }
  const Split sp = split(data.classes, cfg.train.seed, split_options(cfg, std::nullopt));
  if (sp.train.empty()) throw DomainError("split produced no normal-class training records");
  const auto train_records = pick(data.records, sp.train);
  const EncodingSchema schema = fit_schema(train_records, cfg.coding);
  const auto train_samples = encode_subset(data, sp.train, schema);

  const fs::path dir = o.out_path;
  fs::create_directories(dir);
  if (o.cache) write_encoded_csv(train_samples, dir / "train_encoded.csv");

  stage("training");
  TrainHooks hooks;
  if (o.checkpoint_every > 0) {
    hooks.after_epoch = [&](const BiganModel& m, const EpochRecord& rec) {
      if (rec.epoch % o.checkpoint_every == 0) {
        save_checkpoint(m, dir / ("checkpoint_epoch_" + std::to_string(rec.epoch) + ".json"));
      }
    };
  }
  const auto started = std::chrono::steady_clock::now();
  const TrainResult result = train(cfg.train, std::span<const EncodedSample>(train_samples), hooks);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  stage("output");
  save_checkpoint(result.model, dir / kCheckpointFile);
  save_schema(schema, dir / kSchemaFile);
  CsvTable history;
  history.header = {"epoch", "critic_obj", "gen_obj", "seconds", "critic_steps", "generator_steps"};
  for (const auto& r : result.history.epochs) {
    history.rows.push_back({std::to_string(r.epoch), format_double(r.critic_objective),
                            format_double(r.generator_objective), format_double(r.seconds),
                            std::to_string(r.critic_steps), std::to_string(r.generator_steps)});
  }
  write_csv(dir / kHistoryFile, history);

  RunManifest manifest;
  manifest.config = cfg;
  manifest.dataset_path = fs::absolute(o.data_path).string();
  manifest.dataset_sha256 = data.sha256;
  manifest.dataset_records = data.records.size();
  manifest.checkpoint = kCheckpointFile;
  manifest.schema = kSchemaFile;
  manifest.history = kHistoryFile;
  manifest.timings["train_seconds"] = seconds;
  manifest.timings["train_records"] = static_cast<double>(train_samples.size());
  if (!result.history.epochs.empty()) {
    manifest.timings["mean_epoch_seconds"] = seconds / static_cast<double>(result.history.epochs.size());
  }
  save_manifest(manifest, dir / kManifestFile);
  out << "trained on " << train_samples.size() << " records (width " << schema.total_width << ") for "
      << cfg.train.epochs << " epochs in " << seconds << " s; wrote " << dir.string() << '\n';
  return kExitOk;
}

int cmd_score(const Options& o, Stage& stage, std::ostream& out) {
  stage("load run");
  const LoadedRun run = load_run(o.run_dir);
  stage("data");
  const LoadedData data = load_data(o.data_path);
  require_digest(run, data);
  const RunConfig& cfg = run.manifest.config;
  const double c = o.contamination.value_or(cfg.contamination);
  const Split sp = split(data.classes, cfg.train.seed, split_options(cfg, c));
  const auto samples = encode_subset(data, sp.test, run.schema);

  stage("scoring");
  const auto reports = score_samples(run.model, samples, cfg.train.lambda_weights,
                                     o.threads.value_or(cfg.threads));
  check_not_degenerate(reports);
  const ThresholdRule rule = o.rule.empty() ? ThresholdRule::contamination(c) : parse_rule_option(o.rule);
  const auto verdicts = apply_threshold(reports, rule);
  std::vector<Truth> truths;
  for (const auto& s : samples) truths.push_back(s.truth);

  stage("output");
  const std::string path = o.out_path.empty() ? (run.dir / "scores.csv").string() : o.out_path;
  write_table(scores_table(reports, verdicts, truths, run.model.tap_indices.size()), path, out);
  if (path != "-") out << "scored " << reports.size() << " samples into " << path << '\n';
  return kExitOk;
}

int cmd_eval(const Options& o, Stage& stage, std::ostream& out) {
  stage("load scores");
  if (o.rule.empty()) throw UsageError("--rule is required");
  const ScoresFile scores = read_scores(o.scores_path);
  if (scores.truths.empty()) throw DomainError("scores file carries no truth labels");

  stage("threshold");
  ThresholdRule rule = ThresholdRule::contamination(0.0);
  if (o.rule == "calibrate") {
    const ScoresFile cal = o.calibration_path.empty() ? scores : read_scores(o.calibration_path);
    if (cal.truths.empty()) throw DomainError("calibration scores carry no truth labels");
    rule = ThresholdRule::fixed(calibrate_threshold(cal.reports, cal.truths));
  } else {
    rule = parse_rule_option(o.rule);
  }
  const auto verdicts = apply_threshold(scores.reports, rule);
  const EvalMetrics m = compute_metrics(verdicts, scores.truths);

  stage("output");
  CsvTable t;
  t.header = {"rule"};
  const auto mh = metrics_header();
  t.header.insert(t.header.end(), mh.begin(), mh.end());
  std::vector<std::string> row{rule.to_string()};
  const auto mf = metrics_fields(m);
  row.insert(row.end(), mf.begin(), mf.end());
  t.rows.push_back(std::move(row));
  const std::string path = o.out_path.empty()
                               ? (fs::path(o.scores_path).parent_path() / "metrics.csv").string()
                               : o.out_path;
  write_table(t, path, out);

  if (!o.run_dir.empty()) {
    const fs::path manifest_path = fs::path(o.run_dir) / kManifestFile;
    RunManifest manifest = load_manifest(manifest_path);
    manifest.metrics["precision"] = m.precision;
    manifest.metrics["recall"] = m.recall;
    manifest.metrics["f1"] = m.f1;
    save_manifest(manifest, manifest_path);
  }
  if (path != "-") {
    out << "precision " << m.precision << " recall " << m.recall << " f1 " << m.f1 << " (" << path << ")\n";
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, Stage& stage, std::ostream& out) {
  stage("load run");
  const LoadedRun run = load_run(o.run_dir);
  stage("data");
  const LoadedData data = load_data(o.data_path);
  require_digest(run, data);
  const RunConfig& cfg = run.manifest.config;
  for (double r : o.rates) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("rates must lie in [0, 1]");
  }
  // Contamination 0 always succeeds; only the holdout pool matters here.
  const Split sp = split(data.classes, cfg.train.seed, split_options(cfg, 0.0));
  const auto pool = encode_subset(data, sp.holdout_pool, run.schema);

  stage("sweep");
  const auto rows = contamination_sweep(run.model, pool, cfg.train.lambda_weights, o.rates,
                                        o.threads.value_or(cfg.threads));
  CsvTable t;
  t.header = {"rate", "test_size", "anomalies", "flagged"};
  const auto mh = metrics_header();
  t.header.insert(t.header.end(), mh.begin(), mh.end());
  for (const auto& r : rows) {
    std::vector<std::string> row{format_double(r.rate), std::to_string(r.test_size),
                                 std::to_string(r.anomalies), std::to_string(r.flagged)};
    const auto mf = metrics_fields(r.metrics);
    row.insert(row.end(), mf.begin(), mf.end());
    t.rows.push_back(std::move(row));
  }
  stage("output");
  const std::string path = o.out_path.empty() ? (run.dir / "sweep.csv").string() : o.out_path;
  write_table(t, path, out);
  if (path != "-") out << "swept " << rows.size() << " contamination rates into " << path << '\n';
  return kExitOk;
}

int cmd_bench(const Options& o, Stage& stage, std::ostream& out) {
  stage("load run");
  const LoadedRun run = load_run(o.run_dir);
  stage("data");
  const LoadedData data = load_data(o.data_path);
  require_digest(run, data);
  const RunConfig& cfg = run.manifest.config;
  const Split sp = split(data.classes, cfg.train.seed, split_options(cfg, std::nullopt));
  if (o.batch_size == 0) throw UsageError("--batch-size must be positive");
  std::vector<std::size_t> idx(sp.test.begin(),
                               sp.test.begin() + static_cast<std::ptrdiff_t>(std::min(o.batch_size, sp.test.size())));
  const auto samples = encode_subset(data, idx, run.schema);

  stage("benchmark");
  BenchOptions bo;
  bo.repetitions = o.repetitions;
  bo.search_repetitions = o.search_repetitions;
  bo.warmup = o.warmup;
  bo.search_steps = o.search_steps;
  bo.search_step_size = o.step_size;
  const BenchReport rep = benchmark(run.model, stack_features(samples), cfg.train.lambda_weights, bo);

  stage("output");
  CsvTable t;
  t.header = {"batch_size", "repetitions", "search_repetitions", "warmup", "search_steps",
              "encoder_mean_s", "encoder_std_s", "search_mean_s", "search_std_s", "speedup"};
  t.rows.push_back({std::to_string(rep.batch_size), std::to_string(bo.repetitions),
                    std::to_string(bo.search_repetitions), std::to_string(bo.warmup),
                    std::to_string(bo.search_steps), format_double(rep.encoder_path.mean_seconds),
                    format_double(rep.encoder_path.stddev_seconds), format_double(rep.search_path.mean_seconds),
                    format_double(rep.search_path.stddev_seconds), format_double(rep.speedup)});
  const std::string path = o.out_path.empty() ? (run.dir / "bench.csv").string() : o.out_path;
  write_table(t, path, out);

  const fs::path manifest_path = run.dir / kManifestFile;
  RunManifest manifest = run.manifest;
  manifest.timings["bench_batch_size"] = static_cast<double>(rep.batch_size);
  manifest.timings["bench_repetitions"] = static_cast<double>(bo.repetitions);
  manifest.timings["bench_search_repetitions"] = static_cast<double>(bo.search_repetitions);
  manifest.timings["bench_warmup"] = static_cast<double>(bo.warmup);
  manifest.timings["bench_search_steps"] = static_cast<double>(bo.search_steps);
  manifest.timings["bench_encoder_mean_s"] = rep.encoder_path.mean_seconds;
  manifest.timings["bench_search_mean_s"] = rep.search_path.mean_seconds;
  manifest.timings["bench_speedup"] = rep.speedup;
  save_manifest(manifest, manifest_path);
  if (path != "-") {
    out << "encoder path " << rep.encoder_path.mean_seconds << " s/batch, latent search "
        << rep.search_path.mean_seconds << " s/batch, speedup " << rep.speedup << "x\n";
  }
  return kExitOk;
}

int cmd_divergence(const Options& o, Stage& stage, std::ostream& out) {
  stage("sweep");
  std::vector<double> seps = o.separations;
  if (seps.empty()) {
    for (int i = 0; i <= 20; ++i) seps.push_back(i / 10.0);
  }
  const auto rows = saturation_sweep(seps);
  CsvTable t;
  t.header = {"separation", "js", "wasserstein1"};
  for (const auto& r : rows) {
    t.rows.push_back({format_double(r.separation), format_double(r.js), format_double(r.wasserstein1)});
  }
  stage("output");
  write_table(t, o.out_path, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wasserstein BiGAN anomaly detector for KDD-99-format connection records", "wbigan"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "train a model on the normal-class split");
  train->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  train->add_option("--from-manifest", o.manifest_path, "replay the config of an earlier run")->check(CLI::ExistingFile);
  train->add_option("--data", o.data_path, "KDD-99 format CSV")->required();
  train->add_option("--out", o.out_path, "run directory to create")->required();
  train->add_option("--set", o.settings, "config override key=value (repeatable)");
  train->add_option("--seed", o.seed, "override the run seed");
  train->add_option("--epochs", o.epochs, "override the epoch count");
  train->add_option("--checkpoint-every", o.checkpoint_every, "also checkpoint every k epochs");
  train->add_flag("--cache", o.cache, "write the encoded training split as CSV");
  train->get_option("--config")->excludes("--from-manifest");

  auto* score = app.add_subcommand("score", "score the test split of a run");
  score->add_option("--run", o.run_dir, "run directory")->required();
  score->add_option("--data", o.data_path, "KDD-99 format CSV")->required();
  score->add_option("--out", o.out_path, "scores CSV (default <run>/scores.csv, - for stdout)");
  score->add_option("--contamination", o.contamination, "test-set contamination rate");
  score->add_option("--rule", o.rule, "threshold:<tau> or contamination:<rate>");
  score->add_option("--threads", o.threads, "scoring threads");

  auto* eval = app.add_subcommand("eval", "apply a threshold rule to scores and compute metrics");
  eval->add_option("--scores", o.scores_path, "scores CSV from `score`")->required();
  eval->add_option("--rule", o.rule, "threshold:<tau>, contamination:<rate> or calibrate")->required();
  eval->add_option("--calibration", o.calibration_path, "scores CSV used by --rule calibrate");
  eval->add_option("--run", o.run_dir, "record the metrics in this run's manifest");
  eval->add_option("--out", o.out_path, "metrics CSV (default next to the scores)");

  auto* sweep = app.add_subcommand("sweep", "metrics across contamination rates");
  sweep->add_option("--run", o.run_dir, "run directory")->required();
  sweep->add_option("--data", o.data_path, "KDD-99 format CSV")->required();
  sweep->add_option("--rates", o.rates, "contamination rates")->delimiter(',');
  sweep->add_option("--out", o.out_path, "sweep CSV (default <run>/sweep.csv)");
  sweep->add_option("--threads", o.threads, "scoring threads");

  auto* bench = app.add_subcommand("bench", "time encoder scoring against iterative latent search");
  bench->add_option("--run", o.run_dir, "run directory")->required();
  bench->add_option("--data", o.data_path, "KDD-99 format CSV")->required();
  bench->add_option("--out", o.out_path, "bench CSV (default <run>/bench.csv)");
  bench->add_option("--repetitions", o.repetitions, "timed encoder-path batches")->check(CLI::PositiveNumber);
  bench->add_option("--search-repetitions", o.search_repetitions, "timed latent-search batches")->check(CLI::PositiveNumber);
  bench->add_option("--batch-size", o.batch_size, "samples per batch")->check(CLI::PositiveNumber);
  bench->add_option("--search-steps", o.search_steps, "latent-search steps per sample")->check(CLI::PositiveNumber);
  bench->add_option("--step-size", o.step_size, "latent-search step size");
  bench->add_option("--warmup", o.warmup, "untimed warm-up batches");

  auto* demo = app.add_subcommand("divergence-demo", "JS vs Wasserstein-1 between separated point masses");
  demo->add_option("--out", o.out_path, "CSV path (default stdout)");
  demo->add_option("--separations", o.separations, "separations to tabulate")->delimiter(',');

  std::vector<std::string> argv_storage{"wbigan"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Stage stage;
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "train") return cmd_train(o, stage, out);
    if (name == "score") return cmd_score(o, stage, out);
    if (name == "eval") return cmd_eval(o, stage, out);
    if (name == "sweep") return cmd_sweep(o, stage, out);
    if (name == "bench") return cmd_bench(o, stage, out);
    return cmd_divergence(o, stage, out);
  } catch (const UsageError& e) {
    err << "wbigan " << name << ": " << stage.name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "wbigan " << name << ": " << stage.name << ": " << e.what() << '\n';
    return kExitData;
  } catch (const DomainError& e) {
    err << "wbigan " << name << ": " << stage.name << ": " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "wbigan " << name << ": " << stage.name << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace wbigan
