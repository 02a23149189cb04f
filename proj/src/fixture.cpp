#include "wbigan/fixture.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "wbigan/errors.hpp"
#include "wbigan/kdd.hpp"
#include "wbigan/rng.hpp"

namespace wbigan {

namespace {

struct CategoricalField {
  std::size_t field;
  std::vector<std::string> vocabulary;
  std::array<std::vector<double>, 2> weights;  // per cluster
};

const std::vector<CategoricalField>& categorical_fields() {
  static const std::vector<CategoricalField> fields{
      {1, {"icmp", "tcp", "udp"}, {{{0.9, 0.0, 0.1}, {0.0, 0.9, 0.1}}}},
      {2,
       {"domain_u", "ecr_i", "ftp_data", "http", "other", "private", "smtp", "telnet"},
       {{{0.0, 0.8, 0.0, 0.0, 0.1, 0.1, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.1, 0.1, 0.7, 0.0, 0.1}}}},
      {3, {"REJ", "RSTR", "S0", "SF", "SH"}, {{{0.0, 0.0, 0.0, 0.95, 0.05}, {0.15, 0.0, 0.8, 0.05, 0.0}}}},
  };
  return fields;
}

constexpr std::array<std::size_t, 4> kBinaryFields{6, 11, 20, 21};
constexpr std::size_t kConstantField = 19;  // num_outbound_cmds is always 0 in the real data

std::size_t draw_category(const std::vector<double>& weights, Rng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::vector<std::string> synthesize_kdd_lines(const FixtureOptions& options) {
  Rng params_rng = Rng(options.seed).fork(0);
  Rng draw_rng = Rng(options.seed).fork(1);

  // Per-feature cluster means/deviations, anomaly shift direction, binary probabilities.
  std::array<std::array<double, kKddFeatureCount>, 2> mean{}, sd{}, p_one{};
  std::array<double, kKddFeatureCount> direction{};
  for (std::size_t f = 0; f < kKddFeatureCount; ++f) {
    for (int c = 0; c < 2; ++c) {
      mean[c][f] = 5.0 + 3.0 * params_rng.uniform();
      sd[c][f] = 0.5 + params_rng.uniform();
      p_one[c][f] = 0.1 + 0.8 * params_rng.uniform();
    }
    direction[f] = params_rng.uniform() < 0.5 ? -1.0 : 1.0;
  }

  auto is_categorical = [](std::size_t f) { return f >= 1 && f <= 3; };
  auto is_binary = [](std::size_t f) {
    return std::find(kBinaryFields.begin(), kBinaryFields.end(), f) != kBinaryFields.end();
  };

  const std::size_t total = options.majority + options.minority;
  std::vector<bool> minority(total, false);
  std::fill(minority.begin(), minority.begin() + static_cast<std::ptrdiff_t>(options.minority), true);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  draw_rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::string> lines;
  lines.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const bool anomalous = minority[order[i]];
    const int cluster = draw_rng.uniform() < 0.5 ? 0 : 1;
    std::array<std::string, kKddFeatureCount> fields;
    for (const auto& cf : categorical_fields()) {
      std::size_t idx = draw_category(cf.weights[cluster], draw_rng);
      if (anomalous) idx = (idx + 1) % cf.vocabulary.size();
      fields[cf.field] = cf.vocabulary[idx];
    }
    for (std::size_t f = 0; f < kKddFeatureCount; ++f) {
      if (is_categorical(f)) continue;
      if (f == kConstantField) {
        fields[f] = "0";
      } else if (is_binary(f)) {
        fields[f] = draw_rng.uniform() < p_one[cluster][f] ? "1" : "0";
      } else {
        double v = mean[cluster][f] + sd[cluster][f] * draw_rng.normal();
        if (anomalous) v += 3.0 * sd[cluster][f] * direction[f];
        fields[f] = fmt(v);
      }
    }
    std::string line;
    for (const auto& field : fields) {
      line += field;
      line += ',';
    }
    line += anomalous ? "normal." : (cluster == 0 ? "smurf." : "neptune.");
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_kdd_fixture(const std::filesystem::path& path, const FixtureOptions& options) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write fixture " + path.string());
  for (const auto& line : synthesize_kdd_lines(options)) out << line << '\n';
}

}  // namespace wbigan
