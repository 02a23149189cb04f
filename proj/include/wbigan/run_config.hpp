#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "wbigan/config.hpp"
#include "wbigan/kdd.hpp"

namespace wbigan {

// Everything one pipeline run needs beyond the data: training hyperparameters plus data
// preparation settings.
struct RunConfig {
  TrainConfig train;
  double contamination = 0.2;
  std::optional<std::size_t> max_train;
  std::optional<std::size_t> test_size;
  CategoricalCoding coding = CategoricalCoding::OneHot;
  std::size_t threads = 1;

  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Config files are `key = value` lines; `#` starts a comment, [sections] are ignored and
// list values are comma separated. Unknown keys and bad values raise UsageError.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

// Canonical key -> text form of every setting; apply_setting reads each back exactly.
std::map<std::string, std::string> config_entries(const RunConfig& cfg);
std::string render_config(const RunConfig& cfg);

struct RunManifest {
  int version = 1;
  RunConfig config;
  std::string dataset_path;
  std::string dataset_sha256;
  std::size_t dataset_records = 0;
  std::string checkpoint;
  std::string schema;
  std::string history;
  std::map<std::string, double> metrics;
  std::map<std::string, double> timings;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& doc);
void save_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace wbigan
