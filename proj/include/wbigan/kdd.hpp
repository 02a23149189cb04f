#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbigan/sample.hpp"

namespace wbigan {

inline constexpr std::size_t kKddFeatureCount = 41;

// Field names of the 41 connection features, in file order.
const std::array<std::string_view, kKddFeatureCount>& kdd_feature_names();

struct RawRecord {
  std::vector<std::string> fields;  // 41 feature fields as text
  std::string label;                // trailing period stripped
  std::size_t line = 0;             // 1-based source line
};

// One comma-separated record line: 41 features plus a label. Throws ParseError.
RawRecord parse_kdd_line(std::string_view line, std::size_t line_no);
// Blank lines are skipped; every other line must be a record.
std::vector<RawRecord> parse_kdd(std::istream& in);
std::vector<RawRecord> read_kdd_file(const std::filesystem::path& path);

// Class under the dataset's own labelling: "normal" is normal, any attack name is anomalous.
Truth original_class(const RawRecord& r);
// Class after swapping: attack records become the normal class, "normal" records anomalous.
std::vector<Truth> swap_labels(std::span<const RawRecord> records);

enum class CategoricalCoding { OneHot, Dummy };

enum class FeatureKind { Categorical, Continuous };

struct FeatureSpec {
  std::size_t field = 0;  // index into RawRecord::fields
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  std::vector<std::string> vocabulary;  // sorted, unique (categorical only)
  double min = 0.0;                     // training range (continuous only)
  double max = 0.0;
  std::size_t offset = 0;  // first encoded column
  std::size_t width = 0;   // encoded columns

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct EncodingSchema {
  CategoricalCoding coding = CategoricalCoding::OneHot;
  std::vector<FeatureSpec> features;
  std::size_t total_width = 0;

  friend bool operator==(const EncodingSchema&, const EncodingSchema&) = default;
};

// Text-valued features protocol_type, service and flag become indicator blocks; every other
// feature (including the 0/1 symbolic ones) is a single min-max scaled column.
EncodingSchema fit_schema(std::span<const RawRecord> training,
                          CategoricalCoding coding = CategoricalCoding::OneHot);

// Unseen categories encode to an all-zero block. Continuous values are scaled with the
// training range and clamped to [0, 1]; a constant training column encodes to 0.
EncodedSample encode(const RawRecord& record, const EncodingSchema& schema, Truth truth,
                     std::size_t sample_id);
std::vector<EncodedSample> encode_records(std::span<const RawRecord> records,
                                          std::span<const Truth> classes,
                                          std::span<const std::size_t> indices,
                                          const EncodingSchema& schema);

struct DecodedRecord {
  std::vector<std::string> categorical;  // one per categorical feature; "" for an all-zero block
  std::vector<double> continuous;        // one per continuous feature, unscaled
};
// Inverse of encode up to clamping. Under dummy coding an all-zero block decodes to the
// reference (first) category.
DecodedRecord decode(std::span<const double> features, const EncodingSchema& schema);

nlohmann::json schema_to_json(const EncodingSchema& schema);
EncodingSchema schema_from_json(const nlohmann::json& doc);
void save_schema(const EncodingSchema& schema, const std::filesystem::path& path);
EncodingSchema load_schema(const std::filesystem::path& path);

// Encoded-sample cache: CSV with columns sample_id, truth, f0 .. f{w-1}.
void write_encoded_csv(std::span<const EncodedSample> samples, const std::filesystem::path& path);
std::vector<EncodedSample> read_encoded_csv(const std::filesystem::path& path);

struct SplitOptions {
  double contamination = 0.2;
  std::optional<std::size_t> test_size;  // largest feasible size when unset
  std::optional<std::size_t> max_train;
};

struct Split {
  std::vector<std::size_t> train;         // normal-class records of half A
  std::vector<std::size_t> test;          // drawn from half B
  std::vector<std::size_t> holdout_pool;  // all of half B, shuffled order
};

// Shuffles record indices with `seed`, halves them, keeps the normal-class part of the first
// half for training and draws a test set from the second half containing exactly
// floor(c * |test| + 0.5) anomalous records.
Split split(std::span<const Truth> classes, std::uint64_t seed, const SplitOptions& options);

// Test set drawn from `pool` (order preserved). Throws DomainError stating the largest
// achievable contamination when the pool lacks anomalies for `contamination`.
std::vector<std::size_t> draw_test_set(std::span<const std::size_t> pool,
                                       std::span<const Truth> classes, double contamination,
                                       std::optional<std::size_t> test_size = std::nullopt);

}  // namespace wbigan
