#include "wbigan/kdd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "wbigan/csv.hpp"
#include "wbigan/errors.hpp"
#include "wbigan/rng.hpp"

namespace wbigan {

namespace {

constexpr std::array<std::size_t, 3> kCategoricalFields{1, 2, 3};
constexpr std::uint64_t kSplitStream = 10;
constexpr const char* kSchemaFormat = "wbigan-schema";
constexpr int kSchemaVersion = 1;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_categorical(std::size_t field) {
  return std::find(kCategoricalFields.begin(), kCategoricalFields.end(), field) !=
         kCategoricalFields.end();
}

double numeric_field(const RawRecord& r, const FeatureSpec& f) {
  try {
    return parse_double(r.fields[f.field]);
  } catch (const DomainError&) {
    throw ParseError(r.line, "feature " + f.name + " value '" + r.fields[f.field] +
                                 "' is not numeric");
  }
}

// Position of the category inside its block, or npos if unseen / the dummy reference.
std::size_t block_slot(const FeatureSpec& f, const std::string& value, CategoricalCoding coding) {
  auto it = std::lower_bound(f.vocabulary.begin(), f.vocabulary.end(), value);
  if (it == f.vocabulary.end() || *it != value) return std::string::npos;
  auto idx = static_cast<std::size_t>(it - f.vocabulary.begin());
  if (coding == CategoricalCoding::Dummy) return idx == 0 ? std::string::npos : idx - 1;
  return idx;
}

}  // namespace

const std::array<std::string_view, kKddFeatureCount>& kdd_feature_names() {
  static const std::array<std::string_view, kKddFeatureCount> names{
      "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
      "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in", "num_compromised",
      "root_shell", "su_attempted", "num_root", "num_file_creations", "num_shells",
      "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
      "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate", "srv_rerror_rate",
      "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
      "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
      "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
      "dst_host_srv_serror_rate", "dst_host_rerror_rate", "dst_host_srv_rerror_rate"};
  return names;
}

RawRecord parse_kdd_line(std::string_view line, std::size_t line_no) {
  auto fields = split_fields(trim(line));
  if (fields.size() != kKddFeatureCount + 1) {
    throw ParseError(line_no, "expected " + std::to_string(kKddFeatureCount + 1) +
                                  " comma-separated fields, found " + std::to_string(fields.size()));
  }
  RawRecord r;
  r.line = line_no;
  std::string_view label = trim(fields.back());
  if (!label.empty() && label.back() == '.') label.remove_suffix(1);
  if (label.empty()) throw ParseError(line_no, "empty label");
  r.label = std::string(label);
  fields.pop_back();
  for (auto& f : fields) f = std::string(trim(f));
  r.fields = std::move(fields);
  return r;
}

std::vector<RawRecord> parse_kdd(std::istream& in) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    records.push_back(parse_kdd_line(line, line_no));
  }
  return records;
}

std::vector<RawRecord> read_kdd_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file " + path.string());
  return parse_kdd(in);
}

Truth original_class(const RawRecord& r) {
  return r.label == "normal" ? Truth::Normal : Truth::Anomalous;
}

std::vector<Truth> swap_labels(std::span<const RawRecord> records) {
  std::vector<Truth> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(flip(original_class(r)));
  return out;
}

EncodingSchema fit_schema(std::span<const RawRecord> training, CategoricalCoding coding) {
  if (training.empty()) throw DomainError("cannot fit an encoding schema on zero records");
  const auto& names = kdd_feature_names();
  EncodingSchema schema;
  schema.coding = coding;
  std::size_t offset = 0;
  for (std::size_t field = 0; field < kKddFeatureCount; ++field) {
    FeatureSpec f;
    f.field = field;
    f.name = std::string(names[field]);
    f.offset = offset;
    if (is_categorical(field)) {
      f.kind = FeatureKind::Categorical;
      std::set<std::string> vocab;
      for (const auto& r : training) vocab.insert(r.fields[field]);
      f.vocabulary.assign(vocab.begin(), vocab.end());
      f.width = coding == CategoricalCoding::OneHot ? f.vocabulary.size() : f.vocabulary.size() - 1;
    } else {
      f.kind = FeatureKind::Continuous;
      f.min = std::numeric_limits<double>::infinity();
      f.max = -std::numeric_limits<double>::infinity();
      for (const auto& r : training) {
        const double v = numeric_field(r, f);
        f.min = std::min(f.min, v);
        f.max = std::max(f.max, v);
      }
      f.width = 1;
    }
    offset += f.width;
    schema.features.push_back(std::move(f));
  }
  schema.total_width = offset;
  return schema;
}

EncodedSample encode(const RawRecord& record, const EncodingSchema& schema, Truth truth,
                     std::size_t sample_id) {
  if (record.fields.size() != kKddFeatureCount) {
    throw ShapeError("record has " + std::to_string(record.fields.size()) + " features");
  }
  EncodedSample s{Vector(schema.total_width, 0.0), truth, sample_id};
  for (const auto& f : schema.features) {
    if (f.kind == FeatureKind::Categorical) {
      const std::size_t slot = block_slot(f, record.fields[f.field], schema.coding);
      if (slot != std::string::npos) s.features[f.offset + slot] = 1.0;
    } else {
      const double v = numeric_field(record, f);
      const double range = f.max - f.min;
      s.features[f.offset] = range > 0.0 ? std::clamp((v - f.min) / range, 0.0, 1.0) : 0.0;
    }
  }
  return s;
}

std::vector<EncodedSample> encode_records(std::span<const RawRecord> records,
                                          std::span<const Truth> classes,
                                          std::span<const std::size_t> indices,
                                          const EncodingSchema& schema) {
  if (records.size() != classes.size()) throw ShapeError("one class per record required");
  std::vector<EncodedSample> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) out.push_back(encode(records[idx], schema, classes[idx], idx));
  return out;
}

DecodedRecord decode(std::span<const double> features, const EncodingSchema& schema) {
  if (features.size() != schema.total_width) throw ShapeError("encoded width does not match schema");
  DecodedRecord d;
  for (const auto& f : schema.features) {
    if (f.kind == FeatureKind::Categorical) {
      std::string value;
      for (std::size_t j = 0; j < f.width; ++j) {
        if (features[f.offset + j] != 1.0) continue;
        value = f.vocabulary[schema.coding == CategoricalCoding::Dummy ? j + 1 : j];
        break;
      }
      if (value.empty() && schema.coding == CategoricalCoding::Dummy && !f.vocabulary.empty()) {
        value = f.vocabulary.front();
      }
      d.categorical.push_back(std::move(value));
    } else {
      d.continuous.push_back(f.min + features[f.offset] * (f.max - f.min));
    }
  }
  return d;
}

nlohmann::json schema_to_json(const EncodingSchema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : schema.features) {
    nlohmann::json j = {{"field", f.field}, {"name", f.name}, {"offset", f.offset}, {"width", f.width}};
    if (f.kind == FeatureKind::Categorical) {
      j["kind"] = "categorical";
      j["vocabulary"] = f.vocabulary;
    } else {
      j["kind"] = "continuous";
      j["min"] = f.min;
      j["max"] = f.max;
    }
    features.push_back(std::move(j));
  }
  return {{"format", kSchemaFormat},
          {"version", kSchemaVersion},
          {"coding", schema.coding == CategoricalCoding::OneHot ? "one_hot" : "dummy"},
          {"total_width", schema.total_width},
          {"features", std::move(features)}};
}

EncodingSchema schema_from_json(const nlohmann::json& doc) {
  EncodingSchema s;
  try {
    if (doc.at("format").get<std::string>() != kSchemaFormat) throw DomainError("not a wbigan schema");
    if (doc.at("version").get<int>() != kSchemaVersion) throw DomainError("unsupported schema version");
    const auto coding = doc.at("coding").get<std::string>();
    if (coding != "one_hot" && coding != "dummy") throw DomainError("unknown coding " + coding);
    s.coding = coding == "one_hot" ? CategoricalCoding::OneHot : CategoricalCoding::Dummy;
    s.total_width = doc.at("total_width").get<std::size_t>();
    for (const auto& j : doc.at("features")) {
      FeatureSpec f;
      f.field = j.at("field").get<std::size_t>();
      f.name = j.at("name").get<std::string>();
      f.offset = j.at("offset").get<std::size_t>();
      f.width = j.at("width").get<std::size_t>();
      if (j.at("kind").get<std::string>() == "categorical") {
        f.kind = FeatureKind::Categorical;
        f.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
      } else {
        f.kind = FeatureKind::Continuous;
        f.min = j.at("min").get<double>();
        f.max = j.at("max").get<double>();
      }
      s.features.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed schema document: ") + e.what());
  }
  return s;
}

void save_schema(const EncodingSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write schema " + path.string());
  out << schema_to_json(schema).dump(1) << '\n';
}

EncodingSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open schema " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("schema " + path.string() + " is not valid JSON: " + e.what());
  }
  return schema_from_json(doc);
}

void write_encoded_csv(std::span<const EncodedSample> samples, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"sample_id", "truth"};
  const std::size_t width = samples.empty() ? 0 : samples.front().features.size();
  for (std::size_t j = 0; j < width; ++j) t.header.push_back("f" + std::to_string(j));
  for (const auto& s : samples) {
    if (s.features.size() != width) throw ShapeError("samples differ in width");
    std::vector<std::string> row{std::to_string(s.sample_id), to_string(s.truth)};
    for (double v : s.features) row.push_back(format_double(v));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

std::vector<EncodedSample> read_encoded_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t id_col = t.column("sample_id");
  const std::size_t truth_col = t.column("truth");
  std::vector<EncodedSample> out;
  for (const auto& row : t.rows) {
    EncodedSample s;
    s.sample_id = parse_size(row[id_col]);
    s.truth = truth_from_string(row[truth_col]);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c != id_col && c != truth_col) s.features.push_back(parse_double(row[c]));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::size_t> draw_test_set(std::span<const std::size_t> pool,
                                       std::span<const Truth> classes, double contamination,
                                       std::optional<std::size_t> test_size) {
  if (!(contamination >= 0.0 && contamination <= 1.0)) {
    throw DomainError("contamination must lie in [0, 1]");
  }
  std::vector<std::size_t> normals, anomalies;
  for (std::size_t idx : pool) {
    if (idx >= classes.size()) throw ShapeError("pool index out of range");
    (classes[idx] == Truth::Anomalous ? anomalies : normals).push_back(idx);
  }
  auto quota = [&](std::size_t n) {
    return static_cast<std::size_t>(std::floor(contamination * static_cast<double>(n) + 0.5));
  };
  auto feasible = [&](std::size_t n) {
    const std::size_t k = quota(n);
    return k <= anomalies.size() && n - k <= normals.size();
  };

  std::size_t size = 0;
  if (test_size) {
    size = *test_size;
    if (!feasible(size)) {
      const double max_c = size ? static_cast<double>(anomalies.size()) / static_cast<double>(size) : 0.0;
      throw DomainError("insufficient records for a test set of " + std::to_string(size) +
                        " at contamination " + std::to_string(contamination) +
                        "; maximum achievable contamination is " + std::to_string(std::min(1.0, max_c)) +
                        " (" + std::to_string(anomalies.size()) + " anomalous, " +
                        std::to_string(normals.size()) + " normal available)");
    }
  } else {
    for (size = pool.size(); size > 0 && !feasible(size); --size) {
    }
    if (size == 0) {
      const double total = static_cast<double>(anomalies.size() + normals.size());
      const double max_c = total > 0 ? static_cast<double>(anomalies.size()) / total : 0.0;
      throw DomainError("insufficient anomalous records for contamination " +
                        std::to_string(contamination) + "; maximum achievable contamination is " +
                        std::to_string(max_c));
    }
  }
  const std::size_t k = quota(size);
  std::set<std::size_t> chosen(anomalies.begin(), anomalies.begin() + static_cast<std::ptrdiff_t>(k));
  chosen.insert(normals.begin(), normals.begin() + static_cast<std::ptrdiff_t>(size - k));
  std::vector<std::size_t> test;
  test.reserve(size);
  for (std::size_t idx : pool) {
    if (chosen.count(idx)) test.push_back(idx);
  }
  return test;
}

Split split(std::span<const Truth> classes, std::uint64_t seed, const SplitOptions& options) {
  std::vector<std::size_t> order(classes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng(seed).fork(kSplitStream);
  rng.shuffle(std::span<std::size_t>(order));

  const std::size_t half = order.size() / 2;
  Split s;
  for (std::size_t i = 0; i < half; ++i) {
    if (classes[order[i]] == Truth::Normal) s.train.push_back(order[i]);
  }
  if (options.max_train && s.train.size() > *options.max_train) s.train.resize(*options.max_train);
  s.holdout_pool.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  s.test = draw_test_set(s.holdout_pool, classes, options.contamination, options.test_size);
  return s;
}

}  // namespace wbigan
