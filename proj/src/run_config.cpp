#include "wbigan/run_config.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <istream>
#include <memory>
#include <sstream>

#include "wbigan/csv.hpp"
#include "wbigan/errors.hpp"

namespace wbigan {

namespace {

constexpr const char* kManifestFormat = "wbigan-manifest";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& f : split_fields(text)) out.push_back(parse_double(trim(f)));
  return out;
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (const auto& f : split_fields(text)) out.push_back(parse_size(trim(f)));
  return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

std::string size_text(std::size_t v) { return std::to_string(v); }

}  // namespace

void RunConfig::validate() const {
  train.validate();
  if (!(contamination >= 0.0 && contamination <= 1.0)) {
    throw DomainError("contamination must lie in [0, 1]");
  }
  if (threads == 0) throw DomainError("threads must be positive");
}

void apply_setting(RunConfig& cfg, std::string_view raw_key, std::string_view raw_value) {
  const std::string key(trim(raw_key));
  const std::string value = unquote(trim(raw_value));
  auto& t = cfg.train;
  auto& a = t.architecture;
  try {
    if (key == "latent_dim") t.latent_dim = parse_size(value);
    else if (key == "clip_bound") t.clip_bound = parse_double(value);
    else if (key == "learning_rate") t.learning_rate = parse_double(value);
    else if (key == "rms_decay") t.rms_decay = parse_double(value);
    else if (key == "critic_steps") t.critic_steps_per_gen_step = parse_size(value);
    else if (key == "batch_size") t.batch_size = parse_size(value);
    else if (key == "epochs") t.epochs = parse_size(value);
    else if (key == "seed") t.seed = parse_size(value);
    else if (key == "objective") t.objective = objective_from_string(value);
    else if (key == "lambda") t.lambda_weights = parse_double_list(value);
    else if (key == "generator_hidden") a.generator_hidden = parse_size_list(value);
    else if (key == "encoder_hidden") a.encoder_hidden = parse_size_list(value);
    else if (key == "critic_hidden") a.critic_hidden = parse_size_list(value);
    else if (key == "leaky_slope") a.leaky_slope = parse_double(value);
    else if (key == "critic_dropout") a.critic_dropout = parse_double(value);
    else if (key == "contamination") cfg.contamination = parse_double(value);
    else if (key == "max_train") {
      cfg.max_train = value == "none" ? std::nullopt : std::optional(parse_size(value));
    } else if (key == "test_size") {
      cfg.test_size = value == "none" ? std::nullopt : std::optional(parse_size(value));
    } else if (key == "coding") {
      if (value == "one_hot") cfg.coding = CategoricalCoding::OneHot;
      else if (value == "dummy") cfg.coding = CategoricalCoding::Dummy;
      else throw DomainError("coding must be one_hot or dummy");
    } else if (key == "threads") cfg.threads = parse_size(value);
    else throw UsageError("unknown config key '" + key + "'");
  } catch (const DomainError& e) {
    throw UsageError("config key '" + key + "': " + e.what());
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty() || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  return parse_config(in);
}

std::map<std::string, std::string> config_entries(const RunConfig& cfg) {
  const auto& t = cfg.train;
  const auto& a = t.architecture;
  return {
      {"latent_dim", size_text(t.latent_dim)},
      {"clip_bound", format_double(t.clip_bound)},
      {"learning_rate", format_double(t.learning_rate)},
      {"rms_decay", format_double(t.rms_decay)},
      {"critic_steps", size_text(t.critic_steps_per_gen_step)},
      {"batch_size", size_text(t.batch_size)},
      {"epochs", size_text(t.epochs)},
      {"seed", std::to_string(t.seed)},
      {"objective", to_string(t.objective)},
      {"lambda", join(t.lambda_weights, format_double)},
      {"generator_hidden", join(a.generator_hidden, size_text)},
      {"encoder_hidden", join(a.encoder_hidden, size_text)},
      {"critic_hidden", join(a.critic_hidden, size_text)},
      {"leaky_slope", format_double(a.leaky_slope)},
      {"critic_dropout", format_double(a.critic_dropout)},
      {"contamination", format_double(cfg.contamination)},
      {"max_train", cfg.max_train ? size_text(*cfg.max_train) : "none"},
      {"test_size", cfg.test_size ? size_text(*cfg.test_size) : "none"},
      {"coding", cfg.coding == CategoricalCoding::OneHot ? "one_hot" : "dummy"},
      {"threads", size_text(cfg.threads)},
  };
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : config_entries(cfg)) os << k << " = " << v << '\n';
  return os.str();
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  return {
      {"format", kManifestFormat},
      {"version", m.version},
      {"config", config_entries(m.config)},
      {"seed", m.config.train.seed},
      {"dataset", {{"path", m.dataset_path}, {"sha256", m.dataset_sha256}, {"records", m.dataset_records}}},
      {"checkpoint", m.checkpoint},
      {"schema", m.schema},
      {"history", m.history},
      {"metrics", m.metrics},
      {"timings", m.timings},
  };
}

RunManifest manifest_from_json(const nlohmann::json& doc) {
  RunManifest m;
  try {
    if (doc.at("format").get<std::string>() != kManifestFormat) throw DomainError("not a wbigan manifest");
    m.version = doc.at("version").get<int>();
    if (m.version != 1) throw DomainError("unsupported manifest version " + std::to_string(m.version));
    for (const auto& [k, v] : doc.at("config").items()) apply_setting(m.config, k, v.get<std::string>());
    if (doc.at("seed").get<std::uint64_t>() != m.config.train.seed) {
      throw DomainError("manifest seed disagrees with its config snapshot");
    }
    const auto& d = doc.at("dataset");
    m.dataset_path = d.at("path").get<std::string>();
    m.dataset_sha256 = d.at("sha256").get<std::string>();
    m.dataset_records = d.at("records").get<std::size_t>();
    m.checkpoint = doc.at("checkpoint").get<std::string>();
    m.schema = doc.at("schema").get<std::string>();
    m.history = doc.at("history").get<std::string>();
    m.metrics = doc.at("metrics").get<std::map<std::string, double>>();
    m.timings = doc.at("timings").get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write manifest " + path.string());
  out << manifest_to_json(m).dump(2) << '\n';
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  return manifest_from_json(doc);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw StateError("cannot initialize SHA-256");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace wbigan
