#include "wbigan/model.hpp"

#include <fstream>
#include <sstream>

#include "wbigan/checkpoint.hpp"
#include "wbigan/errors.hpp"

namespace wbigan {

namespace {

constexpr const char* kCheckpointFormat = "wbigan-checkpoint";
constexpr int kCheckpointVersion = 1;

std::vector<std::size_t> widths(std::size_t in, const std::vector<std::size_t>& hidden,
                                std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

void require_cols(const Matrix& m, std::size_t cols, const char* what) {
  if (m.cols() != cols) {
    throw ShapeError(std::string(what) + " must have " + std::to_string(cols) + " columns, got " +
                     shape_string(m));
  }
}

std::string describe(const Mlp& net) {
  std::ostringstream os;
  os << net.input_width();
  for (const auto& l : net.layers) {
    os << " -> " << l.output_width() << ' ' << l.activation.tag();
    if (l.dropout_rate > 0.0) os << " dropout " << l.dropout_rate;
  }
  return os.str();
}

}  // namespace

void BiganModel::validate() const {
  generator.validate();
  encoder.validate();
  critic.validate();
  if (generator.input_width() != latent_dim || generator.output_width() != input_dim) {
    throw ShapeError("generator must map latent_dim -> input_dim");
  }
  if (encoder.input_width() != input_dim || encoder.output_width() != latent_dim) {
    throw ShapeError("encoder must map input_dim -> latent_dim");
  }
  if (critic.input_width() != input_dim + latent_dim || critic.output_width() != 1) {
    throw ShapeError("critic must map input_dim + latent_dim -> 1");
  }
  for (std::size_t i = 0; i < tap_indices.size(); ++i) {
    if (tap_indices[i] + 1 >= critic.layers.size()) {
      throw ShapeError("tap index " + std::to_string(tap_indices[i]) + " is not a hidden layer");
    }
    if (i > 0 && tap_indices[i] <= tap_indices[i - 1]) {
      throw ShapeError("tap indices must be strictly increasing");
    }
  }
}

std::size_t BiganModel::parameter_count() const noexcept {
  return generator.parameter_count() + encoder.parameter_count() + critic.parameter_count();
}

BiganModel init_model(const TrainConfig& cfg, std::size_t input_dim, Rng& rng) {
  cfg.validate();
  if (input_dim == 0) throw DomainError("input_dim must be positive");
  const auto& a = cfg.architecture;
  const auto hidden = Activation::leaky_relu(a.leaky_slope);
  BiganModel m;
  m.latent_dim = cfg.latent_dim;
  m.input_dim = input_dim;
  m.generator = make_mlp(widths(cfg.latent_dim, a.generator_hidden, input_dim), hidden,
                         Activation::sigmoid(), 0.0, rng);
  m.encoder = make_mlp(widths(input_dim, a.encoder_hidden, cfg.latent_dim), hidden,
                       Activation::identity(), 0.0, rng);
  m.critic = make_mlp(widths(input_dim + cfg.latent_dim, a.critic_hidden, 1), hidden,
                      Activation::identity(), a.critic_dropout, rng);
  // Taps sit on the last hidden layers, one per lambda weight.
  const std::size_t hidden_count = a.critic_hidden.size();
  for (std::size_t k = 0; k < cfg.lambda_weights.size(); ++k) {
    m.tap_indices.push_back(hidden_count - cfg.lambda_weights.size() + k);
  }
  m.validate();
  return m;
}

Matrix generate(const BiganModel& m, const Matrix& z, Mode mode, Rng& rng, Tape* tape) {
  require_cols(z, m.latent_dim, "latent batch");
  return forward(m.generator, z, mode, rng, tape);
}

Matrix encode(const BiganModel& m, const Matrix& x, Mode mode, Rng& rng, Tape* tape) {
  require_cols(x, m.input_dim, "data batch");
  return forward(m.encoder, x, mode, rng, tape);
}

CriticBatch criticize(const BiganModel& m, const Matrix& x, const Matrix& z, Mode mode, Rng& rng,
                      Tape* tape) {
  require_cols(x, m.input_dim, "data batch");
  require_cols(z, m.latent_dim, "latent batch");
  if (x.rows() != z.rows()) throw ShapeError("data and latent batches differ in size");
  Tape local;
  Tape& t = tape ? *tape : local;
  Matrix out = forward(m.critic, hconcat(x, z), mode, rng, &t);
  CriticBatch result;
  result.scores.resize(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) result.scores[r] = out(r, 0);
  for (std::size_t idx : m.tap_indices) result.taps.push_back(t.layer_output(idx));
  return result;
}

Vector generate(const BiganModel& m, std::span<const double> z, Mode mode, Rng& rng) {
  return generate(m, Matrix::from_row(z), mode, rng).row_vector(0);
}

Vector encode(const BiganModel& m, std::span<const double> x, Mode mode, Rng& rng) {
  return encode(m, Matrix::from_row(x), mode, rng).row_vector(0);
}

CriticOutput criticize(const BiganModel& m, std::span<const double> x, std::span<const double> z,
                       Mode mode, Rng& rng) {
  auto batch = criticize(m, Matrix::from_row(x), Matrix::from_row(z), mode, rng);
  CriticOutput out{batch.scores[0], {}};
  for (const auto& tap : batch.taps) out.taps.push_back(tap.row_vector(0));
  return out;
}

Matrix generate(const BiganModel& m, const Matrix& z) {
  Rng unused(0);
  return generate(m, z, Mode::Eval, unused);
}

Matrix encode(const BiganModel& m, const Matrix& x) {
  Rng unused(0);
  return encode(m, x, Mode::Eval, unused);
}

CriticBatch criticize(const BiganModel& m, const Matrix& x, const Matrix& z) {
  Rng unused(0);
  return criticize(m, x, z, Mode::Eval, unused);
}

Vector generate(const BiganModel& m, std::span<const double> z) {
  Rng unused(0);
  return generate(m, z, Mode::Eval, unused);
}

Vector encode(const BiganModel& m, std::span<const double> x) {
  Rng unused(0);
  return encode(m, x, Mode::Eval, unused);
}

CriticOutput criticize(const BiganModel& m, std::span<const double> x, std::span<const double> z) {
  Rng unused(0);
  return criticize(m, x, z, Mode::Eval, unused);
}

nlohmann::json model_to_json(const BiganModel& m) {
  return {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"input_dim", m.input_dim},
      {"latent_dim", m.latent_dim},
      {"tap_indices", m.tap_indices},
      {"architecture",
       {{"generator", describe(m.generator)},
        {"encoder", describe(m.encoder)},
        {"critic", describe(m.critic)}}},
      {"generator", mlp_to_json(m.generator)},
      {"encoder", mlp_to_json(m.encoder)},
      {"critic", mlp_to_json(m.critic)},
  };
}

BiganModel model_from_json(const nlohmann::json& doc) {
  BiganModel m;
  try {
    if (doc.at("format").get<std::string>() != kCheckpointFormat) {
      throw DomainError("not a wbigan checkpoint");
    }
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DomainError("unsupported checkpoint version " + std::to_string(version));
    }
    m.input_dim = doc.at("input_dim").get<std::size_t>();
    m.latent_dim = doc.at("latent_dim").get<std::size_t>();
    m.tap_indices = doc.at("tap_indices").get<std::vector<std::size_t>>();
    m.generator = mlp_from_json(doc.at("generator"));
    m.encoder = mlp_from_json(doc.at("encoder"));
    m.critic = mlp_from_json(doc.at("critic"));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed checkpoint: ") + e.what());
  }
  m.validate();
  return m;
}

void save_checkpoint(const BiganModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write checkpoint " + path.string());
  out << model_to_json(m).dump(1) << '\n';
}

BiganModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open checkpoint " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace wbigan
