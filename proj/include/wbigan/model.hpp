#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbigan/config.hpp"
#include "wbigan/mlp.hpp"

namespace wbigan {

// Generator G: latent -> data, encoder E: data -> latent, critic D over the joint pair
// x || z. The critic exposes intermediate activations ("taps") at tap_indices.
struct BiganModel {
  Mlp generator;
  Mlp encoder;
  Mlp critic;
  std::vector<std::size_t> tap_indices;
  std::size_t latent_dim = 0;
  std::size_t input_dim = 0;

  void validate() const;
  std::size_t parameter_count() const noexcept;

  friend bool operator==(const BiganModel&, const BiganModel&) = default;
};

struct CriticOutput {
  double score = 0.0;
  std::vector<Vector> taps;
};

struct CriticBatch {
  Vector scores;
  std::vector<Matrix> taps;  // one matrix (batch x tap width) per tap index
};

BiganModel init_model(const TrainConfig& cfg, std::size_t input_dim, Rng& rng);

Matrix generate(const BiganModel& m, const Matrix& z, Mode mode, Rng& rng, Tape* tape = nullptr);
Matrix encode(const BiganModel& m, const Matrix& x, Mode mode, Rng& rng, Tape* tape = nullptr);
CriticBatch criticize(const BiganModel& m, const Matrix& x, const Matrix& z, Mode mode, Rng& rng,
                      Tape* tape = nullptr);

// Single-sample forms.
Vector generate(const BiganModel& m, std::span<const double> z, Mode mode, Rng& rng);
Vector encode(const BiganModel& m, std::span<const double> x, Mode mode, Rng& rng);
CriticOutput criticize(const BiganModel& m, std::span<const double> x, std::span<const double> z,
                       Mode mode, Rng& rng);

// Eval-mode shorthands (deterministic, no randomness consumed).
Matrix generate(const BiganModel& m, const Matrix& z);
Matrix encode(const BiganModel& m, const Matrix& x);
CriticBatch criticize(const BiganModel& m, const Matrix& x, const Matrix& z);
Vector generate(const BiganModel& m, std::span<const double> z);
Vector encode(const BiganModel& m, std::span<const double> x);
CriticOutput criticize(const BiganModel& m, std::span<const double> x, std::span<const double> z);

// Checkpoint document: model header (dims, taps, architecture summary) plus the three networks.
nlohmann::json model_to_json(const BiganModel& m);
BiganModel model_from_json(const nlohmann::json& doc);
void save_checkpoint(const BiganModel& m, const std::filesystem::path& path);
BiganModel load_checkpoint(const std::filesystem::path& path);

}  // namespace wbigan
