#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wbigan/matrix.hpp"

namespace wbigan {

// Class after the label swap: the positive (anomalous) class is what metrics count.
enum class Truth { Normal, Anomalous };

inline Truth flip(Truth t) noexcept { return t == Truth::Normal ? Truth::Anomalous : Truth::Normal; }
inline const char* to_string(Truth t) noexcept { return t == Truth::Normal ? "normal" : "anomalous"; }
Truth truth_from_string(const std::string& text);

struct EncodedSample {
  Vector features;
  Truth truth = Truth::Normal;
  std::size_t sample_id = 0;
};

// Stacks sample features into a batch matrix (one row per sample).
Matrix stack_features(std::span<const EncodedSample> samples);

}  // namespace wbigan
