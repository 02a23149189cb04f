#include "wbigan/sample.hpp"

#include <algorithm>

#include "wbigan/errors.hpp"

namespace wbigan {

Truth truth_from_string(const std::string& text) {
  if (text == "normal") return Truth::Normal;
  if (text == "anomalous") return Truth::Anomalous;
  throw DomainError("unknown class '" + text + "'");
}

Matrix stack_features(std::span<const EncodedSample> samples) {
  if (samples.empty()) return Matrix();
  const std::size_t width = samples.front().features.size();
  Matrix m(samples.size(), width);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != width) throw ShapeError("samples differ in width");
    std::copy(samples[i].features.begin(), samples[i].features.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace wbigan
