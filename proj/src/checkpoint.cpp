#include "wbigan/checkpoint.hpp"

#include "wbigan/errors.hpp"

namespace wbigan {

using nlohmann::json;

json mlp_to_json(const Mlp& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    json rows = json::array();
    for (std::size_t r = 0; r < l.weights.rows(); ++r) {
      auto row = l.weights.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json entry = {
        {"inputs", l.input_width()},
        {"outputs", l.output_width()},
        {"activation", l.activation.tag()},
        {"dropout", l.dropout_rate},
        {"weights", std::move(rows)},
        {"bias", l.bias},
    };
    if (l.activation.kind == ActivationKind::LeakyReLU) entry["slope"] = l.activation.slope;
    layers.push_back(std::move(entry));
  }
  return json{{"layers", std::move(layers)}};
}

Mlp mlp_from_json(const json& doc) {
  Mlp net;
  try {
    for (const auto& entry : doc.at("layers")) {
      const auto inputs = entry.at("inputs").get<std::size_t>();
      const auto outputs = entry.at("outputs").get<std::size_t>();
      DenseLayer layer;
      layer.activation = Activation::from_tag(entry.at("activation").get<std::string>(),
                                              entry.value("slope", 0.2));
      layer.dropout_rate = entry.at("dropout").get<double>();
      layer.weights = Matrix(outputs, inputs);
      const auto& rows = entry.at("weights");
      if (rows.size() != outputs) throw ShapeError("checkpoint weight row count mismatch");
      for (std::size_t r = 0; r < outputs; ++r) {
        auto values = rows[r].get<std::vector<double>>();
        if (values.size() != inputs) throw ShapeError("checkpoint weight column count mismatch");
        std::copy(values.begin(), values.end(), layer.weights.row(r).begin());
      }
      layer.bias = entry.at("bias").get<std::vector<double>>();
      layer.validate();
      net.layers.push_back(std::move(layer));
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed network document: ") + e.what());
  }
  net.validate();
  return net;
}

}  // namespace wbigan
