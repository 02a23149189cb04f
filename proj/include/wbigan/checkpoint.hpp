#pragma once

#include <nlohmann/json.hpp>

#include "wbigan/mlp.hpp"

namespace wbigan {

// JSON representation of a network: per layer the dimensions, activation tag, dropout rate
// and row-major parameters. Doubles are written in shortest round-trip form, so
// mlp_from_json(mlp_to_json(n)) == n bit for bit.
nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

}  // namespace wbigan
