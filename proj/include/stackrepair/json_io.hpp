#pragma once

#include <json.hpp>

#include "stackrepair/grid.hpp"
#include "stackrepair/level.hpp"
#include "stackrepair/physics.hpp"

namespace stackrepair {

nlohmann::json to_json(const Block& block);
Block block_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GridSpec& spec);
GridSpec grid_from_json(const nlohmann::json& j);

/// Per-block outcomes and verdicts; the schema printed by `stackrepair simulate --json`.
nlohmann::json to_json(const SimOutcome& outcome);

}  // namespace stackrepair
