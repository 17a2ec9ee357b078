#include "stackrepair/json_io.hpp"

#include <string>

#include "stackrepair/error.hpp"

namespace stackrepair {

using nlohmann::json;

json to_json(const Block& block) {
  return {{"type", std::string(block_type(block.type).name)},
          {"material", std::string(to_string(block.material))},
          {"x", block.x},
          {"y", block.y},
          {"rotation", block.rotation}};
}

Block block_from_json(const json& j) {
  Block b;
  const auto type = j.at("type").get<std::string>();
  const auto kind = block_kind_from_name(type);
  if (!kind) throw Error(Errc::unknown_block_type, "unknown block type '" + type + "'");
  b.type = *kind;
  const auto mat = j.at("material").get<std::string>();
  const auto m = material_from_name(mat);
  if (!m) throw Error(Errc::unknown_material, "unknown material '" + mat + "'");
  b.material = *m;
  b.x = j.at("x").get<double>();
  b.y = j.at("y").get<double>();
  b.rotation = j.at("rotation").get<int>();
  if (b.rotation != 0 && b.rotation != 90) throw Error(Errc::bad_rotation, "rotation must be 0 or 90");
  return b;
}

json to_json(const GridSpec& spec) {
  return {{"cell_size", spec.cell_size},
          {"width", spec.width_cells},
          {"height", spec.height_cells},
          {"origin_x", spec.origin_x},
          {"origin_y", spec.origin_y}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec s;
  s.cell_size = j.at("cell_size").get<double>();
  s.width_cells = j.at("width").get<int>();
  s.height_cells = j.at("height").get<int>();
  s.origin_x = j.at("origin_x").get<double>();
  s.origin_y = j.at("origin_y").get<double>();
  return s;
}

json to_json(const SimOutcome& outcome) {
  json blocks = json::array();
  for (std::size_t i = 0; i < outcome.per_block.size(); ++i) {
    const auto& b = outcome.per_block[i];
    blocks.push_back({{"index", i},
                      {"peak_velocity", b.peak_velocity},
                      {"net_displacement", b.net_displacement},
                      {"damage", b.damage},
                      {"destroyed", b.destroyed}});
  }
  return {{"stable", {{"velocity", outcome.stable_velocity},
                      {"destruction", outcome.stable_destruction},
                      {"damage", outcome.stable_damage}}},
          {"total_damage", outcome.total_damage},
          {"destroyed_count", outcome.destroyed_count},
          {"steps_run", outcome.steps_run},
          {"stopped_early", outcome.stopped_early},
          {"blocks", blocks}};
}

}  // namespace stackrepair
