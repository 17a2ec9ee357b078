#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stackrepair {

/// Rectangular block shapes available in Science Birds. Values are the catalog ids.
enum class BlockKind : int {
  SquareHole = 1,
  RectBig = 2,
  RectMedium = 3,
  RectSmall = 4,
  RectFat = 5,
  RectTiny = 6,
  SquareTiny = 7,
  SquareSmall = 8,
};

struct BlockType {
  int id;
  BlockKind kind;
  std::string_view name;
  double width;
  double height;

  [[nodiscard]] bool is_square() const noexcept { return width == height; }
};

/// The eight catalog entries, ordered by id.
const std::array<BlockType, 8>& block_catalog() noexcept;
const BlockType& block_type(BlockKind kind) noexcept;
std::optional<BlockKind> block_kind_from_name(std::string_view name) noexcept;

enum class Material { wood, ice, stone };

std::string_view to_string(Material m) noexcept;
std::optional<Material> material_from_name(std::string_view name) noexcept;

struct Aabb {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  [[nodiscard]] double width() const noexcept { return x_max - x_min; }
  [[nodiscard]] double height() const noexcept { return y_max - y_min; }
  [[nodiscard]] double area() const noexcept { return width() * height(); }
  [[nodiscard]] double center_x() const noexcept { return 0.5 * (x_min + x_max); }
  [[nodiscard]] double center_y() const noexcept { return 0.5 * (y_min + y_max); }

  bool operator==(const Aabb&) const = default;
};

/// Length of the overlap of two intervals; negative when they are separated.
inline double overlap_x(const Aabb& a, const Aabb& b) noexcept {
  return std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
}
inline double overlap_y(const Aabb& a, const Aabb& b) noexcept {
  return std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
}
/// Interpenetration depth (positive only when the boxes overlap on both axes).
inline double penetration(const Aabb& a, const Aabb& b) noexcept {
  return std::min(overlap_x(a, b), overlap_y(a, b));
}
Aabb merge(const Aabb& a, const Aabb& b) noexcept;

struct Block {
  BlockKind type = BlockKind::SquareHole;
  Material material = Material::wood;
  double x = 0.0;  // center
  double y = 0.0;  // center
  int rotation = 0;  // degrees, 0 or 90

  /// Rotation-aware extents.
  [[nodiscard]] double width() const noexcept;
  [[nodiscard]] double height() const noexcept;

  bool operator==(const Block&) const = default;
};

Aabb effective_aabb(const Block& block) noexcept;

// Pig geometry is not part of the level format; fixed placeholder radius.
inline constexpr double kPigRadius = 0.23;

struct Pig {
  std::string kind = "BasicSmall";
  double x = 0.0;
  double y = 0.0;
  double radius = kPigRadius;

  bool operator==(const Pig&) const = default;
};

Aabb pig_aabb(const Pig& pig) noexcept;

/// A level: blocks and pigs plus any elements the toolkit does not interpret,
/// kept verbatim so corpus files survive a round-trip.
struct Level {
  std::string id;
  std::vector<Block> blocks;
  std::vector<Pig> pigs;
  std::vector<std::pair<std::string, std::string>> root_attributes;  // excluding id
  std::vector<std::string> level_extras;   // raw children of <Level> other than <GameObjects>
  std::vector<std::string> object_extras;  // raw children of <GameObjects> other than Block/Pig

  /// Bounding box of all blocks and pigs; nullopt for an empty level.
  [[nodiscard]] std::optional<Aabb> bounds() const;

  bool operator==(const Level&) const = default;
};

Level parse_level(std::string_view xml_text);
std::string serialize_level(const Level& level);

/// Reads and parses a file. The level id defaults to the file stem when the
/// document carries none.
Level load_level(const std::filesystem::path& path);
void save_level(const std::filesystem::path& path, const Level& level);

/// Formats a coordinate the way the serializer does (fixed, six decimals).
std::string format_number(double value);
/// Rounds a value onto the six-decimal lattice the serializer emits.
double quantize(double value);

}  // namespace stackrepair
