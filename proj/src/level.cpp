#include "stackrepair/level.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stackrepair/error.hpp"
#include "xml.hpp"

namespace stackrepair {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_xml: return "MalformedXml";
    case Errc::unknown_block_type: return "UnknownBlockType";
    case Errc::unknown_material: return "UnknownMaterial";
    case Errc::bad_rotation: return "BadRotation";
    case Errc::level_out_of_bounds: return "LevelOutOfBounds";
    case Errc::spec_mismatch: return "SpecMismatch";
    case Errc::io_error: return "IoError";
    case Errc::bad_magic: return "BadMagic";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::invalid_level: return "InvalidLevel";
    case Errc::not_stable_input: return "NotStableInput";
    case Errc::already_stable: return "AlreadyStable";
    case Errc::unpaired_files: return "UnpairedFiles";
  }
  return "Unknown";
}

const std::array<BlockType, 8>& block_catalog() noexcept {
  static constexpr std::array<BlockType, 8> kCatalog{{
      {1, BlockKind::SquareHole, "SquareHole", 0.85, 0.85},
      {2, BlockKind::RectBig, "RectBig", 2.06, 0.22},
      {3, BlockKind::RectMedium, "RectMedium", 1.68, 0.22},
      {4, BlockKind::RectSmall, "RectSmall", 0.85, 0.2},
      {5, BlockKind::RectFat, "RectFat", 0.85, 0.43},
      {6, BlockKind::RectTiny, "RectTiny", 0.42, 0.22},
      {7, BlockKind::SquareTiny, "SquareTiny", 0.22, 0.22},
      {8, BlockKind::SquareSmall, "SquareSmall", 0.43, 0.43},
  }};
  return kCatalog;
}

const BlockType& block_type(BlockKind kind) noexcept {
  return block_catalog()[static_cast<std::size_t>(static_cast<int>(kind) - 1)];
}

std::optional<BlockKind> block_kind_from_name(std::string_view name) noexcept {
  for (const auto& t : block_catalog()) {
    if (t.name == name) return t.kind;
  }
  return std::nullopt;
}

std::string_view to_string(Material m) noexcept {
  switch (m) {
    case Material::wood: return "wood";
    case Material::ice: return "ice";
    case Material::stone: return "stone";
  }
  return "wood";
}

std::optional<Material> material_from_name(std::string_view name) noexcept {
  if (name == "wood") return Material::wood;
  if (name == "ice") return Material::ice;
  if (name == "stone") return Material::stone;
  return std::nullopt;
}

Aabb merge(const Aabb& a, const Aabb& b) noexcept {
  return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
          std::max(a.y_max, b.y_max)};
}

double Block::width() const noexcept {
  const auto& t = block_type(type);
  return rotation == 90 ? t.height : t.width;
}

double Block::height() const noexcept {
  const auto& t = block_type(type);
  return rotation == 90 ? t.width : t.height;
}

Aabb effective_aabb(const Block& block) noexcept {
  const double hw = 0.5 * block.width();
  const double hh = 0.5 * block.height();
  return {block.x - hw, block.y - hh, block.x + hw, block.y + hh};
}

Aabb pig_aabb(const Pig& pig) noexcept {
  return {pig.x - pig.radius, pig.y - pig.radius, pig.x + pig.radius, pig.y + pig.radius};
}

std::optional<Aabb> Level::bounds() const {
  std::optional<Aabb> box;
  for (const auto& b : blocks) {
    auto a = effective_aabb(b);
    box = box ? merge(*box, a) : a;
  }
  for (const auto& p : pigs) {
    auto a = pig_aabb(p);
    box = box ? merge(*box, a) : a;
  }
  return box;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

double quantize(double value) { return std::strtod(format_number(value).c_str(), nullptr); }

namespace {

double parse_number(const xml::Element& el, std::string_view key) {
  const std::string* text = el.attribute(key);
  if (text == nullptr) {
    throw Error(Errc::malformed_xml, "<" + el.name + "> is missing attribute " + std::string(key));
  }
  std::string_view s = *text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(value)) {
    throw Error(Errc::malformed_xml,
                "attribute " + std::string(key) + "=\"" + *text + "\" is not a finite number");
  }
  return value;
}

Block parse_block(const xml::Element& el) {
  Block b;
  const std::string* type = el.attribute("type");
  if (type == nullptr) throw Error(Errc::malformed_xml, "<Block> is missing attribute type");
  auto kind = block_kind_from_name(*type);
  if (!kind) throw Error(Errc::unknown_block_type, "block type \"" + *type + "\" is not in the catalog");
  b.type = *kind;
  const std::string* material = el.attribute("material");
  if (material == nullptr) throw Error(Errc::malformed_xml, "<Block> is missing attribute material");
  auto mat = material_from_name(*material);
  if (!mat) throw Error(Errc::unknown_material, "material \"" + *material + "\"");
  b.material = *mat;
  b.x = parse_number(el, "x");
  b.y = parse_number(el, "y");
  double rotation = el.attribute("rotation") ? parse_number(el, "rotation") : 0.0;
  double rounded = std::round(rotation);
  if (rounded != 0.0 && rounded != 90.0) {
    throw Error(Errc::bad_rotation, "rotation " + *el.attribute("rotation") + " is neither 0 nor 90");
  }
  b.rotation = static_cast<int>(rounded);
  return b;
}

Pig parse_pig(const xml::Element& el) {
  Pig p;
  if (const std::string* type = el.attribute("type")) p.kind = *type;
  p.x = parse_number(el, "x");
  p.y = parse_number(el, "y");
  return p;
}

}  // namespace

Level parse_level(std::string_view xml_text) {
  xml::Element root = xml::parse_document(xml_text);
  if (root.name != "Level") throw Error(Errc::malformed_xml, "root element is <" + root.name + ">, expected <Level>");
  Level level;
  for (const auto& [k, v] : root.attributes) {
    if (k == "id") {
      level.id = v;
    } else {
      level.root_attributes.emplace_back(k, v);
    }
  }
  for (const auto& child : root.children) {
    if (child.name != "GameObjects") {
      level.level_extras.push_back(child.raw);
      continue;
    }
    for (const auto& obj : child.children) {
      if (obj.name == "Block") {
        level.blocks.push_back(parse_block(obj));
      } else if (obj.name == "Pig") {
        level.pigs.push_back(parse_pig(obj));
      } else {
        level.object_extras.push_back(obj.raw);
      }
    }
  }
  return level;
}

std::string serialize_level(const Level& level) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<Level";
  if (!level.id.empty()) out << " id=\"" << xml::escape_attribute(level.id) << '"';
  for (const auto& [k, v] : level.root_attributes) out << ' ' << k << "=\"" << xml::escape_attribute(v) << '"';
  out << ">\n";
  for (const auto& raw : level.level_extras) out << "  " << raw << '\n';
  out << "  <GameObjects>\n";
  for (const auto& b : level.blocks) {
    out << "    <Block type=\"" << block_type(b.type).name << "\" material=\"" << to_string(b.material)
        << "\" x=\"" << format_number(b.x) << "\" y=\"" << format_number(b.y) << "\" rotation=\""
        << format_number(b.rotation) << "\" />\n";
  }
  for (const auto& p : level.pigs) {
    out << "    <Pig type=\"" << xml::escape_attribute(p.kind) << "\" x=\"" << format_number(p.x)
        << "\" y=\"" << format_number(p.y) << "\" />\n";
  }
  for (const auto& raw : level.object_extras) out << "    " << raw << '\n';
  out << "  </GameObjects>\n</Level>\n";
  return out.str();
}

Level load_level(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Level level = parse_level(buf.str());
  if (level.id.empty()) level.id = path.stem().string();
  return level;
}

void save_level(const std::filesystem::path& path, const Level& level) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << serialize_level(level);
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

}  // namespace stackrepair
