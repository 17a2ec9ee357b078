#include "stackrepair/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stackrepair {
namespace {

constexpr double kComMargin = 0.1;

struct Shape {
  BlockKind kind;
  int rotation;
};

Shape random_shape(Rng& rng) {
  const auto& t = block_catalog()[rng.below(block_catalog().size())];
  const int rotation = (!t.is_square() && rng.chance(0.5)) ? 90 : 0;
  return {t.kind, rotation};
}

double width_of(Shape s) { return s.rotation == 90 ? block_type(s.kind).height : block_type(s.kind).width; }
double height_of(Shape s) { return s.rotation == 90 ? block_type(s.kind).width : block_type(s.kind).height; }

// Horizontal offset of a block resting on a support of width `support_w`
// that keeps its center well inside the support.
double safe_offset(Rng& rng, double support_w) {
  const double m = 0.5 * std::max(0.0, 0.5 * support_w - kComMargin);
  return rng.uniform(-m, m);
}

Aabb extent(const std::vector<Block>& blocks) {
  Aabb box = effective_aabb(blocks.front());
  for (const auto& b : blocks) box = merge(box, effective_aabb(b));
  return box;
}

}  // namespace

Block make_block(BlockKind kind, double x, double bottom, int rotation, Material material) {
  Block b;
  b.type = kind;
  b.rotation = rotation;
  b.material = material;
  b.x = quantize(x);
  b.y = quantize(bottom + 0.5 * b.height());
  return b;
}

std::vector<Block> random_tower(Rng& rng, double x, const SyntheticOptions& options) {
  std::vector<Block> blocks;
  const int n = rng.between(options.min_tower_blocks, options.max_tower_blocks);
  double bottom = 0.0;
  double cx = x;
  double support_w = 0.0;
  for (int i = 0; i < n; ++i) {
    const Shape s = random_shape(rng);
    if (bottom + height_of(s) > options.max_height) break;
    if (i > 0) cx = blocks.back().x + safe_offset(rng, support_w);
    const auto material = static_cast<Material>(rng.below(3));
    blocks.push_back(make_block(s.kind, cx, bottom, s.rotation, material));
    bottom = blocks.back().y + 0.5 * blocks.back().height();
    support_w = width_of(s);
  }
  if (blocks.empty()) blocks.push_back(make_block(BlockKind::SquareHole, x, 0.0));
  return blocks;
}

std::vector<Block> random_table(Rng& rng, double x, const SyntheticOptions& options) {
  const Shape beam{rng.chance(0.5) ? BlockKind::RectBig : BlockKind::RectMedium, 0};
  const double beam_w = width_of(beam);

  // Column kinds: one block of height 0.85, two stacked SquareSmall, or a tall RectMedium.
  const double pick = rng.unit();
  std::vector<Shape> column;
  if (pick < 0.3) {
    column = {{BlockKind::SquareHole, 0}};
  } else if (pick < 0.55) {
    column = {{BlockKind::RectSmall, 90}};
  } else if (pick < 0.8) {
    column = {{BlockKind::RectFat, 90}};
  } else if (pick < 0.9) {
    column = {{BlockKind::SquareSmall, 0}, {BlockKind::SquareSmall, 0}};
  } else {
    column = {{BlockKind::RectMedium, 90}};
  }
  double col_w = width_of(column.front());
  double inset = rng.uniform(0.0, 0.1);
  double d = 0.5 * beam_w - 0.5 * col_w - inset;
  if (2.0 * d - col_w < 0.2) {
    column = {{BlockKind::RectSmall, 90}};
    col_w = width_of(column.front());
    d = 0.5 * beam_w - 0.5 * col_w - inset;
  }

  std::vector<Block> blocks;
  const auto material = static_cast<Material>(rng.below(3));
  double top = 0.0;
  for (const double side : {-1.0, 1.0}) {
    double bottom = 0.0;
    for (const Shape& s : column) {
      blocks.push_back(make_block(s.kind, x + side * d, bottom, s.rotation, material));
      bottom = blocks.back().y + 0.5 * blocks.back().height();
    }
    top = std::max(top, bottom);
  }
  blocks.push_back(make_block(beam.kind, x, top, 0, static_cast<Material>(rng.below(3))));
  const double beam_top = blocks.back().y + 0.5 * blocks.back().height();

  if (rng.chance(options.topper_chance)) {
    static constexpr std::array<Shape, 6> kToppers{{{BlockKind::SquareSmall, 0},
                                                    {BlockKind::SquareTiny, 0},
                                                    {BlockKind::RectTiny, 0},
                                                    {BlockKind::RectFat, 0},
                                                    {BlockKind::RectSmall, 0},
                                                    {BlockKind::RectTiny, 90}}};
    const Shape s = kToppers[rng.below(kToppers.size())];
    const double w = width_of(s);
    const double reach = 0.5 * beam_w - 0.5 * w;
    blocks.push_back(make_block(s.kind, x + rng.uniform(-reach, reach), beam_top, s.rotation,
                                static_cast<Material>(rng.below(3))));
  }
  return blocks;
}

Level synthetic_level(std::uint64_t seed, const std::string& id, const SyntheticOptions& options) {
  Rng rng(seed);
  Level level;
  level.id = id;
  const int n = rng.between(options.min_structures, options.max_structures);

  std::vector<std::vector<Block>> structures;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    auto s = rng.chance(options.table_chance) ? random_table(rng, 0.0, options) : random_tower(rng, 0.0, options);
    const Aabb box = extent(s);
    const double extra = box.width() + (structures.empty() ? 0.0 : options.clearance);
    if (total + extra > options.max_width || box.height() > options.max_height) continue;
    total += extra;
    structures.push_back(std::move(s));
  }
  if (structures.empty()) structures.push_back(random_tower(rng, 0.0, options));

  double left = -0.5 * total;
  for (auto& s : structures) {
    const Aabb box = extent(s);
    const double shift = left - box.x_min;
    for (auto& b : s) {
      b.x = quantize(b.x + shift);
      level.blocks.push_back(b);
    }
    left += box.width() + options.clearance;

    if (rng.chance(options.pig_chance)) {
      // On the highest block of the structure, if nothing is in the way.
      const Block* top = &s.front();
      for (const auto& b : s) {
        if (effective_aabb(b).y_max > effective_aabb(*top).y_max) top = &b;
      }
      Pig pig;
      pig.x = top->x;
      pig.y = quantize(effective_aabb(*top).y_max + pig.radius);
      const Aabb pb = pig_aabb(pig);
      bool clear = pb.y_max <= options.max_height + 1.0;
      for (const auto& b : level.blocks) clear = clear && penetration(pb, effective_aabb(b)) <= 0.0;
      if (clear) level.pigs.push_back(pig);
    }
  }
  return level;
}

std::vector<Level> stable_corpus(std::size_t count, std::uint64_t seed, Metric metric,
                                 const SyntheticOptions& options, const SimConfig& sim) {
  std::vector<Level> out;
  const std::size_t limit = 50 * count + 100;
  for (std::size_t i = 0; out.size() < count; ++i) {
    if (i >= limit) throw std::runtime_error("synthetic generator keeps producing unstable levels");
    Level level = synthetic_level(stream_seed(seed, i), "syn_" + std::to_string(seed) + "_" + std::to_string(i), options);
    if (is_stable(level, metric, sim)) out.push_back(std::move(level));
  }
  return out;
}

}  // namespace stackrepair
