#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stackrepair/grid.hpp"
#include "stackrepair/level.hpp"

namespace stackrepair {

struct DecodeOptions {
  /// Score = covered cells - overflow_penalty * overflow cells.
  double overflow_penalty = 0.25;
  /// Minimum fraction of a placed footprint that must lie on mask cells.
  double min_coverage = 0.5;
  /// Tiling of a component stops once fewer cells than this remain.
  int min_remaining_cells = 5;
  /// Decoded blocks may overlap existing bodies by at most this much.
  double contact_tolerance = 0.01;
};

/// A block shape at a cell position, before conversion to world coordinates.
struct Placement {
  BlockKind kind = BlockKind::SquareHole;
  int rotation = 0;
  CellRect rect;
};

struct DecodeResult {
  std::vector<Block> blocks;
  std::vector<Placement> placements;  // parallel to blocks
  std::vector<std::size_t> component_sizes;  // in processing order
  /// Candidate placements discarded because their world box collided.
  int rejected_placements = 0;
};

/// Converts a cell placement into a world-space block: the footprint center
/// becomes the block center, then the block is nudged clear of side
/// neighbours and snapped down onto the nearest support surface within one
/// cell. Returns nullopt when the result would collide with `obstacles`.
std::optional<Block> place_block(const Placement& placement, const GridSpec& spec, std::span<const Aabb> obstacles,
                                 Material material, const DecodeOptions& options = {});

/// Greedy tiling of every mask component with catalog footprints. Components
/// are processed largest first; placements never collide with the base
/// level's bodies or previously decoded blocks.
DecodeResult decode_mask_detailed(const GapMask& mask, const Level& base, Material material = Material::wood,
                                  const DecodeOptions& options = {});

/// decode_mask_detailed(...).blocks after checking the mask and occupancy
/// grid share a spec (SpecMismatch otherwise).
std::vector<Block> decode_mask(const GapMask& mask, const OccupancyGrid& grid, const Level& base,
                               Material material = Material::wood, const DecodeOptions& options = {});

/// Appends decoded blocks to a copy of the level.
Level insert_blocks(const Level& level, std::span<const Block> blocks);

/// Distinct (kind, rotation) footprints of the catalog; square types appear once.
struct Orientation {
  BlockKind kind;
  int rotation;
  CellExtent extent;
};
std::vector<Orientation> catalog_orientations(double cell_size = kDefaultCellSize);

}  // namespace stackrepair
