#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "stackrepair/decoder.hpp"
#include "stackrepair/grid.hpp"
#include "stackrepair/level.hpp"
#include "stackrepair/physics.hpp"

namespace stackrepair {

enum class DetectorKind { external_mask, geometric, oracle };

std::string_view to_string(DetectorKind kind) noexcept;
/// Accepts "external", "external_mask", "geometric" and "oracle".
std::optional<DetectorKind> detector_from_name(std::string_view name) noexcept;

struct DetectionResult {
  GapMask mask;
  /// One entry per connected component of `mask`, in connected_components order.
  std::vector<double> confidence;
  DetectorKind detector = DetectorKind::geometric;

  // External masks: cells set in the input file, and how many of them were
  // dropped for lying on occupied cells.
  std::size_t input_cells = 0;
  std::size_t dropped_cells = 0;
  [[nodiscard]] double drop_rate() const noexcept {
    return input_cells == 0 ? 0.0 : static_cast<double>(dropped_cells) / static_cast<double>(input_cells);
  }

  // Oracle: the insertion behind the mask and the search effort.
  std::optional<Block> oracle_block;
  std::size_t candidates_considered = 0;
  std::size_t simulations_run = 0;
};

struct GeometricOptions {
  /// Vertical gap under which two boxes count as touching.
  double contact_tolerance = 0.02;
  /// Components whose confidence falls below this are removed from the mask.
  double confidence_threshold = 0.5;
};

/// Support-analysis baseline. Every body whose center of mass lies outside
/// its support hull marks the empty cells below the overhanging side of its
/// box, down to the first occupied cell or the ground. A component's
/// confidence is the largest unsupported-width fraction among the bodies that
/// marked it. Throws SpecMismatch when `grid` is not the encoding of `level`.
DetectionResult detect_geometric(const OccupancyGrid& grid, const Level& level, const GeometricOptions& options = {});

struct OracleOptions {
  SimConfig sim;
  DecodeOptions decode;
  Material material = Material::wood;
  /// Grid size and cell size; the origin is fit to the level.
  GridSpec grid;
  int threads = 0;
};

/// Exhaustive single-insertion search. Candidates are catalog footprints (both
/// rotations) at every cell position overlapping the level's bounding box
/// extended down to the ground, visited bottom-to-top, left-to-right, larger
/// blocks first. Each is placed like a decoded block; the mask is the placed
/// block's footprint. The first candidate that stabilizes the level and whose
/// mask decodes into a stabilizing insertion wins. Returns an empty mask when
/// none exists; throws AlreadyStable for stable input.
DetectionResult detect_oracle(const Level& level, Metric metric, const OracleOptions& options = {});

/// Keeps the cells of `raw` that are empty in `grid`. Confidence 1 per component.
DetectionResult accept_external_mask(const GapMask& raw, const OccupancyGrid& grid);

/// Reads a PGM mask (thresholded at 128) and applies accept_external_mask.
DetectionResult load_external_mask(const std::filesystem::path& path, const OccupancyGrid& grid);

}  // namespace stackrepair
