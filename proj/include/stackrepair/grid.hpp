#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stackrepair/error.hpp"
#include "stackrepair/level.hpp"

namespace stackrepair {

inline constexpr double kDefaultCellSize = 0.085;
inline constexpr int kDefaultGridCells = 128;

/// Affine mapping between world coordinates and a fixed-size cell raster.
/// Cell (0, 0) is the lower-left cell; its lower-left corner sits at the origin.
struct GridSpec {
  double cell_size = kDefaultCellSize;
  int width_cells = kDefaultGridCells;
  int height_cells = kDefaultGridCells;
  double origin_x = 0.0;
  double origin_y = 0.0;

  [[nodiscard]] double world_width() const noexcept { return cell_size * width_cells; }
  [[nodiscard]] double world_height() const noexcept { return cell_size * height_cells; }
  [[nodiscard]] Aabb extent() const noexcept {
    return {origin_x, origin_y, origin_x + world_width(), origin_y + world_height()};
  }
  [[nodiscard]] Aabb cell_box(int col, int row) const noexcept {
    return {origin_x + col * cell_size, origin_y + row * cell_size, origin_x + (col + 1) * cell_size,
            origin_y + (row + 1) * cell_size};
  }

  bool operator==(const GridSpec&) const = default;
};

/// Places the default-sized grid so that the ground (y = 0) is the bottom edge
/// and the level's bounding box is horizontally centered, with its left edge
/// on a cell boundary.
GridSpec fit_grid(const Level& level, GridSpec base = {});

struct OccupancyTag {};
struct GapTag {};

/// Binary raster bound to a GridSpec. Storage is row-major with row 0 at the bottom.
template <class Tag>
class Raster {
 public:
  Raster() = default;
  explicit Raster(const GridSpec& spec)
      : spec_(spec), cells_(static_cast<std::size_t>(spec.width_cells) * spec.height_cells, 0) {}

  [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] int width() const noexcept { return spec_.width_cells; }
  [[nodiscard]] int height() const noexcept { return spec_.height_cells; }

  [[nodiscard]] bool in_bounds(int col, int row) const noexcept {
    return col >= 0 && row >= 0 && col < width() && row < height();
  }
  [[nodiscard]] bool at(int col, int row) const noexcept { return cells_[index(col, row)] != 0; }
  /// Out-of-range reads are empty.
  [[nodiscard]] bool get(int col, int row) const noexcept { return in_bounds(col, row) && at(col, row); }
  void set(int col, int row, bool value = true) noexcept { cells_[index(col, row)] = value ? 1 : 0; }

  [[nodiscard]] std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto c : cells_) n += c;
    return n;
  }
  [[nodiscard]] bool empty() const noexcept { return count() == 0; }
  [[nodiscard]] std::span<const std::uint8_t> cells() const noexcept { return cells_; }

  bool operator==(const Raster&) const = default;

 private:
  [[nodiscard]] std::size_t index(int col, int row) const noexcept {
    return static_cast<std::size_t>(row) * width() + col;
  }

  GridSpec spec_;
  std::vector<std::uint8_t> cells_;
};

using OccupancyGrid = Raster<OccupancyTag>;
using GapMask = Raster<GapTag>;

/// Size of a block's quantized footprint in cells.
struct CellExtent {
  int w = 0;
  int h = 0;
  bool operator==(const CellExtent&) const = default;
};

/// Cell-aligned rectangle.
struct CellRect {
  int col = 0;
  int row = 0;
  int w = 0;
  int h = 0;
  bool operator==(const CellRect&) const = default;
};

/// round(dimension / cell_size) per axis, at least one cell; rotation 90 swaps axes.
CellExtent footprint(BlockKind kind, int rotation, double cell_size = kDefaultCellSize);

/// The footprint of a placed block snapped to the nearest cell position
/// (footprint center nearest the block center).
CellRect footprint_rect(const Block& block, const GridSpec& spec);

/// Rasterizes blocks and pigs: a cell is 1 iff at least half its area is covered.
/// Throws LevelOutOfBounds when an object leaves the grid.
OccupancyGrid encode(const Level& level, const GridSpec& spec);

/// Ground-truth gap mask for blocks taken out of a level: the union of their
/// snapped footprints, restricted to cells that are empty in `image`.
GapMask footprint_mask(std::span<const Block> removed, const OccupancyGrid& image);

/// 4-connected components of a mask, each as a list of (col, row) cells in
/// row-major scan order. Components are ordered by their first cell.
struct Cell {
  int col = 0;
  int row = 0;
  bool operator==(const Cell&) const = default;
};
std::vector<std::vector<Cell>> connected_components(const GapMask& mask);

// ---- binary PGM (P5, maxval 255); file row 0 is the top row ----

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // file order, top row first
};

PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PgmImage& image);

template <class Tag>
PgmImage to_pgm(const Raster<Tag>& raster) {
  PgmImage img{raster.width(), raster.height(), {}};
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int row = 0; row < img.height; ++row) {
    for (int col = 0; col < img.width; ++col) {
      img.pixels[static_cast<std::size_t>(img.height - 1 - row) * img.width + col] =
          raster.at(col, row) ? 255 : 0;
    }
  }
  return img;
}

/// Thresholds pixels at 128. Throws DimensionMismatch when the image size
/// differs from the spec.
template <class Tag>
Raster<Tag> from_pgm(const PgmImage& img, const GridSpec& spec) {
  if (img.width != spec.width_cells || img.height != spec.height_cells) {
    throw Error(Errc::dimension_mismatch, "image is " + std::to_string(img.width) + "x" +
                                              std::to_string(img.height) + ", grid is " +
                                              std::to_string(spec.width_cells) + "x" +
                                              std::to_string(spec.height_cells));
  }
  Raster<Tag> raster(spec);
  for (int row = 0; row < img.height; ++row) {
    for (int col = 0; col < img.width; ++col) {
      raster.set(col, row, img.pixels[static_cast<std::size_t>(img.height - 1 - row) * img.width + col] >= 128);
    }
  }
  return raster;
}

template <class Tag>
void write_grid(const std::filesystem::path& path, const Raster<Tag>& raster) {
  write_pgm(path, to_pgm(raster));
}

template <class Tag>
Raster<Tag> read_grid(const std::filesystem::path& path, const GridSpec& spec) {
  return from_pgm<Tag>(read_pgm(path), spec);
}

}  // namespace stackrepair
