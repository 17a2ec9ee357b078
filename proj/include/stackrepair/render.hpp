#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stackrepair/grid.hpp"
#include "stackrepair/level.hpp"

namespace stackrepair {

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  bool operator==(const Rgba&) const = default;
};

struct RenderStyle {
  int pixels_per_unit = 64;
  Rgba background{235, 242, 250, 255};
  Rgba wood{176, 122, 66, 255};
  Rgba ice{150, 210, 240, 255};
  Rgba stone{128, 128, 128, 255};
  Rgba pig{90, 190, 70, 255};
  Rgba gap_overlay{230, 30, 30, 128};

  [[nodiscard]] const Rgba& material_color(Material m) const noexcept;
};

/// 8-bit RGBA raster, row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, Rgba fill);
  [[nodiscard]] Rgba at(int x, int y) const noexcept;
  void set(int x, int y, Rgba c) noexcept;
  bool operator==(const Image&) const = default;
};

/// Draws the grid's world extent. A pixel takes a body's color when its
/// center lies inside the body; mask cells are alpha-blended with the overlay
/// color afterwards. The overlay must share `spec`.
Image render_level(const Level& level, const GridSpec& spec, const RenderStyle& style = {},
                   const GapMask* overlay = nullptr);

/// Same, on fit_grid(level) or on the overlay's grid when one is given.
Image render_level(const Level& level, const RenderStyle& style = {}, const GapMask* overlay = nullptr);

/// Places two images next to each other, padding the shorter one with `fill`.
Image side_by_side(const Image& left, const Image& right, Rgba fill = {255, 255, 255, 255});

/// Throws Error(io_error) on failure.
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace stackrepair
