#include "stackrepair/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>

#include "stackrepair/error.hpp"

namespace stackrepair {

const Rgba& RenderStyle::material_color(Material m) const noexcept {
  switch (m) {
    case Material::ice: return ice;
    case Material::stone: return stone;
    case Material::wood: break;
  }
  return wood;
}

Image::Image(int w, int h, Rgba fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 4) {
  for (std::size_t i = 0; i < pixels.size(); i += 4) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
    pixels[i + 3] = fill.a;
  }
}

Rgba Image::at(int x, int y) const noexcept {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 4;
  return {pixels[i], pixels[i + 1], pixels[i + 2], pixels[i + 3]};
}

void Image::set(int x, int y, Rgba c) noexcept {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 4;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
  pixels[i + 3] = c.a;
}

namespace {

struct PixelMap {
  double x0, y1, ppu;
  int w, h;
  [[nodiscard]] double cx(int px) const { return x0 + (px + 0.5) / ppu; }
  [[nodiscard]] double cy(int py) const { return y1 - (py + 0.5) / ppu; }
  // Pixel columns whose centers fall in [a, b).
  [[nodiscard]] std::pair<int, int> cols(double a, double b) const {
    return {std::max(0, static_cast<int>(std::ceil((a - x0) * ppu - 0.5))),
            std::min(w, static_cast<int>(std::ceil((b - x0) * ppu - 0.5)))};
  }
  [[nodiscard]] std::pair<int, int> rows(double a, double b) const {
    return {std::max(0, static_cast<int>(std::floor((y1 - b) * ppu - 0.5)) + 1),
            std::min(h, static_cast<int>(std::floor((y1 - a) * ppu - 0.5)) + 1)};
  }
};

std::uint8_t blend(std::uint8_t over, std::uint8_t under, std::uint8_t alpha) {
  return static_cast<std::uint8_t>((over * alpha + under * (255 - alpha) + 127) / 255);
}

}  // namespace

Image render_level(const Level& level, const GridSpec& spec, const RenderStyle& style, const GapMask* overlay) {
  if (style.pixels_per_unit <= 0) throw std::invalid_argument("pixels_per_unit must be positive");
  if (overlay && !(overlay->spec() == spec)) {
    throw Error(Errc::spec_mismatch, "overlay mask uses a different grid spec");
  }
  const double ppu = style.pixels_per_unit;
  const int w = static_cast<int>(std::ceil(spec.world_width() * ppu - 1e-9));
  const int h = static_cast<int>(std::ceil(spec.world_height() * ppu - 1e-9));
  Image img(w, h, style.background);
  const PixelMap map{spec.origin_x, spec.origin_y + spec.world_height(), ppu, w, h};

  auto fill_box = [&](const Aabb& box, Rgba color) {
    const auto [c0, c1] = map.cols(box.x_min, box.x_max);
    const auto [r0, r1] = map.rows(box.y_min, box.y_max);
    for (int y = r0; y < r1; ++y) {
      for (int x = c0; x < c1; ++x) img.set(x, y, color);
    }
  };
  for (const auto& b : level.blocks) fill_box(effective_aabb(b), style.material_color(b.material));
  for (const auto& p : level.pigs) {
    const Aabb box = pig_aabb(p);
    const auto [c0, c1] = map.cols(box.x_min, box.x_max);
    const auto [r0, r1] = map.rows(box.y_min, box.y_max);
    for (int y = r0; y < r1; ++y) {
      for (int x = c0; x < c1; ++x) {
        const double dx = map.cx(x) - p.x;
        const double dy = map.cy(y) - p.y;
        if (dx * dx + dy * dy <= p.radius * p.radius) img.set(x, y, style.pig);
      }
    }
  }

  if (overlay) {
    const Rgba o = style.gap_overlay;
    for (int row = 0; row < spec.height_cells; ++row) {
      for (int col = 0; col < spec.width_cells; ++col) {
        if (!overlay->at(col, row)) continue;
        const Aabb cell = spec.cell_box(col, row);
        const auto [c0, c1] = map.cols(cell.x_min, cell.x_max);
        const auto [r0, r1] = map.rows(cell.y_min, cell.y_max);
        for (int y = r0; y < r1; ++y) {
          for (int x = c0; x < c1; ++x) {
            const Rgba u = img.at(x, y);
            img.set(x, y, {blend(o.r, u.r, o.a), blend(o.g, u.g, o.a), blend(o.b, u.b, o.a), 255});
          }
        }
      }
    }
  }
  return img;
}

Image render_level(const Level& level, const RenderStyle& style, const GapMask* overlay) {
  return render_level(level, overlay ? overlay->spec() : fit_grid(level), style, overlay);
}

Image side_by_side(const Image& left, const Image& right, Rgba fill) {
  Image out(left.width + right.width, std::max(left.height, right.height), fill);
  for (int y = 0; y < left.height; ++y) {
    for (int x = 0; x < left.width; ++x) out.set(x, y, left.at(x, y));
  }
  for (int y = 0; y < right.height; ++y) {
    for (int x = 0; x < right.width; ++x) out.set(left.width + x, y, right.at(x, y));
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGBA;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw Error(Errc::io_error, "cannot write " + path.string() + ": " + msg);
  }
}

}  // namespace stackrepair
