#include "stackrepair/grid.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stackrepair {
namespace {

constexpr double kCoverageThreshold = 0.5;
constexpr double kCoverageEps = 1e-9;
constexpr double kBoundsEps = 1e-9;

void check_inside(const Aabb& box, const GridSpec& spec, const char* what) {
  const Aabb ext = spec.extent();
  if (box.x_min < ext.x_min - kBoundsEps || box.y_min < ext.y_min - kBoundsEps ||
      box.x_max > ext.x_max + kBoundsEps || box.y_max > ext.y_max + kBoundsEps) {
    throw Error(Errc::level_out_of_bounds, std::string(what) + " extends beyond the grid extent");
  }
}

void accumulate(const Aabb& box, const GridSpec& spec, std::vector<double>& coverage) {
  const double c = spec.cell_size;
  const int c0 = std::max(0, static_cast<int>(std::floor((box.x_min - spec.origin_x) / c)));
  const int c1 = std::min(spec.width_cells - 1, static_cast<int>(std::floor((box.x_max - spec.origin_x) / c)));
  const int r0 = std::max(0, static_cast<int>(std::floor((box.y_min - spec.origin_y) / c)));
  const int r1 = std::min(spec.height_cells - 1, static_cast<int>(std::floor((box.y_max - spec.origin_y) / c)));
  const double cell_area = c * c;
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      const Aabb cell = spec.cell_box(col, row);
      const double ox = overlap_x(box, cell);
      const double oy = overlap_y(box, cell);
      if (ox > 0.0 && oy > 0.0) {
        coverage[static_cast<std::size_t>(row) * spec.width_cells + col] += ox * oy / cell_area;
      }
    }
  }
}

}  // namespace

GridSpec fit_grid(const Level& level, GridSpec base) {
  base.origin_y = 0.0;
  auto box = level.bounds();
  if (!box) {
    base.origin_x = -0.5 * base.world_width();
    return base;
  }
  const double c = base.cell_size;
  const int span_cells = static_cast<int>(std::ceil(box->width() / c - 1e-9));
  const int margin = std::max(0, (base.width_cells - span_cells) / 2);
  base.origin_x = box->x_min - margin * c;
  return base;
}

CellExtent footprint(BlockKind kind, int rotation, double cell_size) {
  const auto& t = block_type(kind);
  const double w = rotation == 90 ? t.height : t.width;
  const double h = rotation == 90 ? t.width : t.height;
  return {std::max(1, static_cast<int>(std::lround(w / cell_size))),
          std::max(1, static_cast<int>(std::lround(h / cell_size)))};
}

CellRect footprint_rect(const Block& block, const GridSpec& spec) {
  const CellExtent fp = footprint(block.type, block.rotation, spec.cell_size);
  const double cx = (block.x - spec.origin_x) / spec.cell_size - 0.5 * fp.w;
  const double cy = (block.y - spec.origin_y) / spec.cell_size - 0.5 * fp.h;
  return {static_cast<int>(std::lround(cx)), static_cast<int>(std::lround(cy)), fp.w, fp.h};
}

OccupancyGrid encode(const Level& level, const GridSpec& spec) {
  if (!(spec.cell_size > 0.0) || spec.width_cells <= 0 || spec.height_cells <= 0) {
    throw Error(Errc::spec_mismatch, "grid spec must have a positive cell size and dimensions");
  }
  std::vector<double> coverage(static_cast<std::size_t>(spec.width_cells) * spec.height_cells, 0.0);
  for (const auto& b : level.blocks) {
    const Aabb box = effective_aabb(b);
    check_inside(box, spec, "a block");
    accumulate(box, spec, coverage);
  }
  for (const auto& p : level.pigs) {
    const Aabb box = pig_aabb(p);
    check_inside(box, spec, "a pig");
    accumulate(box, spec, coverage);
  }
  OccupancyGrid grid(spec);
  for (int row = 0; row < spec.height_cells; ++row) {
    for (int col = 0; col < spec.width_cells; ++col) {
      if (coverage[static_cast<std::size_t>(row) * spec.width_cells + col] >= kCoverageThreshold - kCoverageEps) {
        grid.set(col, row);
      }
    }
  }
  return grid;
}

GapMask footprint_mask(std::span<const Block> removed, const OccupancyGrid& image) {
  GapMask mask(image.spec());
  for (const auto& b : removed) {
    const CellRect r = footprint_rect(b, image.spec());
    for (int row = r.row; row < r.row + r.h; ++row) {
      for (int col = r.col; col < r.col + r.w; ++col) {
        if (mask.in_bounds(col, row) && !image.at(col, row)) mask.set(col, row);
      }
    }
  }
  return mask;
}

std::vector<std::vector<Cell>> connected_components(const GapMask& mask) {
  std::vector<std::vector<Cell>> out;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(mask.width()) * mask.height(), 0);
  auto idx = [&](int col, int row) { return static_cast<std::size_t>(row) * mask.width() + col; };
  for (int row = 0; row < mask.height(); ++row) {
    for (int col = 0; col < mask.width(); ++col) {
      if (!mask.at(col, row) || seen[idx(col, row)]) continue;
      std::vector<Cell> comp;
      std::vector<Cell> stack{{col, row}};
      seen[idx(col, row)] = 1;
      while (!stack.empty()) {
        Cell c = stack.back();
        stack.pop_back();
        comp.push_back(c);
        const Cell next[4] = {{c.col + 1, c.row}, {c.col - 1, c.row}, {c.col, c.row + 1}, {c.col, c.row - 1}};
        for (const Cell& n : next) {
          if (mask.get(n.col, n.row) && !seen[idx(n.col, n.row)]) {
            seen[idx(n.col, n.row)] = 1;
            stack.push_back(n);
          }
        }
      }
      std::sort(comp.begin(), comp.end(),
                [](const Cell& a, const Cell& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
      out.push_back(std::move(comp));
    }
  }
  return out;
}

// ---- PGM ----

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  for (;;) {
    int ch = in.peek();
    if (ch == EOF) return tok;
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(ch)) {
      in.get();
      continue;
    }
    break;
  }
  while (in.peek() != EOF && !std::isspace(in.peek())) tok += static_cast<char>(in.get());
  return tok;
}

int header_int(std::istream& in, const std::string& path, const char* what) {
  std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::bad_magic, path + ": bad " + what + " \"" + tok + "\" in PGM header");
  }
}

}  // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') {
    throw Error(Errc::bad_magic, path.string() + " is not a binary PGM (P5)");
  }
  PgmImage img;
  img.width = header_int(in, path.string(), "width");
  img.height = header_int(in, path.string(), "height");
  const int maxval = header_int(in, path.string(), "maxval");
  if (maxval != 255) throw Error(Errc::bad_magic, path.string() + ": maxval must be 255");
  in.get();  // single whitespace after maxval
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw Error(Errc::io_error, path.string() + ": truncated pixel data");
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

}  // namespace stackrepair
