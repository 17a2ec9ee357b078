#include "stackrepair/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "stackrepair/support.hpp"

namespace stackrepair {
namespace {

// Summed-area table over a rectangular window of the grid.
class CellSums {
 public:
  CellSums(int col0, int row0, int cols, int rows)
      : col0_(col0), row0_(row0), cols_(cols), rows_(rows),
        sums_(static_cast<std::size_t>(cols + 1) * (rows + 1), 0) {}

  void rebuild(const std::vector<std::uint8_t>& cells) {
    for (int r = 0; r < rows_; ++r) {
      int run = 0;
      for (int c = 0; c < cols_; ++c) {
        run += cells[static_cast<std::size_t>(r) * cols_ + c];
        at(c + 1, r + 1) = at(c + 1, r) + run;
      }
    }
  }

  /// Number of set cells in the rectangle, clipped to the window.
  [[nodiscard]] int sum(const CellRect& rect) const {
    const int c0 = std::clamp(rect.col - col0_, 0, cols_);
    const int c1 = std::clamp(rect.col + rect.w - col0_, 0, cols_);
    const int r0 = std::clamp(rect.row - row0_, 0, rows_);
    const int r1 = std::clamp(rect.row + rect.h - row0_, 0, rows_);
    if (c0 >= c1 || r0 >= r1) return 0;
    return get(c1, r1) - get(c0, r1) - get(c1, r0) + get(c0, r0);
  }

 private:
  int& at(int c, int r) { return sums_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
  [[nodiscard]] int get(int c, int r) const { return sums_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }

  int col0_, row0_, cols_, rows_;
  std::vector<int> sums_;
};

struct Candidate {
  double score;
  int area;
  int type_id;
  int rotation;
  int row;
  int col;
  std::size_t orientation;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.area != b.area) return a.area > b.area;
  if (a.type_id != b.type_id) return a.type_id < b.type_id;
  if (a.rotation != b.rotation) return a.rotation < b.rotation;
  if (a.row != b.row) return a.row < b.row;
  return a.col < b.col;
}

Aabb box_at(double x, double y, double w, double h) { return {x - 0.5 * w, y - 0.5 * h, x + 0.5 * w, y + 0.5 * h}; }

// Shifts x so the box clears obstacles it overlaps sideways by at most one
// cell. Only obstacles overlapping vertically by more than `min_overlap_y`
// count as side neighbours.
double nudge_sideways(double x, double y, double w, double h, std::span<const Aabb> obstacles, double cell,
                      double min_overlap_y, double tol) {
  const Aabb box = box_at(x, y, w, h);
  double right = 0.0;
  double left = 0.0;
  for (const Aabb& o : obstacles) {
    if (overlap_y(box, o) <= min_overlap_y) continue;
    const double ox = overlap_x(box, o);
    if (ox <= tol || ox > cell + tol) continue;
    if (o.center_x() < x) {
      right = std::max(right, ox);
    } else {
      left = std::max(left, ox);
    }
  }
  if (right > 0.0 && left > 0.0) return x;
  return x + right - left;
}

}  // namespace

std::vector<Orientation> catalog_orientations(double cell_size) {
  std::vector<Orientation> out;
  for (const auto& t : block_catalog()) {
    out.push_back({t.kind, 0, footprint(t.kind, 0, cell_size)});
    if (!t.is_square()) out.push_back({t.kind, 90, footprint(t.kind, 90, cell_size)});
  }
  return out;
}

std::optional<Block> place_block(const Placement& placement, const GridSpec& spec, std::span<const Aabb> obstacles,
                                 Material material, const DecodeOptions& options) {
  Block block;
  block.type = placement.kind;
  block.rotation = placement.rotation;
  block.material = material;
  const double c = spec.cell_size;
  const double tol = options.contact_tolerance;
  const double w = block.width();
  const double h = block.height();
  double x = spec.origin_x + (placement.rect.col + 0.5 * placement.rect.w) * c;
  double y = spec.origin_y + (placement.rect.row + 0.5 * placement.rect.h) * c;

  x = nudge_sideways(x, y, w, h, obstacles, c, c, tol);

  // Rest on the highest surface within one cell of the footprint's bottom.
  const double bottom = y - 0.5 * h;
  std::optional<double> surface;
  if (std::abs(bottom) <= c) surface = 0.0;
  const Aabb box = box_at(x, y, w, h);
  for (const Aabb& o : obstacles) {
    if (overlap_x(box, o) <= tol) continue;
    if (o.y_max < bottom - c || o.y_max > bottom + c) continue;
    if (o.center_y() >= y) continue;
    if (!surface || o.y_max > *surface) surface = o.y_max;
  }
  if (surface) y = *surface + 0.5 * h;

  x = nudge_sideways(x, y, w, h, obstacles, c, tol, tol);

  block.x = quantize(x);
  block.y = quantize(y);
  const Aabb final_box = effective_aabb(block);
  if (final_box.y_min < -1e-6) return std::nullopt;
  for (const Aabb& o : obstacles) {
    if (penetration(final_box, o) > tol) return std::nullopt;
  }
  return block;
}

DecodeResult decode_mask_detailed(const GapMask& mask, const Level& base, Material material,
                                  const DecodeOptions& options) {
  DecodeResult result;
  const GridSpec& spec = mask.spec();
  std::vector<Aabb> obstacles = level_boxes(base);
  const auto orientations = catalog_orientations(spec.cell_size);
  int max_dim = 1;
  for (const auto& o : orientations) max_dim = std::max({max_dim, o.extent.w, o.extent.h});

  auto components = connected_components(mask);
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  for (const auto& comp : components) {
    result.component_sizes.push_back(comp.size());
    int c0 = comp.front().col, c1 = c0, r0 = comp.front().row, r1 = r0;
    for (const Cell& cell : comp) {
      c0 = std::min(c0, cell.col);
      c1 = std::max(c1, cell.col);
      r0 = std::min(r0, cell.row);
      r1 = std::max(r1, cell.row);
    }
    // Window large enough to hold any footprint touching the component.
    const int wc0 = c0 - max_dim;
    const int wr0 = r0 - max_dim;
    const int wcols = c1 - c0 + 1 + 2 * max_dim;
    const int wrows = r1 - r0 + 1 + 2 * max_dim;
    std::vector<std::uint8_t> remaining(static_cast<std::size_t>(wcols) * wrows, 0);
    for (const Cell& cell : comp) {
      remaining[static_cast<std::size_t>(cell.row - wr0) * wcols + (cell.col - wc0)] = 1;
    }
    std::size_t remaining_count = comp.size();
    CellSums sums(wc0, wr0, wcols, wrows);

    while (remaining_count >= static_cast<std::size_t>(options.min_remaining_cells)) {
      sums.rebuild(remaining);
      std::vector<Candidate> candidates;
      for (std::size_t oi = 0; oi < orientations.size(); ++oi) {
        const auto& o = orientations[oi];
        const int area = o.extent.w * o.extent.h;
        for (int row = r0 - o.extent.h + 1; row <= r1; ++row) {
          for (int col = c0 - o.extent.w + 1; col <= c1; ++col) {
            const int covered = sums.sum({col, row, o.extent.w, o.extent.h});
            if (covered == 0) continue;
            if (covered < options.min_coverage * area - 1e-9) continue;
            const double score = covered - options.overflow_penalty * (area - covered);
            if (score <= 0.0) continue;
            candidates.push_back({score, area, block_type(o.kind).id, o.rotation, row, col, oi});
          }
        }
      }
      std::sort(candidates.begin(), candidates.end(), better);

      bool placed = false;
      for (const Candidate& cand : candidates) {
        const auto& o = orientations[cand.orientation];
        Placement p{o.kind, o.rotation, {cand.col, cand.row, o.extent.w, o.extent.h}};
        auto block = place_block(p, spec, obstacles, material, options);
        if (!block) {
          ++result.rejected_placements;
          continue;
        }
        for (int row = p.rect.row; row < p.rect.row + p.rect.h; ++row) {
          for (int col = p.rect.col; col < p.rect.col + p.rect.w; ++col) {
            auto& cell = remaining[static_cast<std::size_t>(row - wr0) * wcols + (col - wc0)];
            if (cell) {
              cell = 0;
              --remaining_count;
            }
          }
        }
        obstacles.push_back(effective_aabb(*block));
        result.blocks.push_back(*block);
        result.placements.push_back(p);
        placed = true;
        break;
      }
      if (!placed) break;
    }
  }
  return result;
}

std::vector<Block> decode_mask(const GapMask& mask, const OccupancyGrid& grid, const Level& base, Material material,
                               const DecodeOptions& options) {
  if (!(mask.spec() == grid.spec())) {
    throw Error(Errc::spec_mismatch, "gap mask and occupancy grid use different grid specs");
  }
  return decode_mask_detailed(mask, base, material, options).blocks;
}

Level insert_blocks(const Level& level, std::span<const Block> blocks) {
  Level out = level;
  out.blocks.insert(out.blocks.end(), blocks.begin(), blocks.end());
  return out;
}

}  // namespace stackrepair
