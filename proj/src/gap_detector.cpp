#include "stackrepair/gap_detector.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "stackrepair/error.hpp"
#include "stackrepair/parallel.hpp"
#include "stackrepair/support.hpp"

namespace stackrepair {

std::string_view to_string(DetectorKind kind) noexcept {
  switch (kind) {
    case DetectorKind::external_mask: return "external";
    case DetectorKind::geometric: return "geometric";
    case DetectorKind::oracle: return "oracle";
  }
  return "unknown";
}

std::optional<DetectorKind> detector_from_name(std::string_view name) noexcept {
  if (name == "external" || name == "external_mask") return DetectorKind::external_mask;
  if (name == "geometric") return DetectorKind::geometric;
  if (name == "oracle") return DetectorKind::oracle;
  return std::nullopt;
}

namespace {

// Per-component confidence from a per-cell score raster; components under the
// threshold are cleared from the mask.
void assign_confidence(DetectionResult& result, const std::vector<double>& cell_score, double threshold) {
  GapMask kept(result.mask.spec());
  for (const auto& comp : connected_components(result.mask)) {
    double conf = 0.0;
    for (const Cell& c : comp) {
      conf = std::max(conf, cell_score[static_cast<std::size_t>(c.row) * kept.width() + c.col]);
    }
    if (conf < threshold) continue;
    for (const Cell& c : comp) kept.set(c.col, c.row);
  }
  result.mask = std::move(kept);
  result.confidence.clear();
  for (const auto& comp : connected_components(result.mask)) {
    double conf = 0.0;
    for (const Cell& c : comp) {
      conf = std::max(conf, cell_score[static_cast<std::size_t>(c.row) * kept.width() + c.col]);
    }
    result.confidence.push_back(conf);
  }
}

}  // namespace

DetectionResult detect_geometric(const OccupancyGrid& grid, const Level& level, const GeometricOptions& options) {
  const GridSpec& spec = grid.spec();
  if (!(encode(level, spec) == grid)) {
    throw Error(Errc::spec_mismatch, "occupancy grid does not encode level '" + level.id + "'");
  }
  DetectionResult result;
  result.detector = DetectorKind::geometric;
  result.mask = GapMask(spec);
  std::vector<double> score(static_cast<std::size_t>(spec.width_cells) * spec.height_cells, 0.0);

  const auto boxes = level_boxes(level);
  const auto support = analyze_support(boxes, options.contact_tolerance);
  const double c = spec.cell_size;
  for (std::size_t i = 0; i < level.blocks.size(); ++i) {
    const SupportInfo& info = support[i];
    if (!info.com_outside) continue;
    const Aabb& box = boxes[i];
    double x0 = box.x_min;
    double x1 = box.x_max;
    if (info.has_support) {
      // The overhanging side the body would tip towards.
      if (box.center_x() > info.span_max) {
        x0 = info.span_max;
      } else {
        x1 = info.span_min;
      }
    }
    const double confidence = info.unsupported_fraction;
    const int top_row = static_cast<int>(std::ceil((box.y_min - spec.origin_y) / c - 0.5)) - 1;
    const int col_lo = std::max(0, static_cast<int>(std::floor((x0 - spec.origin_x) / c - 0.5)));
    const int col_hi = std::min(spec.width_cells - 1, static_cast<int>(std::ceil((x1 - spec.origin_x) / c - 0.5)));
    for (int col = col_lo; col <= col_hi; ++col) {
      const double cx = spec.origin_x + (col + 0.5) * c;
      if (cx <= x0 || cx >= x1) continue;
      for (int row = std::min(top_row, spec.height_cells - 1); row >= 0; --row) {
        if (grid.at(col, row)) break;
        result.mask.set(col, row);
        auto& s = score[static_cast<std::size_t>(row) * spec.width_cells + col];
        s = std::max(s, confidence);
      }
    }
  }
  assign_confidence(result, score, options.confidence_threshold);
  return result;
}

DetectionResult detect_oracle(const Level& level, Metric metric, const OracleOptions& options) {
  if (is_stable(level, metric, options.sim)) {
    throw Error(Errc::already_stable, "level '" + level.id + "' is already stable");
  }
  const GridSpec spec = fit_grid(level, options.grid);
  const OccupancyGrid occ = encode(level, spec);
  DetectionResult result;
  result.detector = DetectorKind::oracle;
  result.mask = GapMask(spec);
  const auto bounds = level.bounds();
  if (!bounds) return result;

  const double c = spec.cell_size;
  const int bc0 = static_cast<int>(std::floor((bounds->x_min - spec.origin_x) / c + 1e-9));
  const int bc1 = static_cast<int>(std::ceil((bounds->x_max - spec.origin_x) / c - 1e-9)) - 1;
  // The region reaches down to the ground: a gap can sit entirely below the level's lowest body.
  const int br0 = 0;
  const int br1 = static_cast<int>(std::ceil((bounds->y_max - spec.origin_y) / c - 1e-9)) - 1;

  auto orientations = catalog_orientations(c);
  std::stable_sort(orientations.begin(), orientations.end(), [](const Orientation& a, const Orientation& b) {
    return a.extent.w * a.extent.h > b.extent.w * b.extent.h;
  });

  struct Candidate {
    Block block;
    GapMask mask;
  };
  const auto obstacles = level_boxes(level);
  std::set<std::tuple<int, int, double, double>> seen;

  // Lazily enumerates statically plausible candidates in scan order.
  int row = br0;
  int col = bc0 - 24;
  std::size_t orient = 0;
  bool exhausted = false;
  auto next_candidate = [&]() -> std::optional<Candidate> {
    while (!exhausted) {
      if (orient == orientations.size()) {
        orient = 0;
        if (++col > bc1) {
          col = bc0 - 24;
          if (++row > std::min(br1, spec.height_cells - 1)) {
            exhausted = true;
            break;
          }
        }
      }
      const Orientation& o = orientations[orient++];
      const CellRect rect{col, row, o.extent.w, o.extent.h};
      if (rect.col + rect.w - 1 < bc0 || rect.row + rect.h - 1 < br0) continue;
      if (rect.col < 0 || rect.col + rect.w > spec.width_cells || rect.row + rect.h > spec.height_cells) continue;
      ++result.candidates_considered;
      auto block = place_block({o.kind, o.rotation, rect}, spec, obstacles, options.material, options.decode);
      if (!block) continue;
      if (!seen.insert({static_cast<int>(block->type), block->rotation, block->x, block->y}).second) continue;
      // The mask is the footprint of the block as placed, after snapping.
      GapMask mask = footprint_mask(std::span(&*block, 1), occ);
      if (mask.empty()) continue;
      if (metric == Metric::velocity) {
        Level trial = level;
        trial.blocks.push_back(*block);
        if (!statically_supported(trial, options.sim.contact_slop)) continue;
      }
      return Candidate{*block, std::move(mask)};
    }
    return std::nullopt;
  };

  // A candidate passes when the inserted block stabilizes the level and its
  // mask decodes into a stabilizing insertion as well.
  auto passes = [&](const Candidate& cand) {
    Level trial = level;
    trial.blocks.push_back(cand.block);
    if (!is_stable(trial, metric, options.sim)) return false;
    const auto decoded = decode_mask_detailed(cand.mask, level, options.material, options.decode).blocks;
    if (decoded.empty()) return false;
    if (decoded.size() == 1 && decoded.front() == cand.block) return true;
    return is_stable(insert_blocks(level, decoded), metric, options.sim);
  };

  const unsigned threads = worker_count(options.threads);
  while (true) {
    std::vector<Candidate> batch;
    while (batch.size() < threads) {
      auto cand = next_candidate();
      if (!cand) break;
      batch.push_back(std::move(*cand));
    }
    if (batch.empty()) break;
    std::vector<char> ok(batch.size(), 0);
    parallel_for(batch.size(), threads, [&](std::size_t i) { ok[i] = passes(batch[i]) ? 1 : 0; });
    result.simulations_run += batch.size();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!ok[i]) continue;
      result.mask = std::move(batch[i].mask);
      result.oracle_block = batch[i].block;
      result.confidence.assign(connected_components(result.mask).size(), 1.0);
      return result;
    }
  }
  return result;
}

DetectionResult accept_external_mask(const GapMask& raw, const OccupancyGrid& grid) {
  if (!(raw.spec() == grid.spec())) {
    throw Error(Errc::spec_mismatch, "mask and occupancy grid use different grid specs");
  }
  DetectionResult result;
  result.detector = DetectorKind::external_mask;
  result.mask = GapMask(grid.spec());
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      if (!raw.at(col, row)) continue;
      ++result.input_cells;
      if (grid.at(col, row)) {
        ++result.dropped_cells;
      } else {
        result.mask.set(col, row);
      }
    }
  }
  result.confidence.assign(connected_components(result.mask).size(), 1.0);
  return result;
}

DetectionResult load_external_mask(const std::filesystem::path& path, const OccupancyGrid& grid) {
  return accept_external_mask(read_grid<GapTag>(path, grid.spec()), grid);
}

}  // namespace stackrepair
