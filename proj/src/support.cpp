#include "stackrepair/support.hpp"

#include <algorithm>
#include <cmath>

namespace stackrepair {
namespace {
constexpr double kMinOverlap = 1e-9;
constexpr double kHullEps = 1e-9;
}  // namespace

std::vector<SupportInfo> analyze_support(std::span<const Aabb> boxes, double tolerance,
                                         const std::function<bool(std::size_t, std::size_t)>& skip) {
  std::vector<SupportInfo> out(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Aabb& a = boxes[i];
    SupportInfo& info = out[i];
    double lo = 0.0;
    double hi = 0.0;
    auto extend = [&](double l, double h) {
      if (!info.has_support) {
        lo = l;
        hi = h;
        info.has_support = true;
      } else {
        lo = std::min(lo, l);
        hi = std::max(hi, h);
      }
    };
    if (a.y_min <= tolerance) {
      info.grounded = true;
      extend(a.x_min, a.x_max);
    }
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (j == i) continue;
      if (skip && skip(i, j)) continue;
      const Aabb& b = boxes[j];
      if (std::abs(a.y_min - b.y_max) > tolerance) continue;
      if (b.center_y() >= a.center_y()) continue;
      if (overlap_x(a, b) <= kMinOverlap) continue;
      info.supporters.push_back(static_cast<int>(j));
      extend(std::max(a.x_min, b.x_min), std::min(a.x_max, b.x_max));
    }
    if (info.has_support) {
      info.span_min = lo;
      info.span_max = hi;
      const double com = a.center_x();
      info.com_outside = com < lo - kHullEps || com > hi + kHullEps;
      info.unsupported_fraction = std::clamp(1.0 - (hi - lo) / a.width(), 0.0, 1.0);
    }
  }
  return out;
}

std::vector<Aabb> level_boxes(const Level& level) {
  std::vector<Aabb> boxes;
  boxes.reserve(level.blocks.size() + level.pigs.size());
  for (const auto& b : level.blocks) boxes.push_back(effective_aabb(b));
  for (const auto& p : level.pigs) boxes.push_back(pig_aabb(p));
  return boxes;
}

bool statically_supported(const Level& level, double tolerance) {
  const auto boxes = level_boxes(level);
  const auto info = analyze_support(boxes, tolerance);
  for (std::size_t i = 0; i < level.blocks.size(); ++i) {
    if (info[i].com_outside) return false;
  }
  return true;
}

}  // namespace stackrepair
