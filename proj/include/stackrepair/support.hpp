#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stackrepair/level.hpp"

namespace stackrepair {

/// How a box is held up by the bodies directly beneath it.
struct SupportInfo {
  std::vector<int> supporters;  // indices of boxes in vertical contact below
  bool grounded = false;
  bool has_support = false;
  double span_min = 0.0;  // hull of the contact intervals, world x
  double span_max = 0.0;
  /// Center of mass lies outside the support hull (or there is no support).
  bool com_outside = true;
  /// Fraction of the box width not covered by the support hull.
  double unsupported_fraction = 1.0;
};

/// Support relations among axis-aligned boxes resting on the ground plane y = 0.
/// A box supports another when its top is within `tolerance` of the other's
/// bottom and their horizontal overlap is positive.
/// `skip(i, j)` may exclude box j as a supporter of box i.
std::vector<SupportInfo> analyze_support(
    std::span<const Aabb> boxes, double tolerance,
    const std::function<bool(std::size_t, std::size_t)>& skip = {});

/// All boxes of a level in body order: blocks first, then pigs.
std::vector<Aabb> level_boxes(const Level& level);

/// True when every block of the level has its center of mass inside its
/// support hull. A necessary condition for the level to be stationary.
bool statically_supported(const Level& level, double tolerance);

}  // namespace stackrepair
