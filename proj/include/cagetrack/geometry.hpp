#pragma once

#include "cagetrack/core_types.hpp"

namespace cagetrack {

/// Intersection over union. Boxes that only touch along an edge score 0.
double iou(const BBox& a, const BBox& b) noexcept;

/// Euclidean distance between box centers, in pixels.
double center_distance(const BBox& a, const BBox& b) noexcept;

double diagonal(const BBox& b) noexcept;

/// Smallest box covering both inputs.
BBox union_box(const BBox& a, const BBox& b) noexcept;

/// Box affinity in [0,1] used for the motion cost (cost = 1 - affinity).
using OverlapKernel = double (*)(const BBox&, const BBox&) noexcept;

inline constexpr OverlapKernel kDefaultOverlap = &iou;

}  // namespace cagetrack
