#include "cagetrack/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cagetrack {

double iou(const BBox& a, const BBox& b) noexcept {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double center_distance(const BBox& a, const BBox& b) noexcept {
  return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

double diagonal(const BBox& b) noexcept { return std::hypot(b.w, b.h); }

BBox union_box(const BBox& a, const BBox& b) noexcept {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.x + a.w, b.x + b.w);
  const double y1 = std::max(a.y + a.h, b.y + b.h);
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace cagetrack
