#pragma once

#include <algorithm>

namespace detfuse {

/// Axis-aligned box in normalized image coordinates, corners (x1,y1)-(x2,y2).
/// A valid box satisfies 0 <= x1 < x2 <= 1 and 0 <= y1 < y2 <= 1.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double area() const { return (x2 - x1) * (y2 - y1); }

  bool valid() const {
    return 0.0 <= x1 && x1 < x2 && x2 <= 1.0 && 0.0 <= y1 && y1 < y2 &&
           y2 <= 1.0;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Lexicographic (x1, y1, x2, y2) order, used as a canonical tie-break.
inline bool box_less(const BoundingBox& a, const BoundingBox& b) {
  if (a.x1 != b.x1) return a.x1 < b.x1;
  if (a.y1 != b.y1) return a.y1 < b.y1;
  if (a.x2 != b.x2) return a.x2 < b.x2;
  return a.y2 < b.y2;
}

/// Clamps all four coordinates into [0,1]. May produce a degenerate box;
/// callers validate afterwards.
inline BoundingBox clip_to_unit(BoundingBox b) {
  b.x1 = std::clamp(b.x1, 0.0, 1.0);
  b.y1 = std::clamp(b.y1, 0.0, 1.0);
  b.x2 = std::clamp(b.x2, 0.0, 1.0);
  b.y2 = std::clamp(b.y2, 0.0, 1.0);
  return b;
}

/// Intersection over union of two valid boxes. Symmetric, in [0,1],
/// 0 for disjoint boxes and 1 for identical ones.
double iou(const BoundingBox& a, const BoundingBox& b);

}  // namespace detfuse
