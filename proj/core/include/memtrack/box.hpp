#pragma once

#include <string>

namespace memtrack {

/// Axis-aligned box stored as center and size (pixels). Files use the
/// top-left corner convention; see from_corner / corner_x / corner_y.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  static BoundingBox from_corner(double x, double y, double w, double h) {
    return {x + w / 2.0, y + h / 2.0, w, h};
  }
  double corner_x() const { return cx - width / 2.0; }
  double corner_y() const { return cy - height / 2.0; }
  bool valid() const { return width > 0.0 && height > 0.0; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection over union; 0 for disjoint or degenerate boxes.
double iou(const BoundingBox& a, const BoundingBox& b);
double center_distance(const BoundingBox& a, const BoundingBox& b);

/// "x,y,w,h" (corner convention).
std::string format_box(const BoundingBox& box);
BoundingBox parse_box(const std::string& line);

}  // namespace memtrack
