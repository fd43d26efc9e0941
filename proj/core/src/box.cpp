#include "memtrack/box.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "memtrack/error.hpp"

namespace memtrack {

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.valid() || !b.valid()) return 0.0;
  const double ix = std::max(0.0, std::min(a.corner_x() + a.width, b.corner_x() + b.width) -
                                      std::max(a.corner_x(), b.corner_x()));
  const double iy = std::max(0.0, std::min(a.corner_y() + a.height, b.corner_y() + b.height) -
                                      std::max(a.corner_y(), b.corner_y()));
  const double inter = ix * iy;
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double center_distance(const BoundingBox& a, const BoundingBox& b) {
  return std::hypot(a.cx - b.cx, a.cy - b.cy);
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_box(const BoundingBox& box) {
  return shortest(box.corner_x()) + ',' + shortest(box.corner_y()) + ',' + shortest(box.width) +
         ',' + shortest(box.height);
}

BoundingBox parse_box(const std::string& line) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ',' || *p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    double v = 0.0;
    auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) throw ContractViolation("parse_box: malformed line '" + line + "'");
    values.push_back(v);
    p = res.ptr;
  }
  if (values.size() != 4) {
    throw ContractViolation("parse_box: expected 4 values in '" + line + "'");
  }
  return BoundingBox::from_corner(values[0], values[1], values[2], values[3]);
}

}  // namespace memtrack
