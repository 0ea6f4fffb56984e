#pragma once

#include <cmath>
#include <stdexcept>

namespace spaarc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2& a, const Point2& b) {
    return a.x == b.x && a.y == b.y;
  }
};

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Euclidean distance in abstract unit distance.
inline double distance(Point2 a, Point2 b) {
  if (!is_finite(a) || !is_finite(b)) {
    throw std::invalid_argument("distance: points must be finite");
  }
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Axis-aligned rectangle, used for placement obstacles.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(Point2 p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

}  // namespace spaarc
