#pragma once

#include <cmath>

namespace locgibbs {

/// Planar location, kilometres.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

inline double squared_norm(Point p) { return p.x * p.x + p.y * p.y; }
inline double norm(Point p) { return std::sqrt(squared_norm(p)); }
inline double distance(Point a, Point b) { return norm(b - a); }

}  // namespace locgibbs
