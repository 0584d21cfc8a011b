#pragma once

#include <cmath>

namespace hetpatrol {

/// 2D vector in meters. Used both for positions in the world frame and for
/// displacements between them.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

using Position = Vec2;

inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double distance(Position a, Position b) { return norm(b - a); }

/// Unit vector along v, or the zero vector when v is zero.
inline Vec2 unit(Vec2 v) {
  const double n = norm(v);
  if (n == 0.0) return {};
  return {v.x / n, v.y / n};
}

}  // namespace hetpatrol
