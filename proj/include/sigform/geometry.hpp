#pragma once

// Planar primitives shared by the rest of the library.

#include <cmath>
#include <stdexcept>
#include <string>

namespace sigform {

/// Relative position / displacement in the plane.
struct PlanarVector {
  double dx = 0.0;
  double dy = 0.0;

  friend constexpr PlanarVector operator+(PlanarVector a, PlanarVector b) { return {a.dx + b.dx, a.dy + b.dy}; }
  friend constexpr PlanarVector operator-(PlanarVector a, PlanarVector b) { return {a.dx - b.dx, a.dy - b.dy}; }
  friend constexpr PlanarVector operator-(PlanarVector a) { return {-a.dx, -a.dy}; }
  friend constexpr PlanarVector operator*(double s, PlanarVector a) { return {s * a.dx, s * a.dy}; }
  friend constexpr PlanarVector operator*(PlanarVector a, double s) { return {s * a.dx, s * a.dy}; }
  constexpr PlanarVector& operator+=(PlanarVector o) {
    dx += o.dx;
    dy += o.dy;
    return *this;
  }
  friend constexpr bool operator==(PlanarVector, PlanarVector) = default;
};

/// Agent position. Coordinates are expected to be finite; use checked() at
/// trust boundaries (file input, integrator output).
struct Position {
  double x = 0.0;
  double y = 0.0;

  static Position checked(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y))
      throw std::invalid_argument("non-finite position (" + std::to_string(x) + ", " + std::to_string(y) + ")");
    return {x, y};
  }

  friend constexpr PlanarVector operator-(Position a, Position b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Position operator+(Position p, PlanarVector v) { return {p.x + v.dx, p.y + v.dy}; }
  friend constexpr Position operator-(Position p, PlanarVector v) { return {p.x - v.dx, p.y - v.dy}; }
  friend constexpr bool operator==(Position, Position) = default;
};

inline bool is_finite(Position p) { return std::isfinite(p.x) && std::isfinite(p.y); }

constexpr double dot(PlanarVector a, PlanarVector b) { return a.dx * b.dx + a.dy * b.dy; }
constexpr double cross(PlanarVector a, PlanarVector b) { return a.dx * b.dy - a.dy * b.dx; }
constexpr double squared_norm(PlanarVector v) { return dot(v, v); }
inline double norm(PlanarVector v) { return std::hypot(v.dx, v.dy); }

/// Applies [[0, 1], [-1, 0]], i.e. a clockwise quarter turn.
constexpr PlanarVector quarter_turn_cw(PlanarVector v) { return {v.dy, -v.dx}; }

constexpr double squared_distance(Position pi, Position pj) { return squared_norm(pi - pj); }
inline double distance(Position pi, Position pj) { return norm(pi - pj); }

/// Half the determinant of [[1,1,1],[pi,pj,pk]]; positive iff (pi, pj, pk)
/// is counterclockwise. Collinear input is returned as computed, not snapped.
constexpr double signed_area(Position pi, Position pj, Position pk) {
  return 0.5 * ((pj.x - pi.x) * (pk.y - pi.y) - (pk.x - pi.x) * (pj.y - pi.y));
}

/// Rigid motion p -> R(theta) p + t.
struct RigidMotion {
  double theta = 0.0;
  PlanarVector translation{};

  Position operator()(Position p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y + translation.dx, s * p.x + c * p.y + translation.dy};
  }
  PlanarVector rotate(PlanarVector v) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * v.dx - s * v.dy, s * v.dx + c * v.dy};
  }
};

}  // namespace sigform
