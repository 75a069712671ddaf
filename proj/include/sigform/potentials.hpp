#pragma once

// Pair and triangle potentials with hand-derived gradients.
//
//   V_pair(pi, pj)     = 1/4 (|pi - pj|^2 - d^2)^2
//   V_tri(pi, pj, pk)  = 1/4 sum_edges (|e|^2 - d^2)^2 + K/2 (Z(pi,pj,pk) - Z*)^2
//
// Gradients are written in relative-position form so they hold for any
// placement, not only the pinned frame used by the stability analysis.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>

#include "sigform/geometry.hpp"

namespace sigform {

struct PairPotentialSpec {
  double d_star = 1.0;

  void validate() const {
    if (!(d_star > 0.0) || !std::isfinite(d_star)) throw std::invalid_argument("pair potential: d_star must be > 0");
  }
};

struct TrianglePotentialSpec {
  double d_star = 1.0;
  double z_star = 0.0;
  double k_gain = 1.0;

  /// Equilateral target with the given orientation sign.
  static TrianglePotentialSpec equilateral(double d_star, double k_gain, int orientation = 1) {
    return {d_star, orientation * std::numbers::sqrt3 / 4.0 * d_star * d_star, k_gain};
  }

  void validate() const {
    if (!(d_star > 0.0) || !std::isfinite(d_star)) throw std::invalid_argument("triangle potential: d_star must be > 0");
    if (!(k_gain > 0.0) || !std::isfinite(k_gain)) throw std::invalid_argument("triangle potential: K must be > 0");
    if (!std::isfinite(z_star)) throw std::invalid_argument("triangle potential: z_star must be finite");
  }
};

enum class PairEnd { first, second };
enum class TriangleVertex { i, j, k };

inline double pair_potential(const PairPotentialSpec& spec, Position pi, Position pj) {
  const double e = squared_distance(pi, pj) - spec.d_star * spec.d_star;
  return 0.25 * e * e;
}

/// Gradient of pair_potential w.r.t. the chosen end:
/// (|pi - pj|^2 - d^2) (p_wrt - p_other).
inline PlanarVector pair_gradient(const PairPotentialSpec& spec, Position pi, Position pj, PairEnd wrt) {
  const double e = squared_distance(pi, pj) - spec.d_star * spec.d_star;
  return wrt == PairEnd::second ? e * (pj - pi) : e * (pi - pj);
}

inline double triangle_potential(const TrianglePotentialSpec& spec, Position pi, Position pj, Position pk) {
  const double d2 = spec.d_star * spec.d_star;
  const double eij = squared_distance(pi, pj) - d2;
  const double ejk = squared_distance(pj, pk) - d2;
  const double eki = squared_distance(pk, pi) - d2;
  const double ez = signed_area(pi, pj, pk) - spec.z_star;
  return 0.25 * (eij * eij + ejk * ejk + eki * eki) + 0.5 * spec.k_gain * ez * ez;
}

/// Analytic gradient of triangle_potential w.r.t. one vertex.
///
/// Z is invariant under cyclic relabelling, and dZ/dp_k = 1/2 J (p_i - p_j)
/// with J = [[0, 1], [-1, 0]], so every vertex uses the same form with its
/// cyclic predecessors.
inline PlanarVector triangle_gradient(const TrianglePotentialSpec& spec, Position pi, Position pj, Position pk,
                                      TriangleVertex wrt) {
  Position self = pk, a = pi, b = pj;  // (a, b, self) is a cyclic rotation of (i, j, k)
  if (wrt == TriangleVertex::i) {
    self = pi;
    a = pj;
    b = pk;
  } else if (wrt == TriangleVertex::j) {
    self = pj;
    a = pk;
    b = pi;
  }
  const double d2 = spec.d_star * spec.d_star;
  const double ez = signed_area(pi, pj, pk) - spec.z_star;
  return (squared_distance(self, a) - d2) * (self - a) + (squared_distance(self, b) - d2) * (self - b) +
         (0.5 * spec.k_gain * ez) * quarter_turn_cw(a - b);
}

/// Hessian of the triangle potential w.r.t. p_k = (x, y) with the base pinned
/// at (-a, 0), (a, 0), a = d_star / 2 and Z* = sqrt(3) a^2.
inline Eigen::Matrix2d pinned_triangle_hessian(const TrianglePotentialSpec& spec, Position pk) {
  const double a = spec.d_star / 2.0;
  const double a2 = a * a;
  const double x = pk.x, y = pk.y;
  Eigen::Matrix2d h;
  h << 6 * x * x + 2 * y * y - 2 * a2, 4 * x * y,  //
      4 * x * y, 6 * y * y + 2 * x * x - 6 * a2 + spec.k_gain * a2;
  return h;
}

/// Pin locations for the canonical pinned triangle with side d.
inline Position pinned_left(double d_star) { return {-d_star / 2.0, 0.0}; }
inline Position pinned_right(double d_star) { return {d_star / 2.0, 0.0}; }

}  // namespace sigform
