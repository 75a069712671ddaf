#pragma once

// Equilibria and stability of the pinned pair and pinned triangle.
//
// Canonical frames:
//   pair      p_i = (0, 0), p_j = (x, 0)
//   triangle  p_i = (-a, 0), p_j = (a, 0), p_k = (x, y), Z* = sqrt(3) a^2 > 0
//
// The pinned-triangle closed loop is
//   x' = -2x (x^2 + y^2 - a^2)
//   y' = -2y (x^2 + y^2 - 3a^2) + K a^2 (sqrt(3) a - y)
// whose zeros lie either on x = 0 or on the circle x^2 + y^2 = a^2.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sigform/geometry.hpp"
#include "sigform/potentials.hpp"

namespace sigform {

/// Above this gain only the correct equilibrium exists.
inline constexpr double kSingleEquilibriumGain = 1.5;
/// Below this gain the mirrored equilibrium is stable and the circle
/// equilibria exist: -2 + 2 sqrt(3) = 2 (sqrt(3) - 1).
inline constexpr double kBistableBoundary = 2.0 * (std::numbers::sqrt3 - 1.0);
/// Gains within this distance of kBistableBoundary are treated as on it.
inline constexpr double kBoundaryTolerance = 1e-12;
/// Roots closer than this are reported as one.
inline constexpr double kRootMergeDistance = 1e-6;

enum class EquilibriumFamily { apex_correct, below_axis, between, circle_left, circle_right, pair_origin, pair_correct };
enum class Stability { stable, unstable, degenerate };
enum class Regime { global, almost_global, bistable };

inline const char* to_string(EquilibriumFamily f) {
  switch (f) {
    case EquilibriumFamily::apex_correct: return "apex-correct";
    case EquilibriumFamily::below_axis: return "below-axis";
    case EquilibriumFamily::between: return "between";
    case EquilibriumFamily::circle_left: return "circle-left";
    case EquilibriumFamily::circle_right: return "circle-right";
    case EquilibriumFamily::pair_origin: return "pair-origin";
    case EquilibriumFamily::pair_correct: return "pair-correct";
  }
  return "?";
}

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::degenerate: return "degenerate";
  }
  return "?";
}

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::global: return "global";
    case Regime::almost_global: return "almost-global";
    case Regime::bistable: return "bistable";
  }
  return "?";
}

struct Equilibrium {
  Position position;
  EquilibriumFamily family = EquilibriumFamily::apex_correct;
  /// Ascending Hessian eigenvalues of the reduced system (one for the pair,
  /// which moves on a line; two for the triangle).
  std::vector<double> eigenvalues;
  Stability stability = Stability::stable;
  /// 2 for the double root where the two on-axis incorrect equilibria merge.
  int multiplicity = 1;

  bool in_target_set() const {
    return family == EquilibriumFamily::apex_correct || family == EquilibriumFamily::pair_correct;
  }
};

/// Any eigenvalue below -tol means a descent direction (unstable); otherwise
/// any |lambda| <= tol leaves the linearisation inconclusive (degenerate).
inline Stability classify_stability(std::span<const double> eigenvalues, double tol) {
  bool zero = false;
  for (double l : eigenvalues) {
    if (l < -tol) return Stability::unstable;
    if (std::abs(l) <= tol) zero = true;
  }
  return zero ? Stability::degenerate : Stability::stable;
}

inline std::vector<double> sorted_eigenvalues(const Eigen::Matrix2d& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(h, Eigen::EigenvaluesOnly);
  return {solver.eigenvalues()(0), solver.eigenvalues()(1)};
}

/// Hessian scale factor h(K) at the lower on-axis equilibrium.
inline double h_below(double k) { return 0.5 - k / 2.0 + std::sqrt(9.0 / 4.0 - 3.0 * k / 2.0); }
/// Same for the on-axis equilibrium between the pins' axis and the lower one.
inline double h_between(double k) { return 0.5 - k / 2.0 - std::sqrt(9.0 / 4.0 - 3.0 * k / 2.0); }

struct GainRegime {
  double k_gain = 0.0;
  Regime regime = Regime::global;
  /// True when K coincides with -2 + 2 sqrt(3), where the lower equilibrium's
  /// Hessian is singular.
  bool on_boundary = false;
};

/// K > 3/2 global; -2 + 2 sqrt(3) < K <= 3/2 almost-global; below, bistable.
/// K on the lower boundary is labelled almost-global and flagged.
inline GainRegime classify_gain(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("gain K must be finite and positive");
  GainRegime out{k, Regime::global, false};
  if (std::abs(k - kBistableBoundary) <= kBoundaryTolerance) {
    out.regime = Regime::almost_global;
    out.on_boundary = true;
  } else if (k > kSingleEquilibriumGain) {
    out.regime = Regime::global;
  } else if (k > kBistableBoundary) {
    out.regime = Regime::almost_global;
  } else {
    out.regime = Regime::bistable;
  }
  return out;
}

/// Equilibria of the pinned pair on the x axis: the unstable origin and the
/// stable points at +-d. Eigenvalue is the on-axis Hessian 3x^2 - d^2.
inline std::vector<Equilibrium> enumerate_pair_equilibria(double d_star) {
  if (!(d_star > 0.0)) throw std::invalid_argument("d_star must be > 0");
  const double d2 = d_star * d_star;
  const double tol = 1e-9 * d2;
  std::vector<Equilibrium> out;
  auto add = [&](double x, EquilibriumFamily family) {
    std::vector<double> eig{3.0 * x * x - d2};
    const Stability s = classify_stability(eig, tol);
    out.push_back({{x, 0.0}, family, std::move(eig), s, 1});
  };
  add(0.0, EquilibriumFamily::pair_origin);
  add(d_star, EquilibriumFamily::pair_correct);
  add(-d_star, EquilibriumFamily::pair_correct);
  return out;
}

/// All equilibria of the pinned triangle for half-side a and gain K.
inline std::vector<Equilibrium> enumerate_triangle_equilibria(double a, double k) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("half-side a must be > 0");
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("gain K must be > 0");
  const TrianglePotentialSpec spec = TrianglePotentialSpec::equilateral(2.0 * a, k);
  const double tol = 1e-9 * a * a;
  const double sqrt3 = std::numbers::sqrt3;
  std::vector<Equilibrium> out;
  auto add = [&](Position p, EquilibriumFamily family, int multiplicity = 1) {
    auto eig = sorted_eigenvalues(pinned_triangle_hessian(spec, p));
    const Stability s = classify_stability(eig, tol);
    out.push_back({p, family, std::move(eig), s, multiplicity});
  };

  add({0.0, sqrt3 * a}, EquilibriumFamily::apex_correct);

  // (y + sqrt(3)/2 a)^2 + (K/2 - 3/4) a^2 = 0
  const double disc = 0.75 - k / 2.0;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    // Merged when closer than the numeric oracle's de-dup distance.
    if (2.0 * s * a <= kRootMergeDistance) {
      add({0.0, -sqrt3 / 2.0 * a}, EquilibriumFamily::below_axis, 2);
    } else {
      add({0.0, (-s - sqrt3 / 2.0) * a}, EquilibriumFamily::below_axis);
      add({0.0, (s - sqrt3 / 2.0) * a}, EquilibriumFamily::between);
    }
  }

  // Circle x^2 + y^2 = a^2, x != 0: y = sqrt(3) K a / (K - 4), requires
  // 0 < K < 2 (sqrt(3) - 1).
  if (k < kBistableBoundary && !classify_gain(k).on_boundary) {
    const double y = sqrt3 * k * a / (k - 4.0);
    const double x2 = a * a - y * y;
    if (x2 > 0.0) {
      const double x = std::sqrt(x2);
      add({-x, y}, EquilibriumFamily::circle_left);
      add({x, y}, EquilibriumFamily::circle_right);
    }
  }
  return out;
}

/// Closed-loop velocity of the free agent of the pinned triangle, canonical frame.
inline PlanarVector pinned_triangle_field(double a, double k, Position p) {
  const double x = p.x, y = p.y, a2 = a * a;
  return {-2.0 * x * (x * x + y * y - a2),
          -2.0 * y * (x * x + y * y - 3.0 * a2) + k * a2 * (std::numbers::sqrt3 * a - y)};
}

struct SeedGrid {
  double lo = -4.0;
  double hi = 4.0;
  int per_axis = 41;

  static SeedGrid spanning(double a, int per_axis = 41) { return {-4.0 * a, 4.0 * a, per_axis}; }
};

struct NewtonSettings {
  double damping = 0.5;
  int max_iterations = 200;
  double residual_tol = 1e-10;
  /// Near a double root Newton only resolves ~sqrt(eps), so 1e-8 splits it.
  double dedup_tol = kRootMergeDistance;
};

/// Independent root finder for the pinned-triangle field: damped Newton from
/// every seed, keeping converged roots distinct up to dedup_tol. Seeds that
/// do not reach the residual tolerance are dropped.
inline std::vector<Position> find_equilibria_numeric(double a, double k, const SeedGrid& grid,
                                                     const NewtonSettings& cfg = {}) {
  if (!(a > 0.0) || !(k > 0.0)) throw std::invalid_argument("a and K must be > 0");
  const double a2 = a * a;
  const double sqrt3 = std::numbers::sqrt3;
  struct Root {
    Position p;
    double residual;
  };
  std::vector<Root> roots;

  auto field = [&](double x, double y) {
    return std::pair{-2.0 * x * (x * x + y * y - a2), -2.0 * y * (x * x + y * y - 3.0 * a2) + k * a2 * (sqrt3 * a - y)};
  };

  const int m = std::max(grid.per_axis, 0);
  for (int ix = 0; ix < m; ++ix)
    for (int iy = 0; iy < m; ++iy) {
      const double t_x = m == 1 ? 0.5 : static_cast<double>(ix) / (m - 1);
      const double t_y = m == 1 ? 0.5 : static_cast<double>(iy) / (m - 1);
      double x = grid.lo + t_x * (grid.hi - grid.lo);
      double y = grid.lo + t_y * (grid.hi - grid.lo);
      bool ok = true;
      for (int it = 0; it < cfg.max_iterations; ++it) {
        const auto [fx, fy] = field(x, y);
        // Jacobian of the field above.
        const double jxx = -2.0 * (3.0 * x * x + y * y - a2);
        const double jxy = -4.0 * x * y;
        const double jyy = -2.0 * (x * x + 3.0 * y * y - 3.0 * a2) - k * a2;
        const double det = jxx * jyy - jxy * jxy;
        if (det == 0.0 || !std::isfinite(det)) {
          ok = false;
          break;
        }
        const double sx = (jyy * fx - jxy * fy) / det;
        const double sy = (jxx * fy - jxy * fx) / det;
        x -= cfg.damping * sx;
        y -= cfg.damping * sy;
        if (!std::isfinite(x) || !std::isfinite(y)) {
          ok = false;
          break;
        }
        if (std::hypot(sx, sy) == 0.0) break;
      }
      if (!ok) continue;
      const auto [fx, fy] = field(x, y);
      const double residual = std::hypot(fx, fy);
      if (!(residual < cfg.residual_tol)) continue;

      bool merged = false;
      for (Root& r : roots)
        if (std::hypot(r.p.x - x, r.p.y - y) <= cfg.dedup_tol) {
          if (residual < r.residual) r = {{x, y}, residual};
          merged = true;
          break;
        }
      if (!merged) roots.push_back({{x, y}, residual});
    }

  std::vector<Position> out;
  out.reserve(roots.size());
  for (const Root& r : roots) out.push_back(r.p);
  std::sort(out.begin(), out.end(), [](Position l, Position r) { return l.y != r.y ? l.y < r.y : l.x < r.x; });
  return out;
}

/// True when the stability pattern is the one the regime predicts:
///   global         exactly one equilibrium, the correct one, stable
///   almost-global  correct one stable, every other equilibrium not stable
///   bistable       correct one and the lower on-axis one stable, rest not
inline bool matches_regime(std::span<const Equilibrium> eqs, Regime regime) {
  int stable = 0;
  bool correct_stable = false;
  bool below_stable = false;
  for (const Equilibrium& e : eqs) {
    if (e.stability != Stability::stable) continue;
    ++stable;
    correct_stable |= e.family == EquilibriumFamily::apex_correct;
    below_stable |= e.family == EquilibriumFamily::below_axis;
  }
  switch (regime) {
    case Regime::global: return eqs.size() == 1 && correct_stable && stable == 1;
    case Regime::almost_global: return correct_stable && stable == 1 && eqs.size() > 1;
    case Regime::bistable: return correct_stable && below_stable && stable == 2;
  }
  return false;
}

/// Index of the equilibrium nearest to p, if within tol.
inline std::optional<std::size_t> nearest_equilibrium(std::span<const Equilibrium> eqs, Position p, double tol) {
  std::optional<std::size_t> best;
  double best_d = tol;
  for (std::size_t q = 0; q < eqs.size(); ++q) {
    const double d = distance(eqs[q].position, p);
    if (d <= best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

/// Rigidly maps p into the frame where `left` sits on the negative x axis and
/// `right` on the positive x axis, symmetric about the origin.
inline Position to_pinned_frame(Position left, Position right, Position p) {
  const PlanarVector axis = right - left;
  const double len = norm(axis);
  if (len == 0.0) throw std::invalid_argument("pinned agents coincide");
  const PlanarVector ex{axis.dx / len, axis.dy / len};
  const PlanarVector ey{-ex.dy, ex.dx};
  const Position mid{0.5 * (left.x + right.x), 0.5 * (left.y + right.y)};
  const PlanarVector r = p - mid;
  return {dot(r, ex), dot(r, ey)};
}

}  // namespace sigform
