#pragma once

// Generators and finite-difference helpers shared by the test suites.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "sigform/geometry.hpp"

namespace sigform::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Position position(double span = 5.0) { return {uniform(-span, span), uniform(-span, span)}; }
  PlanarVector vector(double span = 5.0) { return {uniform(-span, span), uniform(-span, span)}; }
  RigidMotion motion() { return {uniform(-std::numbers::pi, std::numbers::pi), vector(10.0)}; }
  std::vector<Position> positions(std::size_t n, double span = 5.0) {
    std::vector<Position> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(position(span));
    return out;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline constexpr double kFdStep = 1e-6;

/// Central-difference gradient of f at p.
inline PlanarVector fd_gradient(const std::function<double(Position)>& f, Position p, double h = kFdStep) {
  return {(f({p.x + h, p.y}) - f({p.x - h, p.y})) / (2 * h), (f({p.x, p.y + h}) - f({p.x, p.y - h})) / (2 * h)};
}

/// Relative error with an absolute floor of 1 on the scale, so gradients near
/// zero are compared absolutely.
inline double relative_error(PlanarVector got, PlanarVector want) {
  return norm(got - want) / std::max(1.0, norm(want));
}

}  // namespace sigform::testing
