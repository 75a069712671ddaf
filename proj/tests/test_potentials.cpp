#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sigform/analysis.hpp"
#include "sigform/potentials.hpp"
#include "support.hpp"

using namespace sigform;
using sigform::testing::fd_gradient;
using sigform::testing::Gen;
using sigform::testing::relative_error;

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

TrianglePotentialSpec random_triangle_spec(Gen& g) {
  const double d = g.uniform(0.5, 2.0);
  return TrianglePotentialSpec::equilateral(d, g.uniform(0.1, 30.0), g.uniform(0, 1) < 0.5 ? 1 : -1);
}

PlanarVector gradient_at(const TrianglePotentialSpec& s, std::array<Position, 3> p, TriangleVertex v) {
  return triangle_gradient(s, p[0], p[1], p[2], v);
}

}  // namespace

TEST(PairPotential, Examples) {
  const PairPotentialSpec s{2.0};
  EXPECT_EQ(pair_potential(s, {0, 0}, {2, 0}), 0.0);
  EXPECT_EQ(pair_potential(s, {0, 0}, {0, 0}), 4.0);
  EXPECT_EQ(pair_potential(s, {0, 0}, {3, 0}), 6.25);
}

TEST(PairGradient, Examples) {
  const PairPotentialSpec s{2.0};
  EXPECT_EQ(pair_gradient(s, {0, 0}, {2, 0}, PairEnd::second), (PlanarVector{0, 0}));
  EXPECT_EQ(pair_gradient(s, {0, 0}, {1, 0}, PairEnd::second), (PlanarVector{-3, 0}));
  EXPECT_EQ(pair_gradient(s, {0, 0}, {1, 0}, PairEnd::first), (PlanarVector{3, 0}));
}

TEST(PairGradient, MatchesFiniteDifference) {
  Gen g(31);
  for (int t = 0; t < 1000; ++t) {
    const PairPotentialSpec s{g.uniform(0.5, 2.0)};
    const Position pi = g.position(2.0), pj = g.position(2.0);
    const auto fd_j = fd_gradient([&](Position q) { return pair_potential(s, pi, q); }, pj);
    const auto fd_i = fd_gradient([&](Position q) { return pair_potential(s, q, pj); }, pi);
    EXPECT_LT(relative_error(pair_gradient(s, pi, pj, PairEnd::second), fd_j), 1e-6);
    EXPECT_LT(relative_error(pair_gradient(s, pi, pj, PairEnd::first), fd_i), 1e-6);
  }
}

TEST(TrianglePotential, ZeroAtTargetAndFlippedValue) {
  const auto s = TrianglePotentialSpec{2.0, kSqrt3, 20.0};
  EXPECT_NEAR(triangle_potential(s, {-1, 0}, {1, 0}, {0, kSqrt3}), 0.0, 1e-24);
  EXPECT_NEAR(triangle_potential(s, {-1, 0}, {1, 0}, {0, -kSqrt3}), 120.0, 1e-12);
}

TEST(TrianglePotential, PinnedClosedFormExpansion) {
  Gen g(32);
  for (int t = 0; t < 500; ++t) {
    const double a = g.uniform(0.3, 2.0), k = g.uniform(0.1, 30.0);
    const double x = g.uniform(-3, 3), y = g.uniform(-3, 3);
    const auto s = TrianglePotentialSpec{2 * a, kSqrt3 * a * a, k};
    const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2;
    const double expected = 0.5 * x * x * x * x + 0.5 * y * y * y * y + 4.5 * a4 + x * x * y * y - x * x * a2 -
                            3 * a2 * y * y + 0.5 * k * a2 * y * y + 1.5 * k * a4 - kSqrt3 * k * a3 * y;
    const double got = triangle_potential(s, {-a, 0}, {a, 0}, {x, y});
    EXPECT_NEAR(got, expected, 1e-11 * std::max(1.0, std::abs(expected)));
  }
}

TEST(TriangleGradient, PinnedExamples) {
  const auto s = TrianglePotentialSpec{2.0, kSqrt3, 20.0};
  const PlanarVector at_apex = triangle_gradient(s, {-1, 0}, {1, 0}, {0, kSqrt3}, TriangleVertex::k);
  EXPECT_LT(norm(at_apex), 1e-13);
  const PlanarVector g = triangle_gradient(s, {-1, 0}, {1, 0}, {1, 1}, TriangleVertex::k);
  EXPECT_NEAR(g.dx, 2.0, 1e-13);
  EXPECT_NEAR(g.dy, -2.0 - 20.0 * (kSqrt3 - 1.0), 1e-12);
}

TEST(TriangleGradient, EqualsClosedLoopFieldInPinnedFrame) {
  Gen g(33);
  for (int t = 0; t < 500; ++t) {
    const double a = g.uniform(0.3, 2.0), k = g.uniform(0.1, 30.0);
    const Position pk = g.position(3.0);
    const auto s = TrianglePotentialSpec{2 * a, kSqrt3 * a * a, k};
    const PlanarVector u = -1.0 * triangle_gradient(s, {-a, 0}, {a, 0}, pk, TriangleVertex::k);
    const PlanarVector f = pinned_triangle_field(a, k, pk);
    EXPECT_LT(norm(u - f), 1e-11 * std::max(1.0, norm(f)));
  }
}

TEST(TriangleGradient, MatchesFiniteDifferenceEveryVertex) {
  Gen g(34);
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_triangle_spec(g);
    const std::array<Position, 3> p{g.position(2.0), g.position(2.0), g.position(2.0)};
    for (int v = 0; v < 3; ++v) {
      auto f = [&](Position q) {
        auto moved = p;
        moved[static_cast<std::size_t>(v)] = q;
        return triangle_potential(s, moved[0], moved[1], moved[2]);
      };
      const auto fd = fd_gradient(f, p[static_cast<std::size_t>(v)]);
      EXPECT_LT(relative_error(gradient_at(s, p, static_cast<TriangleVertex>(v)), fd), 1e-6) << "vertex " << v;
    }
  }
}

TEST(TriangleGradient, InternalForcesSumToZero) {
  Gen g(35);
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_triangle_spec(g);
    const std::array<Position, 3> p{g.position(), g.position(), g.position()};
    const PlanarVector sum = gradient_at(s, p, TriangleVertex::i) + gradient_at(s, p, TriangleVertex::j) +
                             gradient_at(s, p, TriangleVertex::k);
    const double scale = norm(gradient_at(s, p, TriangleVertex::i)) + norm(gradient_at(s, p, TriangleVertex::k));
    EXPECT_LT(norm(sum), 1e-12 * std::max(1.0, scale));
  }
}

TEST(PotentialProperty, TranslationInvariance) {
  Gen g(36);
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_triangle_spec(g);
    const Position a = g.position(2.0), b = g.position(2.0), c = g.position(2.0);
    const PlanarVector v = g.vector(10.0);
    const double before = triangle_potential(s, a, b, c);
    EXPECT_NEAR(triangle_potential(s, a + v, b + v, c + v), before, 1e-10 * std::max(1.0, before));
    const PairPotentialSpec ps{s.d_star};
    const double pb = pair_potential(ps, a, b);
    EXPECT_NEAR(pair_potential(ps, a + v, b + v), pb, 1e-10 * std::max(1.0, pb));
  }
}

TEST(PotentialProperty, GradientsRotateWithTheFrame) {
  Gen g(37);
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_triangle_spec(g);
    const std::array<Position, 3> p{g.position(2.0), g.position(2.0), g.position(2.0)};
    const RigidMotion m = g.motion();
    const std::array<Position, 3> q{m(p[0]), m(p[1]), m(p[2])};
    for (int v = 0; v < 3; ++v) {
      const auto vert = static_cast<TriangleVertex>(v);
      const PlanarVector want = m.rotate(gradient_at(s, p, vert));
      EXPECT_LT(norm(gradient_at(s, q, vert) - want), 1e-9 * std::max(1.0, norm(want)));
    }
    const PairPotentialSpec ps{s.d_star};
    const PlanarVector want = m.rotate(pair_gradient(ps, p[0], p[1], PairEnd::second));
    EXPECT_LT(norm(pair_gradient(ps, q[0], q[1], PairEnd::second) - want), 1e-9 * std::max(1.0, norm(want)));
  }
}

TEST(PotentialProperty, ReflectionCostsTwoKZStarSquared) {
  Gen g(38);
  for (int t = 0; t < 200; ++t) {
    const double d = g.uniform(0.5, 3.0), k = g.uniform(0.1, 30.0);
    const auto s = TrianglePotentialSpec::equilateral(d, k);
    const RigidMotion m = g.motion();
    // distance-perfect clockwise triangle: mirror image of the target
    const Position a = m({0, 0}), b = m({d, 0}), c = m({d / 2, -kSqrt3 / 2 * d});
    EXPECT_NEAR(triangle_potential(s, a, b, c), 2.0 * k * s.z_star * s.z_star, 1e-9 * k * d * d * d * d);
  }
}

TEST(PinnedHessian, AtApex) {
  for (double k : {0.6, 1.0, 20.0}) {
    const auto h = pinned_triangle_hessian({2.0, kSqrt3, k}, {0, kSqrt3});
    EXPECT_NEAR(h(0, 0), 4.0, 1e-14);
    EXPECT_NEAR(h(1, 1), 12.0 + k, 1e-13);
    EXPECT_EQ(h(0, 1), 0.0);
    EXPECT_EQ(h(1, 0), 0.0);
  }
}

TEST(PinnedHessian, AtLowerEquilibrium) {
  const double k = 0.6;
  const double y = -std::sqrt(0.75 - k / 2) - kSqrt3 / 2;
  const auto h = pinned_triangle_hessian({2.0, kSqrt3, k}, {0, y});
  const double hk = h_below(k);
  EXPECT_NEAR(hk, 0.2 + std::sqrt(2.25 - 0.9), 1e-15);
  EXPECT_NEAR(hk, 1.3618950038622251, 1e-15);
  EXPECT_NEAR(h(0, 0), 2 * hk, 1e-12);
  EXPECT_NEAR(h(1, 1), 2 * (3 * hk + k / 2), 1e-12);
  EXPECT_NEAR(h(0, 1), 0.0, 1e-15);
}

TEST(PinnedHessian, MatchesFiniteDifference) {
  Gen g(39);
  const double step = 1e-5;
  for (int t = 0; t < 500; ++t) {
    const double a = g.uniform(0.3, 2.0), k = g.uniform(0.1, 30.0);
    const auto s = TrianglePotentialSpec{2 * a, kSqrt3 * a * a, k};
    const Position pk = g.position(3.0);
    auto f = [&](Position q) { return triangle_potential(s, {-a, 0}, {a, 0}, q); };
    const double fxx = (f({pk.x + step, pk.y}) - 2 * f(pk) + f({pk.x - step, pk.y})) / (step * step);
    const double fyy = (f({pk.x, pk.y + step}) - 2 * f(pk) + f({pk.x, pk.y - step})) / (step * step);
    const double fxy = (f({pk.x + step, pk.y + step}) - f({pk.x + step, pk.y - step}) - f({pk.x - step, pk.y + step}) +
                        f({pk.x - step, pk.y - step})) /
                       (4 * step * step);
    // second differences of V carry ~eps*V/h^2 roundoff, so they only get a coarse bound
    auto grad = [&](Position q) { return triangle_gradient(s, {-a, 0}, {a, 0}, q, TriangleVertex::k); };
    const PlanarVector gx = (1.0 / (2 * step)) * (grad({pk.x + step, pk.y}) - grad({pk.x - step, pk.y}));
    const PlanarVector gy = (1.0 / (2 * step)) * (grad({pk.x, pk.y + step}) - grad({pk.x, pk.y - step}));
    const auto h = pinned_triangle_hessian(s, pk);
    const double scale = std::max(1.0, h.norm());
    EXPECT_LT(std::abs(h(0, 0) - gx.dx) / scale, 1e-5);
    EXPECT_LT(std::abs(h(1, 0) - gx.dy) / scale, 1e-5);
    EXPECT_LT(std::abs(h(0, 1) - gy.dx) / scale, 1e-5);
    EXPECT_LT(std::abs(h(1, 1) - gy.dy) / scale, 1e-5);
    EXPECT_LT(std::abs(h(0, 0) - fxx) / scale, 1e-2);
    EXPECT_LT(std::abs(h(1, 1) - fyy) / scale, 1e-2);
    EXPECT_LT(std::abs(h(0, 1) - fxy) / scale, 1e-2);
  }
}

TEST(PotentialSpecs, Validation) {
  EXPECT_THROW(PairPotentialSpec{0.0}.validate(), std::invalid_argument);
  EXPECT_THROW((TrianglePotentialSpec{1.0, 0.0, -1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((TrianglePotentialSpec{-1.0, 0.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW(TrianglePotentialSpec::equilateral(1.0, 1.0).validate());
}
