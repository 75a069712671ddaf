#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "sigform/analysis.hpp"
#include "sigform/builtins.hpp"
#include "sigform/dynamics.hpp"
#include "support.hpp"

using namespace sigform;
using sigform::testing::Gen;

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

const Equilibrium* find_family(const std::vector<Equilibrium>& eqs, EquilibriumFamily f) {
  for (const auto& e : eqs)
    if (e.family == f) return &e;
  return nullptr;
}

// Closed-form list and Newton list agree point for point (closed-form points
// are distinct, so compare as sets of distinct positions).
bool same_point_set(const std::vector<Equilibrium>& closed, const std::vector<Position>& numeric, double tol) {
  if (closed.size() != numeric.size()) return false;
  for (const auto& e : closed) {
    const bool hit = std::any_of(numeric.begin(), numeric.end(), [&](Position p) {
      return std::abs(p.x - e.position.x) <= tol && std::abs(p.y - e.position.y) <= tol;
    });
    if (!hit) return false;
  }
  return true;
}

}  // namespace

TEST(PairEquilibria, Examples) {
  const auto eqs = enumerate_pair_equilibria(2.0);
  ASSERT_EQ(eqs.size(), 3u);
  EXPECT_EQ(eqs[0].position.x, 0.0);
  EXPECT_EQ(eqs[0].stability, Stability::unstable);
  EXPECT_EQ(eqs[1].position.x, 2.0);
  EXPECT_EQ(eqs[1].stability, Stability::stable);
  EXPECT_EQ(eqs[2].position.x, -2.0);
  EXPECT_EQ(eqs[2].stability, Stability::stable);
  EXPECT_TRUE(eqs[1].in_target_set());
  EXPECT_FALSE(eqs[0].in_target_set());

  const auto unit = enumerate_pair_equilibria(1.0);
  EXPECT_EQ(unit[1].eigenvalues, (std::vector<double>{2.0}));
}

TEST(PairEquilibria, ZeroThePairGradient) {
  for (double d : {0.5, 1.0, 2.0, 3.7})
    for (const auto& e : enumerate_pair_equilibria(d))
      EXPECT_LT(norm(pair_gradient({d}, {0, 0}, e.position, PairEnd::second)), 1e-12);
}

TEST(TriangleEquilibria, HighGainSingleStablePoint) {
  const auto eqs = enumerate_triangle_equilibria(1.0, 20.0);
  ASSERT_EQ(eqs.size(), 1u);
  EXPECT_EQ(eqs[0].family, EquilibriumFamily::apex_correct);
  EXPECT_NEAR(eqs[0].position.y, kSqrt3, 1e-15);
  EXPECT_EQ(eqs[0].stability, Stability::stable);
  EXPECT_NEAR(eqs[0].eigenvalues[0], 4.0, 1e-10);
  EXPECT_NEAR(eqs[0].eigenvalues[1], 32.0, 1e-10);
}

TEST(TriangleEquilibria, LowGainFivePoints) {
  const auto eqs = enumerate_triangle_equilibria(1.0, 0.6);
  ASSERT_EQ(eqs.size(), 5u);
  const auto* below = find_family(eqs, EquilibriumFamily::below_axis);
  const auto* between = find_family(eqs, EquilibriumFamily::between);
  const auto* left = find_family(eqs, EquilibriumFamily::circle_left);
  const auto* right = find_family(eqs, EquilibriumFamily::circle_right);
  ASSERT_TRUE(below && between && left && right);
  EXPECT_NEAR(below->position.y, -std::sqrt(0.45) - kSqrt3 / 2, 1e-15);
  EXPECT_NEAR(below->position.y, -1.536846, 1e-6);
  EXPECT_NEAR(between->position.y, -0.195205, 1e-6);
  EXPECT_NEAR(right->position.x, 0.952142, 1e-6);
  EXPECT_NEAR(left->position.x, -0.952142, 1e-6);
  EXPECT_NEAR(right->position.y, -0.305656, 1e-6);
  EXPECT_EQ(find_family(eqs, EquilibriumFamily::apex_correct)->stability, Stability::stable);
  EXPECT_EQ(below->stability, Stability::stable);
  EXPECT_EQ(between->stability, Stability::unstable);
  EXPECT_EQ(left->stability, Stability::unstable);
  EXPECT_EQ(right->stability, Stability::unstable);
  for (const auto& e : eqs) EXPECT_LT(norm(pinned_triangle_field(1.0, 0.6, e.position)), 1e-12);
}

TEST(TriangleEquilibria, MergedPointAtThreeHalves) {
  const auto eqs = enumerate_triangle_equilibria(1.0, 1.5);
  ASSERT_EQ(eqs.size(), 2u);
  const auto* merged = find_family(eqs, EquilibriumFamily::below_axis);
  ASSERT_TRUE(merged);
  EXPECT_EQ(merged->multiplicity, 2);
  EXPECT_NEAR(merged->position.y, -kSqrt3 / 2, 1e-15);
  EXPECT_EQ(merged->stability, Stability::unstable);
  EXPECT_NEAR(merged->eigenvalues[0], -0.5, 1e-12);
  EXPECT_NEAR(merged->eigenvalues[1], 0.0, 1e-12);
}

TEST(TriangleEquilibria, BoundaryLowerPointIsDegenerate) {
  const auto eqs = enumerate_triangle_equilibria(1.0, kBistableBoundary);
  ASSERT_EQ(eqs.size(), 3u);
  EXPECT_EQ(find_family(eqs, EquilibriumFamily::below_axis)->stability, Stability::degenerate);
  EXPECT_EQ(find_family(eqs, EquilibriumFamily::apex_correct)->stability, Stability::stable);
}

TEST(TriangleEquilibria, ScaleWithHalfSide) {
  for (double a : {0.5, 2.0, 3.0}) {
    const auto unit = enumerate_triangle_equilibria(1.0, 0.6);
    const auto scaled = enumerate_triangle_equilibria(a, 0.6);
    ASSERT_EQ(unit.size(), scaled.size());
    for (std::size_t q = 0; q < unit.size(); ++q) {
      EXPECT_NEAR(scaled[q].position.x, a * unit[q].position.x, 1e-12 * a);
      EXPECT_NEAR(scaled[q].position.y, a * unit[q].position.y, 1e-12 * a);
      EXPECT_EQ(scaled[q].stability, unit[q].stability);
    }
  }
}

TEST(ClassifyGain, Regimes) {
  EXPECT_EQ(classify_gain(20.0).regime, Regime::global);
  EXPECT_EQ(classify_gain(1.5000001).regime, Regime::global);
  EXPECT_EQ(classify_gain(1.5).regime, Regime::almost_global);
  EXPECT_EQ(classify_gain(1.47).regime, Regime::almost_global);
  EXPECT_EQ(classify_gain(1.46).regime, Regime::bistable);
  EXPECT_EQ(classify_gain(0.6).regime, Regime::bistable);
  const GainRegime b = classify_gain(kBistableBoundary);
  EXPECT_TRUE(b.on_boundary);
  EXPECT_EQ(b.regime, Regime::almost_global);
  EXPECT_FALSE(classify_gain(1.47).on_boundary);
  EXPECT_THROW(classify_gain(0.0), std::invalid_argument);
  EXPECT_THROW(classify_gain(-1.0), std::invalid_argument);
  EXPECT_NEAR(kBistableBoundary, -2.0 + 2.0 * kSqrt3, 1e-16);
}

TEST(ClassifyGain, StabilityPatternMatchesRegime) {
  for (double k : {0.1, 0.6, 1.0, 1.4, kBistableBoundary, 1.47, 1.5, 2.0, 20.0}) {
    const auto eqs = enumerate_triangle_equilibria(1.0, k);
    EXPECT_TRUE(matches_regime(eqs, classify_gain(k).regime)) << "K=" << k;
  }
}

TEST(HFunction, Checkpoints) {
  EXPECT_EQ(h_below(0.0), 2.0);
  EXPECT_EQ(h_below(1.5), 0.5 - 0.75);
  EXPECT_EQ(h_below(1.5), -0.25);
  EXPECT_NEAR(h_below(kBistableBoundary), 0.0, 1e-12);
  EXPECT_NEAR(h_below(0.6), 1.3618950038622251, 1e-15);
}

TEST(ClassifyStability, Rules) {
  const double tol = 1e-9;
  EXPECT_EQ(classify_stability(std::vector<double>{1.0, 2.0}, tol), Stability::stable);
  EXPECT_EQ(classify_stability(std::vector<double>{-1.0, 2.0}, tol), Stability::unstable);
  EXPECT_EQ(classify_stability(std::vector<double>{0.5e-9, 2.0}, tol), Stability::degenerate);
  EXPECT_EQ(classify_stability(std::vector<double>{-1.0, 0.0}, tol), Stability::unstable);
}

TEST(NumericOracle, HighGain) {
  const auto roots = find_equilibria_numeric(1.0, 20.0, SeedGrid::spanning(1.0));
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0].x, 0.0, 1e-9);
  EXPECT_NEAR(roots[0].y, kSqrt3, 1e-9);
}

TEST(NumericOracle, LowGainMatchesClosedForm) {
  const auto roots = find_equilibria_numeric(1.0, 0.6, SeedGrid::spanning(1.0));
  EXPECT_TRUE(same_point_set(enumerate_triangle_equilibria(1.0, 0.6), roots, 1e-6));
  for (Position p : roots) EXPECT_LT(norm(pinned_triangle_field(1.0, 0.6, p)), 1e-10);
}

TEST(NumericOracleProperty, AgreesWithClosedFormForRandomGains) {
  Gen g(51);
  for (int t = 0; t < 50; ++t) {
    const double k = g.uniform(1e-3, 5.0);
    const auto closed = enumerate_triangle_equilibria(1.0, k);
    const auto roots = find_equilibria_numeric(1.0, k, SeedGrid::spanning(1.0));
    EXPECT_TRUE(same_point_set(closed, roots, 1e-6)) << "K=" << k << " closed " << closed.size() << " numeric "
                                                     << roots.size();
    for (Position p : roots) EXPECT_LT(norm(pinned_triangle_field(1.0, k, p)), 1e-10);
  }
}

TEST(NumericOracleProperty, CircleFamilyExistenceFlipsAtBoundary) {
  auto off_axis = [](double k) {
    const auto roots = find_equilibria_numeric(1.0, k, SeedGrid::spanning(1.0));
    return std::count_if(roots.begin(), roots.end(), [](Position p) { return std::abs(p.x) > 1e-6; });
  };
  EXPECT_EQ(off_axis(kBistableBoundary - 1e-3), 2);
  EXPECT_EQ(off_axis(kBistableBoundary + 1e-3), 0);
}

TEST(EquilibriumProperty, EigenvaluesMatchFiniteDifferenceHessian) {
  const double step = 1e-5;
  Gen g(52);
  std::vector<double> gains = {0.6, 1.0, 1.5, 2.0, 20.0};
  for (int t = 0; t < 20; ++t) gains.push_back(g.uniform(0.05, 5.0));
  for (double k : gains) {
    const TrianglePotentialSpec s{2.0, kSqrt3, k};
    auto grad = [&](Position q) { return triangle_gradient(s, {-1, 0}, {1, 0}, q, TriangleVertex::k); };
    for (const auto& e : enumerate_triangle_equilibria(1.0, k)) {
      const Position p = e.position;
      const PlanarVector gx = (1.0 / (2 * step)) * (grad({p.x + step, p.y}) - grad({p.x - step, p.y}));
      const PlanarVector gy = (1.0 / (2 * step)) * (grad({p.x, p.y + step}) - grad({p.x, p.y - step}));
      Eigen::Matrix2d h;
      h << gx.dx, 0.5 * (gx.dy + gy.dx), 0.5 * (gx.dy + gy.dx), gy.dy;
      const auto fd = sorted_eigenvalues(h);
      EXPECT_NEAR(fd[0], e.eigenvalues[0], 1e-5) << "K=" << k << " " << to_string(e.family);
      EXPECT_NEAR(fd[1], e.eigenvalues[1], 1e-5) << "K=" << k << " " << to_string(e.family);
    }
  }
}

// Stable equilibria attract a 1e-3 perturbation; points with a negative
// eigenvalue are left along its eigenvector.
TEST(EquilibriumProperty, SimulationCrossCheck) {
  const DesiredFormation df(builtin::triangle_graph(), 2.0);
  const HierarchyPlan plan = build_hierarchy(df.graph(), {1, 2});
  Gen g(53);
  IntegratorConfig cfg;
  cfg.t_max = 200.0;
  cfg.record_stride = 1000;
  for (double k : {0.3, 0.6, 1.0, 1.4, 1.5, 2.0, 20.0}) {
    for (const auto& e : enumerate_triangle_equilibria(1.0, k)) {
      if (e.stability == Stability::stable) {
        const double angle = g.uniform(0, 2 * std::numbers::pi);
        const Position start = e.position + 1e-3 * PlanarVector{std::cos(angle), std::sin(angle)};
        const auto r = simulate(plan, df, {k}, builtin::pinned_triangle(2.0, start), cfg);
        EXPECT_EQ(r.termination, Termination::converged) << "K=" << k;
        EXPECT_LT(distance(r.trajectory.final_state()[2], e.position), 1e-6) << "K=" << k << " " << to_string(e.family);
      } else if (e.eigenvalues[0] < 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(pinned_triangle_hessian({2.0, kSqrt3, k}, e.position));
        const Eigen::Vector2d v = es.eigenvectors().col(0);
        for (double sign : {1.0, -1.0}) {
          const Position start = e.position + (sign * 1e-3) * PlanarVector{v(0), v(1)};
          const auto r = simulate(plan, df, {k}, builtin::pinned_triangle(2.0, start), cfg);
          EXPECT_GT(distance(r.trajectory.final_state()[2], e.position), 1e-2)
              << "K=" << k << " " << to_string(e.family) << " sign " << sign;
        }
      }
    }
  }
}

TEST(PinnedFrame, MapsBaseToAxis) {
  Gen g(54);
  for (int t = 0; t < 200; ++t) {
    const RigidMotion m = g.motion();
    const Position free = g.position(3.0);
    const Position got = to_pinned_frame(m({-1, 0}), m({1, 0}), m(free));
    EXPECT_NEAR(got.x, free.x, 1e-10);
    EXPECT_NEAR(got.y, free.y, 1e-10);
  }
  EXPECT_THROW(to_pinned_frame({1, 1}, {1, 1}, {0, 0}), std::invalid_argument);
}

TEST(NearestEquilibrium, RespectsTolerance) {
  const auto eqs = enumerate_triangle_equilibria(1.0, 0.6);
  const auto q = nearest_equilibrium(eqs, {0.0, kSqrt3 + 5e-5}, 1e-4);
  ASSERT_TRUE(q);
  EXPECT_EQ(eqs[*q].family, EquilibriumFamily::apex_correct);
  EXPECT_FALSE(nearest_equilibrium(eqs, {0.0, kSqrt3 + 5e-4}, 1e-4));
}
