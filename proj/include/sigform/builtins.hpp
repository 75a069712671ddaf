#pragma once

// Named graphs and initial layouts used by scenarios and tests.

#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigform/formation_graph.hpp"
#include "sigform/potentials.hpp"

namespace sigform::builtin {

/// Two agents, one edge.
inline FormationGraph pair_graph() { return FormationGraph(2, {{1, 2}}, {}); }

/// Single counterclockwise triangle (1, 2, 3).
inline FormationGraph triangle_graph() { return FormationGraph(3, {{1, 2}, {1, 3}, {2, 3}}, {{1, 2, 3}}); }

inline FormationGraph ten_agent_graph() { return build_example_graph(); }

inline FormationGraph graph_by_name(const std::string& name) {
  if (name == "paper-10") return ten_agent_graph();
  if (name == "triangle") return triangle_graph();
  if (name == "pair") return pair_graph();
  throw std::invalid_argument("unknown builtin graph '" + name + "'");
}

/// Target lattice of paper-10 with agent 1 at the origin and agent 2 on the
/// positive x axis; every clique counterclockwise.
inline std::vector<Position> ten_agent_target(double d_star) {
  const double h = std::numbers::sqrt3 / 2.0 * d_star;
  const double d = d_star;
  return {{0, 0},        {d, 0},         {d / 2, h},     {2 * d, 0},     {1.5 * d, h},
          {d, 2 * h},    {3 * d, 0},     {2.5 * d, h},   {2 * d, 2 * h}, {1.5 * d, 3 * h}};
}

/// Left column holds the first ceil(n/2) agents top to bottom, the right
/// column the rest; unit vertical spacing, columns 3 d_star apart.
inline std::vector<Position> two_columns(int n, double d_star) {
  const int left = (n + 1) / 2;
  std::vector<Position> out;
  for (int a = 0; a < n; ++a) {
    const bool in_left = a < left;
    const int row = in_left ? a : a - left;
    const int rows = in_left ? left : n - left;
    out.push_back({in_left ? 0.0 : 3.0 * d_star, static_cast<double>(rows - 1 - row)});
  }
  return out;
}

struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 10.0;
  double y_max = 10.0;
  friend bool operator==(const Box&, const Box&) = default;
};

/// Uniform random positions in `box`; fully determined by `seed`.
inline std::vector<Position> random_layout(int n, const Box& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.x_min, box.x_max), uy(box.y_min, box.y_max);
  std::vector<Position> out;
  for (int a = 0; a < n; ++a) {
    const double x = ux(rng);
    out.push_back({x, uy(rng)});
  }
  return out;
}

/// Pinned triangle: agents 1, 2 at (-a, 0), (a, 0), agent 3 at `free_agent`.
inline std::vector<Position> pinned_triangle(double d_star, Position free_agent) {
  return {pinned_left(d_star), pinned_right(d_star), free_agent};
}

/// Pinned pair: agent 1 at the origin, agent 2 at `free_agent`.
inline std::vector<Position> pinned_pair(Position free_agent) { return {{0.0, 0.0}, free_agent}; }

}  // namespace sigform::builtin
