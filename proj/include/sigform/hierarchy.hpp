#pragma once

// Per-agent potential assignment and the resulting cascade control law
// u_i = -kappa * dV_i/dp_i.

#include <algorithm>
#include <array>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigform/formation_graph.hpp"
#include "sigform/potentials.hpp"

namespace sigform {

enum class AssignmentKind { stationary, pair, triangle };

inline const char* to_string(AssignmentKind k) {
  switch (k) {
    case AssignmentKind::stationary: return "stationary";
    case AssignmentKind::pair: return "pair";
    case AssignmentKind::triangle: return "triangle";
  }
  return "?";
}

/// What agent `agent` descends on.
///   stationary: V = 0
///   pair:       V = V_(anchor, agent)
///   triangle:   V = V_(base1, base2, agent); the triple is ordered so that its
///               stored clique orientation is positive.
struct PotentialAssignment {
  AgentId agent = 0;
  AssignmentKind kind = AssignmentKind::stationary;
  AgentId anchor = 0;
  AgentId base1 = 0;
  AgentId base2 = 0;
  std::size_t clique = 0;
  int layer = 1;

  std::vector<AgentId> dependencies() const {
    switch (kind) {
      case AssignmentKind::stationary: return {};
      case AssignmentKind::pair: return {anchor};
      case AssignmentKind::triangle: return {base1, base2};
    }
    return {};
  }
  friend bool operator==(const PotentialAssignment&, const PotentialAssignment&) = default;
};

class HierarchyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class HierarchyPlan {
 public:
  HierarchyPlan(std::vector<PotentialAssignment> by_agent, std::vector<AgentId> order)
      : assignments_(std::move(by_agent)), order_(std::move(order)) {}

  std::size_t agent_count() const { return assignments_.size(); }
  const PotentialAssignment& assignment(AgentId a) const { return assignments_.at(static_cast<std::size_t>(a - 1)); }
  const std::vector<PotentialAssignment>& assignments() const { return assignments_; }
  /// Topological order: every agent appears after the agents it depends on.
  const std::vector<AgentId>& order() const { return order_; }

  int layer_count() const {
    int m = 0;
    for (const auto& a : assignments_) m = std::max(m, a.layer);
    return m;
  }
  std::vector<std::vector<AgentId>> layers() const {
    std::vector<std::vector<AgentId>> out(static_cast<std::size_t>(layer_count()));
    for (const auto& a : assignments_) out[static_cast<std::size_t>(a.layer - 1)].push_back(a.agent);
    return out;
  }

 private:
  std::vector<PotentialAssignment> assignments_;
  std::vector<AgentId> order_;
};

/// Assigns root.first as the stationary agent, root.second as the pair agent,
/// and attaches every other agent to two already-assigned adjacent agents,
/// always taking the lowest-index agent that can attach next. When several
/// base pairs are available the one with the smallest sorted (layer, id)
/// pairs wins.
///
/// Layers: 1 for the stationary agent, 2 for the pair agent, otherwise hop
/// distance from the stationary agent plus two (raised if needed so no base
/// sits in a later layer). Layers are labels; order() carries the dependency
/// structure.
inline HierarchyPlan build_hierarchy(const FormationGraph& g, Edge root) {
  const int n = g.agent_count();
  if (!g.adjacent(root.first, root.second))
    throw HierarchyError("root edge (" + std::to_string(root.first) + "," + std::to_string(root.second) +
                         ") is not an edge of the graph");

  std::vector<int> hops(static_cast<std::size_t>(n) + 1, std::numeric_limits<int>::max());
  {
    std::queue<AgentId> frontier;
    hops[root.first] = 0;
    frontier.push(root.first);
    while (!frontier.empty()) {
      const AgentId u = frontier.front();
      frontier.pop();
      for (AgentId v : g.neighbors(u))
        if (hops[v] == std::numeric_limits<int>::max()) {
          hops[v] = hops[u] + 1;
          frontier.push(v);
        }
    }
  }

  std::vector<PotentialAssignment> by_agent(static_cast<std::size_t>(n));
  std::vector<char> placed(static_cast<std::size_t>(n) + 1, 0);
  std::vector<AgentId> order;
  auto slot = [&](AgentId a) -> PotentialAssignment& { return by_agent[static_cast<std::size_t>(a - 1)]; };

  slot(root.first) = {root.first, AssignmentKind::stationary, 0, 0, 0, 0, 1};
  slot(root.second) = {root.second, AssignmentKind::pair, root.first, 0, 0, 0, 2};
  placed[root.first] = placed[root.second] = 1;
  order = {root.first, root.second};

  using Key = std::array<std::pair<int, AgentId>, 2>;
  while (static_cast<int>(order.size()) < n) {
    bool attached = false;
    for (AgentId v = 1; v <= n && !attached; ++v) {
      if (placed[v]) continue;
      std::vector<AgentId> earlier;
      for (AgentId u : g.neighbors(v))
        if (placed[u]) earlier.push_back(u);

      std::optional<Key> best;
      AgentId b1 = 0, b2 = 0;
      for (std::size_t x = 0; x < earlier.size(); ++x)
        for (std::size_t y = x + 1; y < earlier.size(); ++y) {
          const AgentId p = earlier[x], q = earlier[y];
          if (!g.adjacent(p, q)) continue;
          Key key{std::pair{slot(p).layer, p}, std::pair{slot(q).layer, q}};
          std::sort(key.begin(), key.end());
          if (!best || key < *best) {
            best = key;
            b1 = p;
            b2 = q;
          }
        }
      if (!best) continue;

      const std::size_t clique = *g.find_clique(b1, b2, v);
      if (permutation_parity(g.cliques()[clique], b1, b2, v) < 0) std::swap(b1, b2);
      const int layer = std::max({hops[v] + 2, slot(b1).layer, slot(b2).layer});
      slot(v) = {v, AssignmentKind::triangle, 0, b1, b2, clique, layer};
      placed[v] = 1;
      order.push_back(v);
      attached = true;
    }
    if (!attached) {
      AgentId stuck = 1;
      while (placed[stuck]) ++stuck;
      throw HierarchyError("agent " + std::to_string(stuck) + " has no pair of adjacent, already-assigned agents");
    }
  }
  return HierarchyPlan(std::move(by_agent), std::move(order));
}

struct ControlGains {
  double area_gain = 1.0;  // K
  double rate_gain = 1.0;  // kappa

  void validate() const {
    if (!(area_gain > 0.0) || !std::isfinite(area_gain)) throw std::invalid_argument("area gain K must be > 0");
    if (!(rate_gain > 0.0) || !std::isfinite(rate_gain)) throw std::invalid_argument("rate gain kappa must be > 0");
  }
};

/// Potential spec for a triangle-kind assignment, with Z* taken in the
/// assignment's (base1, base2, agent) order.
inline TrianglePotentialSpec triangle_spec_for(const PotentialAssignment& a, const DesiredFormation& df,
                                               double area_gain) {
  const Clique& c = df.graph().cliques()[a.clique];
  const double z_star = permutation_parity(c, a.base1, a.base2, a.agent) * df.desired_area(a.clique);
  return {df.d_star(), z_star, area_gain};
}

/// V_i for one agent.
inline double agent_potential(const HierarchyPlan& plan, const DesiredFormation& df, const ControlGains& gains,
                              std::span<const Position> positions, AgentId agent) {
  const PotentialAssignment& a = plan.assignment(agent);
  switch (a.kind) {
    case AssignmentKind::stationary: return 0.0;
    case AssignmentKind::pair:
      return pair_potential({df.d_star()}, at(positions, a.anchor), at(positions, agent));
    case AssignmentKind::triangle:
      return triangle_potential(triangle_spec_for(a, df, gains.area_gain), at(positions, a.base1),
                                at(positions, a.base2), at(positions, agent));
  }
  return 0.0;
}

/// Sum of all V_i.
inline double total_potential(const HierarchyPlan& plan, const DesiredFormation& df, const ControlGains& gains,
                              std::span<const Position> positions) {
  double sum = 0.0;
  for (AgentId a = 1; a <= static_cast<AgentId>(plan.agent_count()); ++a)
    sum += agent_potential(plan, df, gains, positions, a);
  return sum;
}

/// u_i = -kappa * dV_i/dp_i for every agent, written into `out`.
inline void control_field(const HierarchyPlan& plan, const DesiredFormation& df, const ControlGains& gains,
                          std::span<const Position> positions, std::span<PlanarVector> out) {
  if (positions.size() != plan.agent_count() || out.size() != plan.agent_count())
    throw std::invalid_argument("control_field: position count does not match the plan");
  const PairPotentialSpec pair{df.d_star()};
  for (const PotentialAssignment& a : plan.assignments()) {
    PlanarVector grad{};
    switch (a.kind) {
      case AssignmentKind::stationary: break;
      case AssignmentKind::pair:
        grad = pair_gradient(pair, at(positions, a.anchor), at(positions, a.agent), PairEnd::second);
        break;
      case AssignmentKind::triangle:
        grad = triangle_gradient(triangle_spec_for(a, df, gains.area_gain), at(positions, a.base1),
                                 at(positions, a.base2), at(positions, a.agent), TriangleVertex::k);
        break;
    }
    out[static_cast<std::size_t>(a.agent - 1)] = -gains.rate_gain * grad;
  }
}

inline std::vector<PlanarVector> control_field(const HierarchyPlan& plan, const DesiredFormation& df,
                                               const ControlGains& gains, std::span<const Position> positions) {
  std::vector<PlanarVector> out(positions.size());
  control_field(plan, df, gains, positions, out);
  return out;
}

}  // namespace sigform
