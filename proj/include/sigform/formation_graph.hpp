#pragma once

// Interaction graph, clique set and desired equilateral formation.
//
// Agents are identified 1..n throughout the public API; position vectors are
// indexed by (id - 1).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigform/geometry.hpp"

namespace sigform {

using AgentId = int;

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unordered pair, stored with first < second.
struct Edge {
  AgentId first = 0;
  AgentId second = 0;

  static constexpr Edge make(AgentId a, AgentId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// Ordered triple; the order fixes which orientation counts as positive.
struct Clique {
  AgentId i = 0;
  AgentId j = 0;
  AgentId k = 0;

  constexpr std::array<AgentId, 3> members() const { return {i, j, k}; }
  std::array<AgentId, 3> sorted() const {
    auto m = members();
    std::sort(m.begin(), m.end());
    return m;
  }
  constexpr bool contains(AgentId a) const { return a == i || a == j || a == k; }
  friend constexpr bool operator==(const Clique&, const Clique&) = default;
};

inline std::string to_string(const Clique& c) {
  return "(" + std::to_string(c.i) + "," + std::to_string(c.j) + "," + std::to_string(c.k) + ")";
}

/// +1 if (a, b, c) is a cyclic rotation of the clique's stored order, -1 if it
/// is a rotation of the reversed order, 0 if it is not a permutation at all.
inline int permutation_parity(const Clique& c, AgentId a, AgentId b, AgentId d) {
  const std::array<AgentId, 3> m = c.members();
  for (int s = 0; s < 3; ++s) {
    if (m[s] != a) continue;
    if (m[(s + 1) % 3] == b && m[(s + 2) % 3] == d) return 1;
    if (m[(s + 2) % 3] == b && m[(s + 1) % 3] == d) return -1;
  }
  return 0;
}

class FormationGraph {
 public:
  /// Validates ids, edge uniqueness and that `cliques` lists every triangle of
  /// the graph exactly once. Throws GraphError on any violation.
  FormationGraph(int agent_count, std::vector<Edge> edges, std::vector<Clique> cliques)
      : n_(agent_count), edges_(std::move(edges)), cliques_(std::move(cliques)) {
    build_adjacency();

    std::vector<std::array<AgentId, 3>> listed;
    for (const Clique& c : cliques_) {
      for (AgentId a : c.members()) check_id(a, "clique");
      if (c.i == c.j || c.j == c.k || c.i == c.k) throw GraphError("clique " + to_string(c) + " repeats an agent");
      if (!adjacent(c.i, c.j) || !adjacent(c.j, c.k) || !adjacent(c.i, c.k))
        throw GraphError("clique " + to_string(c) + " is missing an edge");
      listed.push_back(c.sorted());
    }
    std::sort(listed.begin(), listed.end());
    if (std::adjacent_find(listed.begin(), listed.end()) != listed.end())
      throw GraphError("a triangle is listed more than once in the clique set");
    for (const auto& t : enumerate_triangles())
      if (!std::binary_search(listed.begin(), listed.end(), t))
        throw GraphError("triangle " + to_string(Clique{t[0], t[1], t[2]}) + " is missing from the clique set");
  }

  /// Graph whose cliques are enumerated from the edges, each stored in
  /// ascending-id order.
  static FormationGraph from_edges(int agent_count, std::vector<Edge> edges) {
    FormationGraph g(agent_count, std::move(edges));
    for (const auto& t : g.enumerate_triangles()) g.cliques_.push_back({t[0], t[1], t[2]});
    return g;
  }

  int agent_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Clique>& cliques() const { return cliques_; }

  bool adjacent(AgentId a, AgentId b) const {
    if (a < 1 || b < 1 || a > n_ || b > n_) return false;
    return adjacency_[index(a, b)] != 0;
  }

  std::vector<AgentId> neighbors(AgentId a) const {
    std::vector<AgentId> out;
    for (AgentId b = 1; b <= n_; ++b)
      if (adjacent(a, b)) out.push_back(b);
    return out;
  }

  /// Index into cliques() of the clique over {a, b, c}, if any.
  std::optional<std::size_t> find_clique(AgentId a, AgentId b, AgentId c) const {
    for (std::size_t q = 0; q < cliques_.size(); ++q)
      if (permutation_parity(cliques_[q], a, b, c) != 0) return q;
    return std::nullopt;
  }

  /// All triangles of the edge set as ascending triples, sorted.
  std::vector<std::array<AgentId, 3>> enumerate_triangles() const {
    std::vector<std::array<AgentId, 3>> out;
    for (const Edge& e : edges_)
      for (AgentId c = e.second + 1; c <= n_; ++c)
        if (adjacent(e.first, c) && adjacent(e.second, c)) out.push_back({e.first, e.second, c});
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  FormationGraph(int agent_count, std::vector<Edge> edges) : n_(agent_count), edges_(std::move(edges)) {
    build_adjacency();
  }

  void build_adjacency() {
    if (n_ < 1) throw GraphError("agent count must be positive");
    adjacency_.assign(static_cast<std::size_t>(n_) * n_, 0);
    for (Edge& e : edges_) {
      check_id(e.first, "edge");
      check_id(e.second, "edge");
      if (e.first == e.second) throw GraphError("self-loop on agent " + std::to_string(e.first));
      e = Edge::make(e.first, e.second);
      if (adjacency_[index(e.first, e.second)])
        throw GraphError("duplicate edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ")");
      adjacency_[index(e.first, e.second)] = 1;
      adjacency_[index(e.second, e.first)] = 1;
    }
    std::sort(edges_.begin(), edges_.end());
  }

  std::size_t index(AgentId a, AgentId b) const {
    return static_cast<std::size_t>(a - 1) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b - 1);
  }
  void check_id(AgentId a, const char* where) const {
    if (a < 1 || a > n_)
      throw GraphError(std::string(where) + " references agent " + std::to_string(a) + " outside 1.." +
                       std::to_string(n_));
  }

  int n_;
  std::vector<Edge> edges_;
  std::vector<Clique> cliques_;
  std::vector<char> adjacency_;
};

/// Area of the equilateral triangle with side d.
inline double equilateral_area(double side) { return std::numbers::sqrt3 / 4.0 * side * side; }

/// Conditions (A)/(B): every edge has length d_star, every clique has signed
/// area sign * equilateral_area(d_star) in its stored orientation.
class DesiredFormation {
 public:
  DesiredFormation(FormationGraph graph, double d_star, std::vector<int> area_signs = {})
      : graph_(std::move(graph)), d_star_(d_star), signs_(std::move(area_signs)) {
    if (!(d_star_ > 0.0) || !std::isfinite(d_star_)) throw GraphError("desired distance must be finite and positive");
    if (signs_.empty()) signs_.assign(graph_.cliques().size(), 1);
    if (signs_.size() != graph_.cliques().size()) throw GraphError("one orientation sign is required per clique");
    for (int s : signs_)
      if (s != 1 && s != -1) throw GraphError("orientation signs must be +1 or -1");
  }

  const FormationGraph& graph() const { return graph_; }
  double d_star() const { return d_star_; }
  const std::vector<int>& area_signs() const { return signs_; }
  double desired_area(std::size_t clique) const { return signs_.at(clique) * equilateral_area(d_star_); }

 private:
  FormationGraph graph_;
  double d_star_;
  std::vector<int> signs_;
};

struct FormationErrors {
  double max_distance_error = 0.0;
  double max_area_error = 0.0;
};

inline Position at(std::span<const Position> positions, AgentId a) {
  return positions[static_cast<std::size_t>(a - 1)];
}

inline FormationErrors formation_errors(const DesiredFormation& df, std::span<const Position> positions) {
  if (positions.size() != static_cast<std::size_t>(df.graph().agent_count()))
    throw std::invalid_argument("position count does not match agent count");
  FormationErrors out;
  for (const Edge& e : df.graph().edges())
    out.max_distance_error =
        std::max(out.max_distance_error, std::abs(distance(at(positions, e.first), at(positions, e.second)) - df.d_star()));
  const auto& cliques = df.graph().cliques();
  for (std::size_t q = 0; q < cliques.size(); ++q) {
    const Clique& c = cliques[q];
    const double z = signed_area(at(positions, c.i), at(positions, c.j), at(positions, c.k));
    out.max_area_error = std::max(out.max_area_error, std::abs(z - df.desired_area(q)));
  }
  return out;
}

/// Number of cliques whose signed area has the opposite sign to the target.
inline int flipped_cliques(const DesiredFormation& df, std::span<const Position> positions) {
  int flipped = 0;
  const auto& cliques = df.graph().cliques();
  for (std::size_t q = 0; q < cliques.size(); ++q) {
    const Clique& c = cliques[q];
    const double z = signed_area(at(positions, c.i), at(positions, c.j), at(positions, c.k));
    if (z * df.area_signs()[q] <= 0.0) ++flipped;
  }
  return flipped;
}

struct LamanCheck {
  bool ok = false;
  /// Henneberg vertex order on success.
  std::vector<AgentId> ordering;
  /// Edges beyond 2n - 3 (non-zero for over-braced triangulations).
  int redundant_edges = 0;
  std::string violation;

  explicit operator bool() const { return ok; }
};

namespace detail {

// Greedy lowest-index attachment from a fixed start edge. Attachability only
// grows as vertices are added, so greedy is complete for a given start.
inline std::optional<AgentId> grow_from(const FormationGraph& g, Edge start, std::vector<AgentId>& order) {
  const int n = g.agent_count();
  std::vector<char> placed(static_cast<std::size_t>(n) + 1, 0);
  order = {start.first, start.second};
  placed[start.first] = placed[start.second] = 1;
  while (static_cast<int>(order.size()) < n) {
    AgentId next = 0;
    for (AgentId v = 1; v <= n && next == 0; ++v) {
      if (placed[v]) continue;
      std::vector<AgentId> earlier;
      for (AgentId u : g.neighbors(v))
        if (placed[u]) earlier.push_back(u);
      for (std::size_t x = 0; x < earlier.size() && next == 0; ++x)
        for (std::size_t y = x + 1; y < earlier.size(); ++y)
          if (g.adjacent(earlier[x], earlier[y])) {
            next = v;
            break;
          }
    }
    if (next == 0) {
      for (AgentId v = 1; v <= n; ++v)
        if (!placed[v]) return v;
    }
    placed[next] = 1;
    order.push_back(next);
  }
  return std::nullopt;
}

}  // namespace detail

/// Accepts iff the vertices admit a Henneberg order: the first two share an
/// edge and every later vertex has two adjacent, earlier neighbours (it closes
/// a triangle on attachment). Start edges are tried in ascending order.
inline LamanCheck validate_triangulated_laman(const FormationGraph& g) {
  LamanCheck result;
  const int n = g.agent_count();
  if (n == 1) {
    result.ok = true;
    result.ordering = {1};
    return result;
  }
  std::optional<AgentId> first_failure;
  for (const Edge& start : g.edges()) {
    std::vector<AgentId> order;
    const auto stuck = detail::grow_from(g, start, order);
    if (!stuck) {
      result.ok = true;
      result.ordering = std::move(order);
      result.redundant_edges = static_cast<int>(g.edges().size()) - (2 * n - 3);
      return result;
    }
    if (!first_failure) first_failure = stuck;
  }
  result.violation = first_failure ? "agent " + std::to_string(*first_failure) +
                                         " cannot be attached to two adjacent earlier agents"
                                   : "graph has no edges";
  return result;
}

/// Ten-agent triangulated graph with nine equilateral cliques. Orientations
/// are the ones that are counterclockwise in the target lattice.
inline FormationGraph build_example_graph() {
  std::vector<Clique> cliques = {{1, 2, 3}, {3, 2, 5}, {5, 2, 4}, {3, 5, 6}, {8, 4, 7},
                                 {5, 4, 8}, {5, 8, 9}, {6, 5, 9}, {6, 9, 10}};
  std::vector<Edge> edges;
  for (const Clique& c : cliques)
    for (Edge e : {Edge::make(c.i, c.j), Edge::make(c.j, c.k), Edge::make(c.i, c.k)})
      if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
  return FormationGraph(10, std::move(edges), std::move(cliques));
}

}  // namespace sigform
