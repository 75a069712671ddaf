#pragma once

// Scenario files: one YAML document per run, keys mirror ScenarioConfig.
//
//   graph:
//     builtin: paper-10            # or: agents / edges / cliques / orientation
//   root_edge: [1, 2]
//   d_star: 2.0
//   k_gain: 20.0
//   kappa: 1.0
//   initial:
//     layout: two-columns          # explicit | two-columns | random
//     positions: [[x, y], ...]     # explicit only
//     seed: 7                      # random only
//     box: [x_min, y_min, x_max, y_max]
//   integrator:
//     method: rk4                  # rk4 | euler
//     dt: 0.001
//     t_max: 50
//     grad_norm_tol: 1e-9
//     record_stride: 10
//     divergence_bound: 1e6
//   output:
//     dir: out

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "sigform/builtins.hpp"
#include "sigform/dynamics.hpp"
#include "sigform/formation_graph.hpp"
#include "sigform/hierarchy.hpp"

namespace sigform {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LayoutKind { explicit_positions, two_columns, random };

inline const char* to_string(LayoutKind k) {
  switch (k) {
    case LayoutKind::explicit_positions: return "explicit";
    case LayoutKind::two_columns: return "two-columns";
    case LayoutKind::random: return "random";
  }
  return "?";
}

struct GraphSpec {
  std::string builtin;
  int agents = 0;
  std::vector<Edge> edges;
  std::vector<Clique> cliques;
  std::vector<int> orientation;
  friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

struct InitialLayout {
  LayoutKind kind = LayoutKind::two_columns;
  std::vector<Position> positions;
  std::uint64_t seed = 0;
  builtin::Box box{};
  friend bool operator==(const InitialLayout&, const InitialLayout&) = default;
};

struct ScenarioConfig {
  GraphSpec graph;
  Edge root_edge{1, 2};
  double d_star = 1.0;
  double k_gain = 20.0;
  double kappa = 1.0;
  InitialLayout initial;
  IntegratorConfig integrator;
  std::string output_dir = "out";
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Everything a run needs, built from a validated config.
struct Scenario {
  DesiredFormation formation;
  HierarchyPlan plan;
  ControlGains gains;
  std::vector<Position> initial;
  IntegratorConfig integrator;
};

namespace detail {

inline std::string where(const YAML::Node& node, const std::string& field) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return "field '" + field + "'";
  return "line " + std::to_string(m.line + 1) + ", field '" + field + "'";
}

template <typename T>
T read(const YAML::Node& parent, const std::string& key, const std::string& path) {
  const YAML::Node node = parent[key];
  if (!node) throw ConfigError(where(parent, path) + ": missing");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(node, path) + ": cannot read value '" + (node.IsScalar() ? node.Scalar() : "<node>") + "'");
  }
}

template <typename T>
T read_or(const YAML::Node& parent, const std::string& key, const std::string& path, T fallback) {
  if (!parent || !parent[key]) return fallback;
  return read<T>(parent, key, path);
}

inline Position read_position(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence() || node.size() != 2) throw ConfigError(where(node, path) + ": expected [x, y]");
  try {
    return Position::checked(node[0].as<double>(), node[1].as<double>());
  } catch (const YAML::Exception&) {
    throw ConfigError(where(node, path) + ": coordinates must be numbers");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where(node, path) + ": " + e.what());
  }
}

inline std::vector<int> read_ints(const YAML::Node& node, std::size_t count, const std::string& path) {
  if (!node.IsSequence() || (count != 0 && node.size() != count))
    throw ConfigError(where(node, path) + ": expected a list of " + std::to_string(count) + " integers");
  std::vector<int> out;
  try {
    for (const auto& v : node) out.push_back(v.as<int>());
  } catch (const YAML::Exception&) {
    throw ConfigError(where(node, path) + ": entries must be integers");
  }
  return out;
}

inline void require_positive(const YAML::Node& parent, const std::string& key, const std::string& path, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where(parent[key] ? parent[key] : parent, path) + ": must be > 0");
}

}  // namespace detail

/// Parses and checks field-level constraints. Throws ConfigError with line
/// and field context.
inline ScenarioConfig parse_scenario(const std::string& text) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("scenario must be a YAML mapping");

  ScenarioConfig cfg;
  const YAML::Node graph = root["graph"];
  if (!graph || !graph.IsMap()) throw ConfigError(where(root, "graph") + ": missing or not a mapping");
  if (graph["builtin"]) {
    cfg.graph.builtin = read<std::string>(graph, "builtin", "graph.builtin");
  } else {
    cfg.graph.agents = read<int>(graph, "agents", "graph.agents");
    const YAML::Node edges = graph["edges"];
    if (!edges || !edges.IsSequence()) throw ConfigError(where(graph, "graph.edges") + ": missing or not a list");
    for (const auto& e : edges) {
      const auto v = read_ints(e, 2, "graph.edges");
      cfg.graph.edges.push_back({v[0], v[1]});
    }
    if (const YAML::Node cliques = graph["cliques"]) {
      if (!cliques.IsSequence()) throw ConfigError(where(cliques, "graph.cliques") + ": not a list");
      for (const auto& c : cliques) {
        const auto v = read_ints(c, 3, "graph.cliques");
        cfg.graph.cliques.push_back({v[0], v[1], v[2]});
      }
    }
  }
  if (const YAML::Node o = graph["orientation"]) cfg.graph.orientation = read_ints(o, 0, "graph.orientation");

  if (const YAML::Node r = root["root_edge"]) {
    const auto v = read_ints(r, 2, "root_edge");
    cfg.root_edge = {v[0], v[1]};
  }
  cfg.d_star = read<double>(root, "d_star", "d_star");
  require_positive(root, "d_star", "d_star", cfg.d_star);
  cfg.k_gain = read<double>(root, "k_gain", "k_gain");
  require_positive(root, "k_gain", "k_gain", cfg.k_gain);
  cfg.kappa = read_or<double>(root, "kappa", "kappa", 1.0);
  require_positive(root, "kappa", "kappa", cfg.kappa);

  const YAML::Node init = root["initial"];
  if (!init || !init.IsMap()) throw ConfigError(where(root, "initial") + ": missing or not a mapping");
  const auto layout = read<std::string>(init, "layout", "initial.layout");
  if (layout == "explicit") {
    cfg.initial.kind = LayoutKind::explicit_positions;
    const YAML::Node ps = init["positions"];
    if (!ps || !ps.IsSequence()) throw ConfigError(where(init, "initial.positions") + ": missing or not a list");
    for (const auto& p : ps) cfg.initial.positions.push_back(read_position(p, "initial.positions"));
  } else if (layout == "two-columns") {
    cfg.initial.kind = LayoutKind::two_columns;
  } else if (layout == "random") {
    cfg.initial.kind = LayoutKind::random;
    cfg.initial.seed = read<std::uint64_t>(init, "seed", "initial.seed");
    if (const YAML::Node b = init["box"]) {
      if (!b.IsSequence() || b.size() != 4) throw ConfigError(where(b, "initial.box") + ": expected 4 numbers");
      try {
        cfg.initial.box = {b[0].as<double>(), b[1].as<double>(), b[2].as<double>(), b[3].as<double>()};
      } catch (const YAML::Exception&) {
        throw ConfigError(where(b, "initial.box") + ": entries must be numbers");
      }
      if (!(cfg.initial.box.x_min < cfg.initial.box.x_max) || !(cfg.initial.box.y_min < cfg.initial.box.y_max))
        throw ConfigError(where(b, "initial.box") + ": empty box");
    }
  } else {
    throw ConfigError(where(init["layout"], "initial.layout") + ": unknown layout '" + layout + "'");
  }

  if (const YAML::Node in = root["integrator"]) {
    IntegratorConfig& ic = cfg.integrator;
    const auto method = read_or<std::string>(in, "method", "integrator.method", "rk4");
    if (method == "rk4") {
      ic.method = Method::rk4;
    } else if (method == "euler") {
      ic.method = Method::euler;
    } else {
      throw ConfigError(where(in["method"], "integrator.method") + ": unknown method '" + method + "'");
    }
    ic.dt = read_or<double>(in, "dt", "integrator.dt", ic.dt);
    ic.t_max = read_or<double>(in, "t_max", "integrator.t_max", ic.t_max);
    ic.grad_norm_tol = read_or<double>(in, "grad_norm_tol", "integrator.grad_norm_tol", ic.grad_norm_tol);
    ic.record_stride = read_or<int>(in, "record_stride", "integrator.record_stride", ic.record_stride);
    ic.divergence_bound = read_or<double>(in, "divergence_bound", "integrator.divergence_bound", ic.divergence_bound);
    try {
      ic.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where(in, "integrator") + ": " + e.what());
    }
  }
  if (const YAML::Node out = root["output"]) cfg.output_dir = read_or<std::string>(out, "dir", "output.dir", cfg.output_dir);
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

/// Best-effort read of output.dir from a file that may fail validation, so
/// the manifest of a rejected run lands next to where its artifacts would.
inline std::optional<std::string> peek_output_dir(const std::string& path) {
  try {
    const YAML::Node root = YAML::LoadFile(path);
    if (root.IsMap() && root["output"] && root["output"]["dir"]) return root["output"]["dir"].as<std::string>();
  } catch (const YAML::Exception&) {
  }
  return std::nullopt;
}

inline void emit_position(YAML::Emitter& out, Position p) {
  out << YAML::Flow << YAML::BeginSeq << p.x << p.y << YAML::EndSeq;
}

inline void emit_scenario(YAML::Emitter& out, const ScenarioConfig& cfg) {
  out << YAML::BeginMap;
  out << YAML::Key << "graph" << YAML::Value << YAML::BeginMap;
  if (!cfg.graph.builtin.empty()) {
    out << YAML::Key << "builtin" << YAML::Value << cfg.graph.builtin;
  } else {
    out << YAML::Key << "agents" << YAML::Value << cfg.graph.agents;
    out << YAML::Key << "edges" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const Edge& e : cfg.graph.edges) out << YAML::Flow << YAML::BeginSeq << e.first << e.second << YAML::EndSeq;
    out << YAML::EndSeq;
    out << YAML::Key << "cliques" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const Clique& c : cfg.graph.cliques) out << YAML::Flow << YAML::BeginSeq << c.i << c.j << c.k << YAML::EndSeq;
    out << YAML::EndSeq;
  }
  if (!cfg.graph.orientation.empty())
    out << YAML::Key << "orientation" << YAML::Value << YAML::Flow << cfg.graph.orientation;
  out << YAML::EndMap;
  out << YAML::Key << "root_edge" << YAML::Value << YAML::Flow << YAML::BeginSeq << cfg.root_edge.first
      << cfg.root_edge.second << YAML::EndSeq;
  out << YAML::Key << "d_star" << YAML::Value << cfg.d_star;
  out << YAML::Key << "k_gain" << YAML::Value << cfg.k_gain;
  out << YAML::Key << "kappa" << YAML::Value << cfg.kappa;

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "layout" << YAML::Value << to_string(cfg.initial.kind);
  if (cfg.initial.kind == LayoutKind::explicit_positions) {
    out << YAML::Key << "positions" << YAML::Value << YAML::BeginSeq;
    for (Position p : cfg.initial.positions) emit_position(out, p);
    out << YAML::EndSeq;
  } else if (cfg.initial.kind == LayoutKind::random) {
    const builtin::Box& b = cfg.initial.box;
    out << YAML::Key << "seed" << YAML::Value << cfg.initial.seed;
    out << YAML::Key << "box" << YAML::Value << YAML::Flow << YAML::BeginSeq << b.x_min << b.y_min << b.x_max << b.y_max
        << YAML::EndSeq;
  }
  out << YAML::EndMap;

  const IntegratorConfig& ic = cfg.integrator;
  out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << to_string(ic.method);
  out << YAML::Key << "dt" << YAML::Value << ic.dt;
  out << YAML::Key << "t_max" << YAML::Value << ic.t_max;
  out << YAML::Key << "grad_norm_tol" << YAML::Value << ic.grad_norm_tol;
  out << YAML::Key << "record_stride" << YAML::Value << ic.record_stride;
  out << YAML::Key << "divergence_bound" << YAML::Value << ic.divergence_bound;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << cfg.output_dir;
  out << YAML::EndMap;
  out << YAML::EndMap;
}

inline std::string serialize_scenario(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  emit_scenario(out, cfg);
  return std::string(out.c_str()) + "\n";
}

/// Builds graph, hierarchy and initial state; cross-field problems (unknown
/// agents, root edge, position count) are reported as ConfigError.
inline Scenario build_scenario(const ScenarioConfig& cfg) {
  try {
    FormationGraph graph = cfg.graph.builtin.empty()
                               ? (cfg.graph.cliques.empty()
                                      ? FormationGraph::from_edges(cfg.graph.agents, cfg.graph.edges)
                                      : FormationGraph(cfg.graph.agents, cfg.graph.edges, cfg.graph.cliques))
                               : builtin::graph_by_name(cfg.graph.builtin);
    const int n = graph.agent_count();
    if (const LamanCheck check = validate_triangulated_laman(graph); !check)
      throw ConfigError("graph: " + check.violation);
    DesiredFormation formation(std::move(graph), cfg.d_star, cfg.graph.orientation);
    HierarchyPlan plan = build_hierarchy(formation.graph(), cfg.root_edge);

    std::vector<Position> init;
    switch (cfg.initial.kind) {
      case LayoutKind::explicit_positions:
        init = cfg.initial.positions;
        if (static_cast<int>(init.size()) != n)
          throw ConfigError("initial.positions: expected " + std::to_string(n) + " positions, got " +
                            std::to_string(init.size()));
        break;
      case LayoutKind::two_columns: init = builtin::two_columns(n, cfg.d_star); break;
      case LayoutKind::random: init = builtin::random_layout(n, cfg.initial.box, cfg.initial.seed); break;
    }
    ControlGains gains{cfg.k_gain, cfg.kappa};
    gains.validate();
    cfg.integrator.validate();
    return Scenario{std::move(formation), std::move(plan), gains, std::move(init), cfg.integrator};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace sigform
