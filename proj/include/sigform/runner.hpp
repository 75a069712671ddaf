#pragma once

// Subcommand implementations behind the CLI: simulate, analyze, basin,
// sweep-gain. Each returns the process exit code and writes its artifacts
// under an output directory.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "sigform/analysis.hpp"
#include "sigform/dynamics.hpp"
#include "sigform/scenario.hpp"

namespace sigform {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int runtime_failure = 1;
inline constexpr int timeout = 2;
inline constexpr int diverged = 3;
inline constexpr int config_error = 64;
}  // namespace exit_code

inline int exit_code_for(Termination t) {
  switch (t) {
    case Termination::converged: return exit_code::ok;
    case Termination::timeout: return exit_code::timeout;
    case Termination::diverged: return exit_code::diverged;
  }
  return exit_code::runtime_failure;
}

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// CSV writers

/// t, x_1, y_1, ..., x_n, y_n, max_dist_err, max_area_err, max_u_norm
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x_" << i << ",y_" << i;
  out << ",max_dist_err,max_area_err,max_u_norm\n";
  for (std::size_t s = 0; s < traj.size(); ++s) {
    out << format_double(traj.times[s]);
    for (Position p : traj.states[s]) out << ',' << format_double(p.x) << ',' << format_double(p.y);
    const SampleMetrics& m = traj.metrics[s];
    out << ',' << format_double(m.max_distance_error) << ',' << format_double(m.max_area_error) << ','
        << format_double(m.max_control_norm) << '\n';
  }
}

/// t, max_dist_err, max_area_err, max_u_norm, total_potential
inline void write_metrics_csv(std::ostream& out, const Trajectory& traj, const HierarchyPlan& plan,
                              const DesiredFormation& df, const ControlGains& gains) {
  out << "t,max_dist_err,max_area_err,max_u_norm,total_potential\n";
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const SampleMetrics& m = traj.metrics[s];
    out << format_double(traj.times[s]) << ',' << format_double(m.max_distance_error) << ','
        << format_double(m.max_area_error) << ',' << format_double(m.max_control_norm) << ','
        << format_double(total_potential(plan, df, gains, traj.states[s])) << '\n';
  }
}

inline void write_basin_csv(std::ostream& out, const std::vector<BasinCell>& cells) {
  if (cells.empty()) return;
  out << "cell,x0,y0,x_end,y_end,termination,label,family,error\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const BasinCell& b = cells[c];
    std::string err = b.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    out << c << ',' << format_double(b.start.x) << ',' << format_double(b.start.y) << ',' << format_double(b.terminal.x)
        << ',' << format_double(b.terminal.y) << ',' << to_string(b.termination) << ',' << to_string(b.label) << ','
        << (b.family ? to_string(*b.family) : "") << ',' << err << '\n';
  }
}

// ---------------------------------------------------------------------------
// Structured-text reports

inline void emit_equilibrium(YAML::Emitter& out, const Equilibrium& e) {
  out << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << to_string(e.family);
  out << YAML::Key << "position" << YAML::Value;
  emit_position(out, e.position);
  out << YAML::Key << "eigenvalues" << YAML::Value << YAML::Flow << e.eigenvalues;
  out << YAML::Key << "stability" << YAML::Value << to_string(e.stability);
  out << YAML::Key << "multiplicity" << YAML::Value << e.multiplicity;
  out << YAML::Key << "in_target_set" << YAML::Value << e.in_target_set();
  out << YAML::EndMap;
}

struct AnalysisRow {
  double k_gain = 0.0;
  GainRegime regime;
  std::vector<Equilibrium> equilibria;

  int stable_count() const {
    int c = 0;
    for (const auto& e : equilibria) c += e.stability == Stability::stable;
    return c;
  }
  int counted_with_multiplicity() const {
    int c = 0;
    for (const auto& e : equilibria) c += e.multiplicity;
    return c;
  }
};

inline AnalysisRow analyze_gain(double a, double k) {
  return {k, classify_gain(k), enumerate_triangle_equilibria(a, k)};
}

inline void emit_analysis_rows(YAML::Emitter& out, double a, const std::vector<AnalysisRow>& rows) {
  out << YAML::BeginMap;
  out << YAML::Key << "half_side" << YAML::Value << a;
  out << YAML::Key << "boundaries" << YAML::Value << YAML::Flow << YAML::BeginSeq << kBistableBoundary
      << kSingleEquilibriumGain << YAML::EndSeq;
  out << YAML::Key << "rows" << YAML::Value << YAML::BeginSeq;
  for (const AnalysisRow& r : rows) {
    out << YAML::BeginMap;
    out << YAML::Key << "k_gain" << YAML::Value << r.k_gain;
    out << YAML::Key << "regime" << YAML::Value << to_string(r.regime.regime);
    out << YAML::Key << "boundary" << YAML::Value << r.regime.on_boundary;
    out << YAML::Key << "stable_count" << YAML::Value << r.stable_count();
    out << YAML::Key << "equilibrium_count" << YAML::Value << r.counted_with_multiplicity();
    out << YAML::Key << "equilibria" << YAML::Value << YAML::BeginSeq;
    for (const Equilibrium& e : r.equilibria) emit_equilibrium(out, e);
    out << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

/// Parses "min:max:step" into the inclusive list min, min+step, ... <= max.
/// "min:max" means a single step; min == max gives one value.
inline std::vector<double> parse_range(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("range '" + spec + "': '" + item + "' is not a number");
    }
  }
  if (parts.size() == 2) parts.push_back(parts[1] - parts[0]);
  if (parts.size() != 3) throw ConfigError("range '" + spec + "' must be min:max:step or min:max");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (hi < lo) throw ConfigError("range '" + spec + "': max is below min");
  if (hi == lo) return {lo};
  if (!(step > 0.0)) throw ConfigError("range '" + spec + "': step must be > 0");
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double raw = lo + static_cast<double>(i) * step;
    if (raw > hi + 1e-9 * step) break;
    // Snap to 12 significant digits so 0.1:3:0.1 yields 1.5, not 1.5000000000000002.
    std::ostringstream snapped;
    snapped << std::setprecision(12) << raw;
    out.push_back(std::stod(snapped.str()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<double> k_gain;
};

struct TerminalClassification {
  std::string family;
  BasinLabel label = BasinLabel::unresolved;
  Position position;
};

/// Labels the terminal state of a pinned pair / pinned triangle run against
/// the closed-form equilibria (tolerance kBasinMatchTolerance).
inline std::optional<TerminalClassification> classify_terminal(const Scenario& s, std::span<const Position> fin) {
  const auto n = s.plan.agent_count();
  if (n == 2) {
    const auto& a = s.plan.assignment(s.plan.order()[1]);
    const double x = distance(at(fin, a.anchor), at(fin, a.agent));
    TerminalClassification tc{"", BasinLabel::unresolved, {x, 0.0}};
    const auto eqs = enumerate_pair_equilibria(s.formation.d_star());
    if (const auto q = nearest_equilibrium(eqs, tc.position, kBasinMatchTolerance)) {
      tc.family = to_string(eqs[*q].family);
      tc.label = eqs[*q].in_target_set() ? BasinLabel::correct : BasinLabel::incorrect;
    }
    return tc;
  }
  if (n == 3) {
    const auto& a = s.plan.assignment(s.plan.order()[2]);
    TerminalClassification tc;
    tc.position = to_pinned_frame(at(fin, a.base1), at(fin, a.base2), at(fin, a.agent));
    const auto eqs = enumerate_triangle_equilibria(s.formation.d_star() / 2.0, s.gains.area_gain);
    if (const auto q = nearest_equilibrium(eqs, tc.position, kBasinMatchTolerance)) {
      tc.family = to_string(eqs[*q].family);
      tc.label = eqs[*q].in_target_set() ? BasinLabel::correct : BasinLabel::incorrect;
    }
    return tc;
  }
  return std::nullopt;
}

inline int run_simulate(const SimulateOptions& opt, std::ostream& log) {
  namespace fs = std::filesystem;
  const auto started = std::chrono::steady_clock::now();
  std::optional<ScenarioConfig> cfg;
  fs::path out_dir = opt.out_dir.value_or("out");

  YAML::Emitter manifest;
  manifest.SetDoublePrecision(17);
  manifest << YAML::BeginMap;
  auto finish_manifest = [&](const std::string& status, int code, const std::string& error) {
    manifest << YAML::Key << "status" << YAML::Value << status;
    manifest << YAML::Key << "exit_code" << YAML::Value << code;
    if (!error.empty()) manifest << YAML::Key << "error" << YAML::Value << error;
    manifest << YAML::Key << "wall_time_s" << YAML::Value
             << std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (cfg) {
      manifest << YAML::Key << "config" << YAML::Value;
      emit_scenario(manifest, *cfg);
    }
    manifest << YAML::EndMap;
    fs::create_directories(out_dir);
    write_text(out_dir / "manifest.yaml", std::string(manifest.c_str()) + "\n");
    return code;
  };

  std::optional<Scenario> scenario;
  try {
    cfg = load_scenario(opt.config_path);
    if (opt.seed) cfg->initial.seed = *opt.seed;
    if (opt.dt) cfg->integrator.dt = *opt.dt;
    if (opt.t_max) cfg->integrator.t_max = *opt.t_max;
    if (opt.k_gain) cfg->k_gain = *opt.k_gain;
    if (!opt.out_dir) out_dir = cfg->output_dir;
    if (!(cfg->k_gain > 0.0)) throw ConfigError("k_gain: must be > 0");
    scenario.emplace(build_scenario(*cfg));
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    if (!opt.out_dir && !cfg)
      if (const auto dir = peek_output_dir(opt.config_path)) out_dir = *dir;
    return finish_manifest("config-error", exit_code::config_error, e.what());
  }

  try {
    const Scenario& s = *scenario;
    const SimulationResult r = simulate(s.plan, s.formation, s.gains, s.initial, s.integrator);
    const auto& fin = r.trajectory.final_state();
    fs::create_directories(out_dir);
    {
      std::ofstream f(out_dir / "trajectory.csv", std::ios::binary);
      write_trajectory_csv(f, r.trajectory);
    }
    {
      std::ofstream f(out_dir / "metrics.csv", std::ios::binary);
      write_metrics_csv(f, r.trajectory, s.plan, s.formation, s.gains);
    }
    {
      YAML::Emitter eq;
      eq.SetDoublePrecision(17);
      if (s.plan.agent_count() == 2) {
        eq << YAML::BeginMap << YAML::Key << "d_star" << YAML::Value << s.formation.d_star();
        eq << YAML::Key << "equilibria" << YAML::Value << YAML::BeginSeq;
        for (const auto& e : enumerate_pair_equilibria(s.formation.d_star())) emit_equilibrium(eq, e);
        eq << YAML::EndSeq << YAML::EndMap;
      } else {
        const double a = s.formation.d_star() / 2.0;
        emit_analysis_rows(eq, a, {analyze_gain(a, s.gains.area_gain)});
      }
      write_text(out_dir / "equilibria.yaml", std::string(eq.c_str()) + "\n");
    }

    manifest << YAML::Key << "termination" << YAML::Value << to_string(r.termination);
    manifest << YAML::Key << "end_time" << YAML::Value << r.end_time;
    manifest << YAML::Key << "steps" << YAML::Value << r.steps;
    if (r.termination != Termination::diverged) {
      const FormationErrors e = formation_errors(s.formation, fin);
      manifest << YAML::Key << "final" << YAML::Value << YAML::BeginMap;
      manifest << YAML::Key << "max_distance_error" << YAML::Value << e.max_distance_error;
      manifest << YAML::Key << "max_area_error" << YAML::Value << e.max_area_error;
      manifest << YAML::Key << "max_control_norm" << YAML::Value << r.trajectory.metrics.back().max_control_norm;
      manifest << YAML::Key << "flipped_cliques" << YAML::Value << flipped_cliques(s.formation, fin);
      manifest << YAML::EndMap;
      if (const auto tc = classify_terminal(s, fin)) {
        manifest << YAML::Key << "terminal_equilibrium" << YAML::Value << YAML::BeginMap;
        manifest << YAML::Key << "label" << YAML::Value << to_string(tc->label);
        manifest << YAML::Key << "family" << YAML::Value << tc->family;
        manifest << YAML::Key << "pinned_frame_position" << YAML::Value;
        emit_position(manifest, tc->position);
        manifest << YAML::EndMap;
        log << "terminal equilibrium: " << to_string(tc->label) << (tc->family.empty() ? "" : " (" + tc->family + ")")
            << '\n';
      }
    }
    const int code = exit_code_for(r.termination);
    log << to_string(r.termination) << " at t=" << r.end_time << " after " << r.steps << " steps\n";
    return finish_manifest(to_string(r.termination), code, "");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return finish_manifest("error", exit_code::runtime_failure, e.what());
  }
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  double a = 1.0;
  std::vector<double> k_values;
  std::optional<std::string> k_range;
  bool exact_boundary = false;
  std::string out_dir = "out";
};

inline int run_analyze(const AnalyzeOptions& opt, std::ostream& log) {
  std::vector<double> ks = opt.k_values;
  try {
    if (!(opt.a > 0.0) || !std::isfinite(opt.a)) throw ConfigError("--a must be > 0");
    if (opt.k_range) {
      const auto r = parse_range(*opt.k_range);
      ks.insert(ks.end(), r.begin(), r.end());
    }
    if (opt.exact_boundary) ks.push_back(kBistableBoundary);
    if (ks.empty()) throw ConfigError("no gain given (use --k, --k-range or --exact-boundary)");
    for (double k : ks)
      if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("gain " + format_double(k) + " is not > 0");
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return exit_code::config_error;
  }

  std::vector<AnalysisRow> rows;
  for (double k : ks) rows.push_back(analyze_gain(opt.a, k));

  namespace fs = std::filesystem;
  fs::create_directories(opt.out_dir);
  YAML::Emitter report;
  report.SetDoublePrecision(17);
  emit_analysis_rows(report, opt.a, rows);
  write_text(fs::path(opt.out_dir) / "equilibria.yaml", std::string(report.c_str()) + "\n");

  std::ofstream csv(fs::path(opt.out_dir) / "analysis.csv", std::ios::binary);
  csv << "k_gain,regime,boundary,equilibrium_count,stable_count\n";
  log << std::left << std::setw(20) << "K" << std::setw(15) << "regime" << std::setw(10) << "boundary"
      << std::setw(8) << "count" << "stable\n";
  for (const AnalysisRow& r : rows) {
    csv << format_double(r.k_gain) << ',' << to_string(r.regime.regime) << ',' << (r.regime.on_boundary ? 1 : 0) << ','
        << r.counted_with_multiplicity() << ',' << r.stable_count() << '\n';
    log << std::setw(20) << format_double(r.k_gain) << std::setw(15) << to_string(r.regime.regime) << std::setw(10)
        << (r.regime.on_boundary ? "yes" : "") << std::setw(8) << r.counted_with_multiplicity() << r.stable_count()
        << '\n';
    for (const Equilibrium& e : r.equilibria) {
      log << "    " << std::setw(14) << to_string(e.family) << " (" << format_double(e.position.x) << ", "
          << format_double(e.position.y) << ") " << to_string(e.stability) << " eig";
      for (double l : e.eigenvalues) log << ' ' << format_double(l);
      log << '\n';
    }
  }
  return exit_code::ok;
}

// ---------------------------------------------------------------------------
// basin / sweep-gain

struct BasinOptions {
  double d_star = 2.0;
  double k_gain = 20.0;
  double kappa = 1.0;
  BasinGrid grid{};
  IntegratorConfig integrator{};
  std::string out_dir = "out";
};

inline std::vector<BasinCell> run_pinned_basin(double d_star, double k_gain, double kappa, const BasinGrid& grid,
                                               const IntegratorConfig& cfg) {
  DesiredFormation df(builtin::triangle_graph(), d_star);
  const HierarchyPlan plan = build_hierarchy(df.graph(), {1, 2});
  const auto base = builtin::pinned_triangle(d_star, {0.0, 0.0});
  const auto starts = grid.points();
  return basin_probe(plan, df, {k_gain, kappa}, base, starts, cfg);
}

inline int run_basin(const BasinOptions& opt, std::ostream& log) {
  try {
    if (!(opt.d_star > 0.0)) throw ConfigError("--d-star must be > 0");
    if (!(opt.k_gain > 0.0)) throw ConfigError("--k must be > 0");
    if (!(opt.kappa > 0.0)) throw ConfigError("--kappa must be > 0");
    if (opt.grid.per_axis < 0) throw ConfigError("--grid must be >= 0");
    if (opt.grid.per_axis > 0 && !(opt.grid.lo < opt.grid.hi) && opt.grid.per_axis != 1)
      throw ConfigError("--range must satisfy lo < hi");
    opt.integrator.validate();
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return exit_code::config_error;
  }
  const auto cells = run_pinned_basin(opt.d_star, opt.k_gain, opt.kappa, opt.grid, opt.integrator);
  std::filesystem::create_directories(opt.out_dir);
  std::ofstream csv(std::filesystem::path(opt.out_dir) / "basin.csv", std::ios::binary);
  write_basin_csv(csv, cells);
  if (cells.empty()) {
    log << "cells=0\n";
  } else {
    log << "cells=" << cells.size() << " fraction_correct=" << format_double(fraction_correct(cells)) << '\n';
  }
  return exit_code::ok;
}

struct SweepOptions {
  double d_star = 2.0;
  double kappa = 1.0;
  std::vector<double> k_values;
  std::optional<std::string> k_range;
  BasinGrid grid{};
  IntegratorConfig integrator{};
  std::string out_dir = "out";
};

inline int run_sweep_gain(const SweepOptions& opt, std::ostream& log) {
  std::vector<double> ks = opt.k_values;
  try {
    if (opt.k_range) {
      const auto r = parse_range(*opt.k_range);
      ks.insert(ks.end(), r.begin(), r.end());
    }
    if (ks.empty()) throw ConfigError("no gain given (use --k or --k-range)");
    for (double k : ks)
      if (!(k > 0.0)) throw ConfigError("gain " + format_double(k) + " is not > 0");
    if (!(opt.d_star > 0.0)) throw ConfigError("--d-star must be > 0");
    opt.integrator.validate();
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return exit_code::config_error;
  }
  std::filesystem::create_directories(opt.out_dir);
  std::ofstream csv(std::filesystem::path(opt.out_dir) / "sweep.csv", std::ios::binary);
  csv << "k_gain,regime,boundary,equilibrium_count,stable_count,cells,fraction_correct\n";
  for (double k : ks) {
    const AnalysisRow row = analyze_gain(opt.d_star / 2.0, k);
    const auto cells = run_pinned_basin(opt.d_star, k, opt.kappa, opt.grid, opt.integrator);
    csv << format_double(k) << ',' << to_string(row.regime.regime) << ',' << (row.regime.on_boundary ? 1 : 0) << ','
        << row.counted_with_multiplicity() << ',' << row.stable_count() << ',' << cells.size() << ','
        << (cells.empty() ? std::string("") : format_double(fraction_correct(cells))) << '\n';
    log << "K=" << format_double(k) << " regime=" << to_string(row.regime.regime)
        << " fraction_correct=" << (cells.empty() ? std::string("n/a") : format_double(fraction_correct(cells))) << '\n';
  }
  return exit_code::ok;
}

}  // namespace sigform
