#pragma once

// Fixed-step integration of p_i' = u_i with convergence / divergence
// detection, plus the basin sweep for the pinned triangle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sigform/analysis.hpp"
#include "sigform/formation_graph.hpp"
#include "sigform/hierarchy.hpp"

namespace sigform {

enum class Method { rk4, euler };

inline const char* to_string(Method m) { return m == Method::rk4 ? "rk4" : "euler"; }

struct IntegratorConfig {
  Method method = Method::rk4;
  double dt = 1e-3;
  double t_max = 50.0;
  double grad_norm_tol = 1e-9;
  int record_stride = 10;
  double divergence_bound = 1e6;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("integrator: dt must be > 0");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("integrator: t_max must be > 0");
    if (!(dt < t_max)) throw std::invalid_argument("integrator: dt must be smaller than t_max");
    if (!(grad_norm_tol > 0.0)) throw std::invalid_argument("integrator: grad_norm_tol must be > 0");
    if (record_stride < 1) throw std::invalid_argument("integrator: record_stride must be >= 1");
    if (!(divergence_bound > 0.0)) throw std::invalid_argument("integrator: divergence_bound must be > 0");
  }
  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

enum class Termination { converged, timeout, diverged };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::timeout: return "timeout";
    case Termination::diverged: return "diverged";
  }
  return "?";
}

struct SampleMetrics {
  double max_distance_error = 0.0;
  double max_area_error = 0.0;
  double max_control_norm = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<Position>> states;
  std::vector<SampleMetrics> metrics;

  std::size_t size() const { return times.size(); }
  const std::vector<Position>& final_state() const { return states.back(); }
};

struct SimulationResult {
  Trajectory trajectory;
  Termination termination = Termination::timeout;
  /// Time of the last state reached (the offending time on divergence).
  double end_time = 0.0;
  std::size_t steps = 0;
};

/// One explicit fixed step of `field` (signature void(span<const Position>,
/// span<PlanarVector>)). `k1` must already hold the field at `state`.
template <typename Field>
class FixedStepper {
 public:
  FixedStepper(Field field, std::size_t n) : field_(std::move(field)), tmp_(n), k2_(n), k3_(n), k4_(n) {}

  void step(Method method, std::vector<Position>& state, std::span<const PlanarVector> k1, double dt) {
    const std::size_t n = state.size();
    if (method == Method::euler) {
      for (std::size_t i = 0; i < n; ++i) state[i] = state[i] + dt * k1[i];
      return;
    }
    const double half = dt / 2.0;
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = state[i] + half * k1[i];
    field_(std::span<const Position>(tmp_), std::span<PlanarVector>(k2_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = state[i] + half * k2_[i];
    field_(std::span<const Position>(tmp_), std::span<PlanarVector>(k3_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = state[i] + dt * k3_[i];
    field_(std::span<const Position>(tmp_), std::span<PlanarVector>(k4_));
    for (std::size_t i = 0; i < n; ++i)
      state[i] = state[i] + (dt / 6.0) * (k1[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  Field field_;
  std::vector<Position> tmp_;
  std::vector<PlanarVector> k2_, k3_, k4_;
};

inline double max_norm(std::span<const PlanarVector> u) {
  double m = 0.0;
  for (PlanarVector v : u) m = std::max(m, norm(v));
  return m;
}

/// Integrates the cascade from `init` until max_i |u_i| < grad_norm_tol
/// (converged), t >= t_max (timeout) or a coordinate leaves the divergence
/// bound / becomes non-finite (diverged). Samples every record_stride steps
/// and always the final state.
inline SimulationResult simulate(const HierarchyPlan& plan, const DesiredFormation& df, const ControlGains& gains,
                                 std::span<const Position> init, const IntegratorConfig& cfg) {
  cfg.validate();
  gains.validate();
  const std::size_t n = plan.agent_count();
  if (init.size() != n) throw std::invalid_argument("simulate: initial state has wrong agent count");
  for (Position p : init)
    if (!is_finite(p)) throw std::invalid_argument("simulate: initial state is not finite");

  auto field = [&](std::span<const Position> p, std::span<PlanarVector> out) { control_field(plan, df, gains, p, out); };
  FixedStepper<decltype(field)> stepper(field, n);

  SimulationResult result;
  std::vector<Position> state(init.begin(), init.end());
  std::vector<PlanarVector> u(n);

  auto record = [&](double t, double u_norm) {
    const FormationErrors e = formation_errors(df, state);
    result.trajectory.times.push_back(t);
    result.trajectory.states.push_back(state);
    result.trajectory.metrics.push_back({e.max_distance_error, e.max_area_error, u_norm});
  };
  auto out_of_bounds = [&] {
    return std::any_of(state.begin(), state.end(), [&](Position p) {
      return !is_finite(p) || std::abs(p.x) > cfg.divergence_bound || std::abs(p.y) > cfg.divergence_bound;
    });
  };

  std::size_t step = 0;
  for (;;) {
    const double t = static_cast<double>(step) * cfg.dt;
    field(state, u);
    const double u_norm = max_norm(u);
    const bool converged = u_norm < cfg.grad_norm_tol;
    const bool timed_out = t >= cfg.t_max;
    if (converged || timed_out || step % static_cast<std::size_t>(cfg.record_stride) == 0) record(t, u_norm);
    if (converged || timed_out) {
      result.termination = converged ? Termination::converged : Termination::timeout;
      result.end_time = t;
      break;
    }
    stepper.step(cfg.method, state, u, cfg.dt);
    ++step;
    if (out_of_bounds()) {
      const double t_bad = static_cast<double>(step) * cfg.dt;
      result.trajectory.times.push_back(t_bad);
      result.trajectory.states.push_back(state);
      constexpr double nan = std::numeric_limits<double>::quiet_NaN();
      result.trajectory.metrics.push_back({nan, nan, nan});
      result.termination = Termination::diverged;
      result.end_time = t_bad;
      break;
    }
  }
  result.steps = step;
  return result;
}

enum class BasinLabel { correct, incorrect, unresolved };

inline const char* to_string(BasinLabel l) {
  switch (l) {
    case BasinLabel::correct: return "correct";
    case BasinLabel::incorrect: return "incorrect";
    case BasinLabel::unresolved: return "unresolved";
  }
  return "?";
}

struct BasinCell {
  Position start;
  /// Terminal position of the free agent in the pinned frame.
  Position terminal;
  Termination termination = Termination::timeout;
  BasinLabel label = BasinLabel::unresolved;
  std::optional<EquilibriumFamily> family;
  std::string error;
};

/// Square grid of start points, row-major in y then x.
struct BasinGrid {
  double lo = -3.0;
  double hi = 3.0;
  int per_axis = 9;

  std::vector<Position> points() const {
    std::vector<Position> out;
    const int m = std::max(per_axis, 0);
    for (int iy = 0; iy < m; ++iy)
      for (int ix = 0; ix < m; ++ix) {
        const double tx = m == 1 ? 0.5 : static_cast<double>(ix) / (m - 1);
        const double ty = m == 1 ? 0.5 : static_cast<double>(iy) / (m - 1);
        out.push_back({lo + tx * (hi - lo), lo + ty * (hi - lo)});
      }
    return out;
  }
};

inline constexpr double kBasinMatchTolerance = 1e-4;

/// Runs the pinned triangle from each start (the free agent is the single
/// triangle-kind agent; the other two keep their places from `base_state`)
/// and labels the terminal point against the closed-form equilibria.
/// Failures are recorded per cell; the sweep always completes.
inline std::vector<BasinCell> basin_probe(const HierarchyPlan& plan, const DesiredFormation& df,
                                          const ControlGains& gains, std::span<const Position> base_state,
                                          std::span<const Position> starts, const IntegratorConfig& cfg,
                                          unsigned threads = std::thread::hardware_concurrency()) {
  if (plan.agent_count() != 3 || base_state.size() != 3)
    throw std::invalid_argument("basin_probe needs a three-agent scenario");
  AgentId free_agent = 0, left = 0, right = 0;
  for (const auto& a : plan.assignments())
    if (a.kind == AssignmentKind::triangle) {
      free_agent = a.agent;
      left = a.base1;
      right = a.base2;
    }
  if (free_agent == 0) throw std::invalid_argument("basin_probe: plan has no triangle agent");

  const double a = df.d_star() / 2.0;
  const auto equilibria = enumerate_triangle_equilibria(a, gains.area_gain);

  std::vector<BasinCell> cells(starts.size());
  auto run_cell = [&](std::size_t c) {
    BasinCell& cell = cells[c];
    cell.start = starts[c];
    try {
      std::vector<Position> init(base_state.begin(), base_state.end());
      init[static_cast<std::size_t>(free_agent - 1)] = starts[c];
      const SimulationResult r = simulate(plan, df, gains, init, cfg);
      const auto& fin = r.trajectory.final_state();
      cell.termination = r.termination;
      cell.terminal = to_pinned_frame(at(fin, left), at(fin, right), at(fin, free_agent));
      if (r.termination == Termination::diverged) {
        cell.error = "diverged at t=" + std::to_string(r.end_time);
        return;
      }
      if (const auto q = nearest_equilibrium(equilibria, cell.terminal, kBasinMatchTolerance)) {
        cell.family = equilibria[*q].family;
        cell.label = equilibria[*q].in_target_set() ? BasinLabel::correct : BasinLabel::incorrect;
      }
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, starts.size()));
  if (workers <= 1) {
    for (std::size_t c = 0; c < starts.size(); ++c) run_cell(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < starts.size(); c += workers) run_cell(c);
      });
  }
  return cells;
}

inline double fraction_correct(std::span<const BasinCell> cells) {
  if (cells.empty()) return 0.0;
  const auto good = std::count_if(cells.begin(), cells.end(), [](const BasinCell& c) { return c.label == BasinLabel::correct; });
  return static_cast<double>(good) / static_cast<double>(cells.size());
}

}  // namespace sigform
