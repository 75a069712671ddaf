#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sigform/runner.hpp"

namespace {

sigform::BasinGrid parse_grid(int per_axis, const std::string& range) {
  sigform::BasinGrid g;
  g.per_axis = per_axis;
  const auto colon = range.find(':');
  if (colon == std::string::npos) throw sigform::ConfigError("--range must be lo:hi");
  try {
    g.lo = std::stod(range.substr(0, colon));
    g.hi = std::stod(range.substr(colon + 1));
  } catch (const std::exception&) {
    throw sigform::ConfigError("--range '" + range + "' is not lo:hi");
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signed-area distance formation: simulate, analyze and probe basins"};
  app.require_subcommand(1);

  sigform::SimulateOptions sim;
  std::optional<double> sim_dt, sim_tmax, sim_k;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::string> sim_out;
  auto* simulate = app.add_subcommand("simulate", "Run one scenario file");
  simulate->add_option("--config", sim.config_path, "Scenario file")->required();
  simulate->add_option("--out-dir", sim_out, "Output directory (overrides output_dir)");
  simulate->add_option("--seed", sim_seed, "Seed for a random layout");
  simulate->add_option("--dt", sim_dt, "Step size");
  simulate->add_option("--t-max", sim_tmax, "Time limit");
  simulate->add_option("--k", sim_k, "Area gain");

  sigform::AnalyzeOptions ana;
  std::string ana_range;
  auto* analyze = app.add_subcommand("analyze", "Equilibria of the pinned triangle per gain");
  analyze->add_option("--a", ana.a, "Half side length")->capture_default_str();
  analyze->add_option("--k", ana.k_values, "Area gain (repeatable)");
  analyze->add_option("--k-range", ana_range, "min:max:step");
  analyze->add_flag("--exact-boundary", ana.exact_boundary, "Add the bistable boundary gain");
  analyze->add_option("--out-dir", ana.out_dir)->capture_default_str();

  sigform::BasinOptions bas;
  int bas_grid = 9;
  std::string bas_range = "-3:3";
  auto* basin = app.add_subcommand("basin", "Label a grid of free-agent starts by terminal equilibrium");
  basin->add_option("--k", bas.k_gain, "Area gain")->capture_default_str();
  basin->add_option("--grid", bas_grid, "Points per axis")->capture_default_str();
  basin->add_option("--range", bas_range, "lo:hi for both axes")->capture_default_str();
  basin->add_option("--d-star", bas.d_star)->capture_default_str();
  basin->add_option("--kappa", bas.kappa)->capture_default_str();
  basin->add_option("--dt", bas.integrator.dt)->capture_default_str();
  basin->add_option("--t-max", bas.integrator.t_max)->capture_default_str();
  basin->add_option("--out-dir", bas.out_dir)->capture_default_str();

  sigform::SweepOptions swp;
  int swp_grid = 9;
  std::string swp_range = "-3:3";
  std::string swp_k_range;
  auto* sweep = app.add_subcommand("sweep-gain", "Basin fraction and regime over a list of gains");
  sweep->add_option("--k", swp.k_values, "Area gain (repeatable)");
  sweep->add_option("--k-range", swp_k_range, "min:max:step");
  sweep->add_option("--grid", swp_grid, "Points per axis")->capture_default_str();
  sweep->add_option("--range", swp_range, "lo:hi for both axes")->capture_default_str();
  sweep->add_option("--d-star", swp.d_star)->capture_default_str();
  sweep->add_option("--dt", swp.integrator.dt)->capture_default_str();
  sweep->add_option("--t-max", swp.integrator.t_max)->capture_default_str();
  sweep->add_option("--out-dir", swp.out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : sigform::exit_code::config_error;
  }

  try {
    if (simulate->parsed()) {
      sim.out_dir = sim_out;
      sim.seed = sim_seed;
      sim.dt = sim_dt;
      sim.t_max = sim_tmax;
      sim.k_gain = sim_k;
      return sigform::run_simulate(sim, std::cout);
    }
    if (analyze->parsed()) {
      if (!ana_range.empty()) ana.k_range = ana_range;
      return sigform::run_analyze(ana, std::cout);
    }
    if (basin->parsed()) {
      bas.grid = parse_grid(bas_grid, bas_range);
      return sigform::run_basin(bas, std::cout);
    }
    if (sweep->parsed()) {
      swp.grid = parse_grid(swp_grid, swp_range);
      if (!swp_k_range.empty()) swp.k_range = swp_k_range;
      return sigform::run_sweep_gain(swp, std::cout);
    }
  } catch (const sigform::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return sigform::exit_code::config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sigform::exit_code::runtime_failure;
  }
  return sigform::exit_code::runtime_failure;
}
