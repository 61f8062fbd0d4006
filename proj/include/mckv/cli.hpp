#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mckv/dynamics.hpp"
#include "mckv/potential.hpp"
#include "mckv/scan.hpp"
#include "mckv/solver.hpp"

namespace mckv::cli {

struct RunConfig {
  TorusSpec torus{1, 6.283185307179586, 64};
  PotentialSpec potential = PotentialSpec::zero(1.0);
  bool potential_set = false;
  double theta = 1.0;

  SolverOptions solver;
  StabilityOptions stability;

  DynamicsConfig dynamics;
  std::string init = "planewave";  ///< uniform | planewave | threewave | random | ball
  double init_amplitude = 1e-2;
  int mode_cutoff = 4;
  std::vector<double> basin_eps{0.0, 1e-4, 1e-3};

  std::vector<double> thetas;  ///< explicit grid; otherwise theta_min..theta_max
  double theta_min = 0.1;
  double theta_max = 2.0;
  int theta_points = 20;
  TransitionOptions transition;
  std::vector<double> ladder;
  std::optional<double> spacing;  ///< fixed h for scan-L; defaults to torus L / N

  std::filesystem::path output_dir = "out";
  bool plot = false;
  std::uint64_t seed = 0;

  std::vector<double> theta_grid() const;
};

/// Parses flat "section.key = value" text; '#' starts a comment.
/// Throws Error(UnknownKey | TypeMismatch | ConstraintViolation) naming the
/// line and key.
RunConfig parse_config(const std::string& text);

struct KeyDoc {
  std::string key;
  std::string type;
  std::string default_value;
  std::string help;
};

/// Every key accepted by parse_config.
const std::vector<KeyDoc>& config_keys();
std::string help_text();

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Standalone SVG, byte-deterministic for fixed input. Throws EmptyPlot.
std::string render_plot(const std::vector<Series>& series, const PlotOptions& options);
void emit_plot(const std::vector<Series>& series, const PlotOptions& options, const std::filesystem::path& path);

enum class Command { AnalyzePotential, Simulate, Solve, ScanTheta, LocateTransition, ScanL, CheckBasin, GenFixtures };

std::optional<Command> parse_command(const std::string& name);
std::string to_string(Command c);
const std::vector<std::string>& command_names();

/// Runs the command and writes artifacts into config.output_dir.
/// Returns 0 on success, 2 on computational failure (artifacts flushed).
int run(Command command, const RunConfig& config, std::ostream& log);

}  // namespace mckv::cli
