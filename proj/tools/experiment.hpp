#pragma once

#include <nlocal/serialization.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlocal::cli {

inline constexpr int kSchemaVersion = 1;

enum class Command { sweep, fit, threshold, scaling, spurious, dynamics, bound };

std::string command_name(Command command);
std::optional<Command> parse_command(const std::string& name);

// Bad configuration: maps to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Interface units: MHz / GHz / ns. Converted to rad/ns at the boundary.
struct ExperimentConfig {
  Command command = Command::sweep;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int jobs = 0;  // 0 = available parallelism

  // system
  int n = 4;
  double delta_ghz = 2.0;
  double epsilon_max_ghz = 10.0;
  double coupling_max_mhz = 300.0;
  double m_mhz = 50.0;
  bool couplings = true;

  // spurious shifts
  double eta = 0.5;
  // Empty selects the command default: symmetric over all non-n-local
  // parameters, except `spurious`, which uses positive shifts on couplings.
  std::string spurious_distribution;
  std::string spurious_targets;

  // spectroscopy and fitting
  int grid_points = 21;
  double sigma_mhz = 0.0;
  int locality = 0;  // 0 fits both n and n - 1
  int starts = 4;
  std::string sweep_csv;  // fit: read this sweep (sidecar at <path>.json) instead of generating

  // noise studies
  std::vector<double> sigma_grid_mhz;  // empty = default grid
  int realizations = 10;
  int head_points = 5;
  std::vector<int> n_list = {3, 4, 5};
  std::vector<double> eta_grid = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};

  // dynamics
  std::vector<double> t2_ns = {1000.0};  // inf or non-positive entries mean closed system
  double t_end_ns = 1000.0;
  double sample_interval_ns = 1.0;
  int steps_per_timescale = 50;
  bool time_series = true;
};

// Throws ConfigError naming the offending field. Unknown fields are rejected.
ExperimentConfig config_from_json(const Json& doc);
Json config_to_json(const ExperimentConfig& config);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  double wall_seconds = 0.0;
};

// Runs the pipeline and writes its CSV/JSON outputs plus manifest.json into
// config.output_dir. Numerical failures propagate as exceptions.
RunSummary run(const ExperimentConfig& config, std::ostream& log);

}  // namespace nlocal::cli
