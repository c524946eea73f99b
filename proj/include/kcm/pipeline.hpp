#pragma once

#include "kcm/analysis.hpp"
#include "kcm/integrands.hpp"
#include "kcm/model.hpp"
#include "kcm/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kcm {

inline constexpr int kSchemaVersion = 1;

/// Every knob of every subcommand. Grid subcommands use `ns` and `times`;
/// single-size subcommands use `n` and `L` (0 selects 8n).
struct RunConfig {
  int m = 2;
  std::string rho = "2/3";
  double b = 1.0;
  double gamma = 1.0;
  int n = 64;
  long L = 0;
  double t_max = 0.25;
  double dt = 0.0;
  double eps = 0.25;
  long ell = 0;
  int n_traj = 256;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = ".";

  std::vector<int> ns{32, 64, 128, 256};
  std::vector<double> times{0.125, 0.25};
  std::vector<std::string> terms{"bgp2-inner"};
  /// Width of the test functions.
  double width = 1.0;
  int samples = 10000;

  std::vector<int> m_list{2, 3, 4};
  bool corrupt_rates = false;
  long path_trials = 10000;

  /// path-demo: explicit configuration (empty draws one), exchanged sites and box.
  std::string eta;
  long y = -1;
  long z = -1;
  long box_anchor = -1;
  long box_length = 0;

  /// Throws InvalidInput on inconsistent values.
  ModelParams model() const;
  ModelParams model_at(int size) const;
  std::vector<TermSpec> term_specs() const;
};

/// Parses "key = value" lines ('#' starts a comment). Keys are the long flag
/// names without dashes; lists are comma separated.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

nlohmann::json to_json(const RunConfig& config);
/// schema_version, program metadata and the resolved config.
nlohmann::json output_header(const RunConfig& config, const std::string& command);
/// The same as CSV comment lines.
std::string csv_header(const RunConfig& config, const std::string& command);

struct PipelineOutput {
  std::string name;
  nlohmann::json summary;
  /// Per-trajectory detail; empty when the command has none.
  std::string csv;
  bool passed = true;
};

/// Writes <out>/<name>.json and, when present, <out>/<name>.csv. Throws Error on I/O failure.
void write_output(const PipelineOutput& output, const std::string& directory);

PipelineOutput verify_pipeline(const RunConfig& config);
/// n_traj runs of length t_max with snapshots every dt; t_max = 0 gives the
/// initial snapshots only.
PipelineOutput simulate_pipeline(const RunConfig& config);

/// Squared time integrals of several terms over an (n, t) grid.
struct ScalingPoint {
  int n = 0;
  long ring_size = 0;
  std::uint64_t seed = 0;
  std::vector<long> ells;
  /// ||V||_{2,n}^2 of each term's weights.
  std::vector<double> norms;
  TermGridResult result;
};

struct ScalingStudy {
  RunConfig config;
  std::vector<TermSpec> terms;
  std::vector<ScalingPoint> points;

  /// estimate(term, n index, time index).
  const SquaredExpectation& estimate(std::size_t term, std::size_t point, std::size_t time) const {
    return points[point].result.estimates[term][time];
  }
};

/// Seed of grid point n: a fixed mix of the base seed and n.
std::uint64_t grid_seed(std::uint64_t base, int n);

ScalingStudy run_scaling_study(const RunConfig& config);

struct Bgp2Verdict {
  /// Per time: nonincreasing in n within 2 sigma.
  std::vector<bool> nonincreasing;
  double fitted_constant = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

/// Trend and bound constant for the term at index `term` (bgp2-inner).
Bgp2Verdict bgp2_verdict(const ScalingStudy& study, std::size_t term);

/// JSON with estimates, power-law fits per term and time, and the bgp2
/// verdict for bgp2-inner terms; CSV with one row per trajectory.
PipelineOutput scaling_output(const ScalingStudy& study, const std::string& name);

PipelineOutput bgp2_pipeline(const RunConfig& config);
/// E[Y_t(H) Y_0(H)] against the Ornstein-Uhlenbeck covariance for a Gaussian of the configured width.
PipelineOutput covariance_pipeline(const RunConfig& config);
/// Equilibrium law of Y_0(H) for a Gaussian, a Hermite and a bump function.
PipelineOutput sample_equilibrium_pipeline(const RunConfig& config);

struct PathDemo {
  std::vector<std::string> frames;
  std::string target;
  bool verified = false;
  long y = 0;
  long z = 0;
  BoxSpec box;
};

/// Builds the exchange path for the configured (or drawn) configuration.
/// frames[0] is the initial configuration, frames[i] the one after move i.
PathDemo path_demo(const RunConfig& config);

}  // namespace kcm
