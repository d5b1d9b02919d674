#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirror/analysis.hpp"
#include "mirror/couplings.hpp"

namespace mirror {

inline constexpr int kConfigSchema = 1;

/// Environment variable that overrides ExperimentConfig::output_dir.
inline constexpr const char* kOutputDirEnv = "MIRROR_OUTPUT_DIR";

struct ExperimentConfig {
  int schema = kConfigSchema;
  std::string mode = "simulate";  // simulate | exact | verify
  /// euclidean | circle | torus | sphere | hyperbolic | cycle | eight | tree | gasket
  std::string space = "euclidean";
  std::string coupling = "mirror";  // mirror | kc | eight | tree | independent
  std::string check;                // verify: maximality | wasser | varadhan | nonuniqueness | bisector-equidistance

  /// Starting pair: distance between x1 and x2 (circle: gap, torus: a).
  std::optional<double> separation;
  double torus_b = 0.0;
  int dim = 1;

  std::vector<double> t_grid;
  std::int64_t trials = 0;
  std::optional<std::uint64_t> seed;

  int m = 4;
  double laziness = 0.5;
  int level = 2;
  bool axis_subdivision = true;

  double dt = 0.05;   // Brownian sampling grid
  double eps = 0.05;  // geodesic walk step
  std::optional<double> poisson_lambda;
  int horizon = 20;   // chain checks: s + t (wasser) or t (maximality, nonuniqueness)

  std::string output_dir = "out";
  std::string name = "run";
  int threads = 1;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Throws ConfigError describing the first invalid field.
  void validate() const;
};

ExperimentConfig load_config(const std::string& path);

struct CheckOutcome {
  std::string name;
  bool pass = false;
  nlohmann::json detail;
};

struct ResultManifest {
  nlohmann::json config;
  std::string input_hash;
  std::vector<CheckOutcome> checks;
  std::vector<std::string> outputs;
  double wall_clock_s = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Git blob hash ("blob <len>\0" + content, SHA-1) of the canonical config.
std::string content_hash(const std::string& content);

/// Survival estimate P[T > t] on the config's t grid; bit-identical for any
/// thread count.
TVCurve simulate_survival(const ExperimentConfig& config);

/// Coupling times of every trial, in trial order.
std::vector<double> simulate_coupling_times(const ExperimentConfig& config);

/// Runs the configured pipeline, writes its CSV / JSON outputs and the
/// manifest into the output directory, and returns the manifest.
ResultManifest run_experiment(const ExperimentConfig& config);

/// Starting pair used for a space name.
std::pair<Point, Point> starting_pair(const ExperimentConfig& config, const Space& space);
Space make_space(const ExperimentConfig& config);
ChainRequest chain_request(const ExperimentConfig& config);
bool is_chain_space(const std::string& space);

/// Resolved output directory (environment override applied).
std::string output_directory(const ExperimentConfig& config);

}  // namespace mirror
