#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftinv/core_model.hpp"
#include "driftinv/drift_inversion.hpp"
#include "driftinv/mollifier.hpp"

namespace driftinv {

inline constexpr const char* kToolVersion = "0.1.0";

struct DriftProfile {
  std::string label;
  ScalarFn q;
  std::vector<double> kinks;  ///< points where q or q' jumps
};

struct ExperimentPreset {
  std::string name;
  ProblemSpec spec;
  DriftProfile drift;
  int m = 100;
  int n_steps = 100;
  int refinement = 4;  ///< data are generated on an (r*m, r*N) grid
  std::size_t data_points = 101;
  std::optional<NoiseSpec> noise;
  bool mollify = false;
  IterationConfig iteration;
  TikhonovConfig tikhonov;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

const std::vector<std::string>& preset_names();

/// Throws ConfigError listing the valid names for an unknown preset.
ExperimentPreset make_preset(const std::string& name);

/// Field-by-field overrides, shared by CLI flags and config files.
struct PresetOverrides {
  std::optional<int> grid_m;
  std::optional<int> grid_n;
  std::optional<int> refine;
  std::optional<std::size_t> data_points;
  std::optional<double> noise;
  std::optional<std::uint64_t> seed;
  std::optional<bool> mollify;
  std::optional<std::optional<double>> lambda;  ///< inner nullopt = auto
  std::optional<int> max_iter;
  std::optional<double> tol;

  void apply(ExperimentPreset& preset) const;
};

/**
 * Reads a JSON config of the form
 *
 *   { "preset": "ex3e",
 *     "grid": { "m": 20, "n": 80, "refine": 4 },
 *     "data": { "points": 10001, "noise": 0.01, "seed": 7,
 *               "mollify": true, "lambda": "auto" },
 *     "iteration": { "max_iter": 3, "tol": 1e-4 } }
 *
 * Every section is optional except "preset". Unknown keys are errors.
 */
ExperimentPreset load_config(const std::string& path);
ExperimentPreset preset_from_config_text(const std::string& text);

/// Final-time data on the K uniform data points.
struct Measurement {
  std::vector<double> x;
  std::vector<double> exact;
  std::vector<double> noisy;
  double sigma = 0.0;
};

/// Forward solve with the true drift on the refined grid, sampled at the data
/// points by linear interpolation, then noise per the preset.
Measurement generate_data(const ExperimentPreset& preset);

struct MollificationInfo {
  bool applied = false;
  double lambda = 0.0;
  double mu = 0.0;  ///< lambda / (K-1)^8
  double residual = 0.0;
  double target = 0.0;
  bool qualified = false;
  double gradient_residual = 0.0;
};

struct Provenance {
  std::string preset;
  std::string drift;
  std::uint64_t seed = 0;
  double noise_level = 0.0;
  std::string noise_scaling = "relative-to-sup";
  int m = 0;
  int n_steps = 0;
  double horizon = 0.0;
  int refinement = 0;
  std::size_t data_points = 0;
  bool inverse_crime = false;  ///< data generated on the inversion grid
  int max_iter = 0;
  double tol = 0.0;
  std::string version = kToolVersion;
};

enum class RunStatus { Ok, Diverged, Failed };

struct ResultBundle {
  Provenance provenance;
  GridPair grids;
  GridFunction q_true;
  std::optional<GridFunction> recovered;
  IterationTrace trace;
  std::optional<ErrorMetrics> metrics;
  std::optional<ErrorMetrics> metrics_away_from_kinks;
  MollificationInfo mollification;
  AssumptionReport assumptions;

  // final-time data restricted to the solver grid
  GridFunction g_exact;
  GridFunction g_noisy;
  GridFunction g_used;

  RunStatus status = RunStatus::Ok;
  std::string message;
  int exit_code = 0;
};

/// Nodes farther than one grid step from every kink.
std::vector<bool> away_from_kinks(const SpatialGrid& grid, const std::vector<double>& kinks);

/**
 * generate -> (mollify) -> restrict -> invert -> metrics. Stage errors are
 * captured into the bundle (exit code 2 for configuration, 3 for numerical
 * failures); a divergent iteration keeps its partial trace.
 */
ResultBundle run_experiment(const ExperimentPreset& preset);

/// Same pipeline on externally supplied data (uniform samples on [0,1]).
ResultBundle run_experiment(const ExperimentPreset& preset, const Measurement& data);

const char* to_string(RunStatus status);

}  // namespace driftinv
