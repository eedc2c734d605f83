#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mra/metrics.hpp"

namespace mra {

enum class ExperimentKind { SnrSweep, NSweep, BoundSweep };
enum class Algorithm { FmPlain, FmRobust, Spectral };

const char* to_string(ExperimentKind kind) noexcept;
const char* to_string(Algorithm algorithm) noexcept;
ExperimentKind parse_experiment(std::string_view text);
Algorithm parse_algorithm(std::string_view text);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::SnrSweep;
  int b = 10;
  int q = 2;
  // Exactly one grid may be set, the one matching `experiment`; an unset
  // matching grid is filled with the desk-scale default by `resolve`.
  std::optional<std::vector<double>> snr_grid;
  std::optional<std::vector<double>> n_grid;
  std::optional<std::vector<double>> eta_grid;
  long long n = 100000;  // fixed n for the SNR sweep
  double snr = 100.0;    // fixed SNR for the n sweep
  int trials = 50;
  std::vector<Algorithm> algorithms{Algorithm::FmPlain, Algorithm::FmRobust, Algorithm::Spectral};
  double eta = 0.1;  // perturbation of the ground-truth distribution
  double margin = 0.2;
  MarginMode margin_mode = MarginMode::PercentileBand;
  std::uint64_t master_seed = 1;
  std::string out_path;
  bool fixed_ground_truth = false;
  int threads = 1;
  /// Minimum density of the unperturbed ground truth, in units of 1/(2pi).
  double positivity_floor = 0.2;
  /// Angles tried when minimizing the bound over rotations of rho.
  int rotation_grid = 256;
  /// Golden-section steps polishing the best grid angle (0 = grid only).
  int rotation_refine = 60;
  /// The algorithms debias with sigma * this factor (1 = sigma known exactly).
  double sigma_factor = 1.0;
};

/// Applies one `key = value` setting; throws MraError(Config) on bad input.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);
/// Flat `key = value` lines; '#' starts a comment.
void apply_config_text(ExperimentConfig& cfg, std::string_view text);
void load_config_file(ExperimentConfig& cfg, const std::string& path);
/// Grid syntax: "a,b,c" or "lo:hi:count" for count log-spaced points.
std::vector<double> parse_grid(std::string_view text);
std::vector<double> log_grid(double lo, double hi, int count);

/// Full-size preset: n = 1e6 and 400 (SNR sweep) or 800 (n sweep) trials.
void apply_paper_scale(ExperimentConfig& cfg);
/// Validates and fills the default grid for the experiment.
ExperimentConfig resolve(const ExperimentConfig& cfg);

struct CsvRow {
  std::string experiment;
  std::string algorithm;
  std::string grid_param_name;
  double grid_param_value = 0.0;
  int trials = 0;
  int failures = 0;
  std::optional<double> median_error, lower, upper;
  std::optional<double> s_b, bound;
};

struct ExperimentResult {
  std::vector<CsvRow> rows;
  int failed_trials = 0;
};

ExperimentResult run_snr_sweep(const ExperimentConfig& cfg);
ExperimentResult run_n_sweep(const ExperimentConfig& cfg);
ExperimentResult run_bound_sweep(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// One point of the bound sweep for a single ground truth.
struct BoundPoint {
  double eta = 0.0;
  double s_b = 0.0;
  double norm_sq = 0.0;        // ||x||^2
  std::optional<double> error; // relative, continuous alignment; empty if recovery failed
  std::optional<double> bound; // absolute squared-norm bound; empty if not applicable
  bool conditions_met = false;
};

/// Bound sweep for the ground truth of `trial`, one point per eta in the grid.
std::vector<BoundPoint> bound_sweep_points(const ExperimentConfig& cfg, int trial);

std::string to_csv(const std::vector<CsvRow>& rows);
void write_csv(const std::vector<CsvRow>& rows, const std::string& path);

/// Seed for (experiment, grid point, trial, stream), mixed from the master seed.
std::uint64_t trial_seed(std::uint64_t master, ExperimentKind kind, std::uint64_t grid_index,
                         std::uint64_t trial_index, std::uint64_t stream);

/// Runs fn(0..count-1) on `threads` workers; each index runs exactly once.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace mra
