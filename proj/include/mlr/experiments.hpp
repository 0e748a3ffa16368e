#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlr/polynomial.hpp"
#include "mlr/svg.hpp"

namespace mlr {

inline constexpr const char* kCodeVersion = "0.1.0";

enum class ExperimentKind {
  SweepCurvature,
  SweepNoise,
  ValidateHypersurface,
  ValidateCurveNd,
  Degeneracy,
  IntrinsicDim,
  Bend,
};

std::string to_string(ExperimentKind kind);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One experiment invocation: the kind, its parameter table, and the
/// presentation settings. Everything that influences the numbers lives in
/// (experiment, parameters, seed) and feeds the config hash.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::SweepCurvature;
  nlohmann::json parameters = nlohmann::json::object();
  uint64_t seed = 0;
  std::string out_dir = ".";
  std::string format = "csv";  // csv | json
  bool plot = false;

  /// FNV-1a over the canonical JSON of (experiment, parameters, seed).
  uint64_t config_hash() const;
};

struct NamedTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct PlotSpec {
  std::string name;
  svg::PlotOptions options;
  std::vector<svg::Series> series;
};

struct ExperimentResult {
  std::string name;
  NamedTable main;
  std::vector<NamedTable> extra_tables;
  std::vector<PlotSpec> plots;
  nlohmann::json metadata;  // config_hash, seed, code_version
  nlohmann::json summary;   // per-experiment scalar outcomes
};

/// Writes <name>.csv (and extra tables), <name>_meta.json, optional SVGs.
/// Returns the paths written.
std::vector<std::string> write_result(const ExperimentResult& result,
                                      const ExperimentConfig& config);

/// The 2D demo target used as the default for the curvature and noise
/// sweeps: 2x^2 + 2y^2 + 6xy + 3x + 4y + 10.
Polynomial demo_target_2d();

/// Default codimension-2 demo target in (x1, x2, y1, y2):
/// 3x1 - 2x2 + 2y1 + 5y2 + y2^3. Affine over the clean manifold, with a
/// cubic y2 term so the noise-variance effect on w_y2 is visible.
Polynomial demo_target_codim2();

/// Synthetic low-rank dataset: N x D with the first `rank` coordinates
/// i.i.d. uniform on [-scale, scale] and the rest identically zero.
Eigen::MatrixXd make_low_rank_dataset(int N, int D, int rank, uint64_t seed,
                                      double scale = 1.0);

/// Least-squares slope of log(err) against log(x); pairs with
/// non-positive entries are skipped.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& err);

ExperimentResult run_sweep_curvature(const ExperimentConfig& config);
ExperimentResult run_sweep_noise(const ExperimentConfig& config);
ExperimentResult run_validate_hypersurface(const ExperimentConfig& config);
ExperimentResult run_validate_curve_nd(const ExperimentConfig& config);
ExperimentResult run_degeneracy_demo(const ExperimentConfig& config);
ExperimentResult run_intrinsic_dim(const ExperimentConfig& config);
ExperimentResult run_bend(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace mlr
