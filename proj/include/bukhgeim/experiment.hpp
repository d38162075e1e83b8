#pragma once

// Experiment configuration and the four pipeline commands behind the CLI.
// Every command writes a manifest.json next to its outputs that echoes the
// full config (defaults included), names every file written and carries a
// git-style hash of the config for provenance.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bukhgeim/reconstruction.hpp"

namespace bukhgeim {

struct DiagnosticsConfig {
  std::vector<double> shells{10.0, 20.0, 40.0};
  double p = 4.0;
  int radial_nodes = 2;
  int angular_nodes = 8;
  bool include_mu = true;
  std::vector<complex> z_samples{{0.0, 0.0}, {0.2, 0.1}, {-0.3, 0.2}};
  std::vector<complex> w_samples{{0.0, 0.0}, {0.25, -0.1}};

  // stationary-phase table
  TestFunction phase_function{TestFunctionKind::gaussian_bump, {}, 0.6, {1.0, 0.0}};
  complex phase_point{0.1, -0.05};
  std::vector<double> phase_moduli{16.0, 32.0, 64.0, 128.0};
  double phase_angle = 0.3;
  int phase_points_per_side = 512;
};

struct ExperimentConfig {
  double half_width = 1.0;
  int points_per_side = 64;
  ConductivityPreset conductivity = ConductivityPreset::complex_bump();
  double inner_radius = 20.0;
  int radial_nodes = 2;
  int angular_nodes = 8;
  double angle_offset = 0.0;
  WSampling w_sampling{4, 0.85};
  SolverOptions solver{1e-8, 200, 5, -1};
  ConjMode conj_mode = ConjMode::conjugated;
  ScatteringMethod method = ScatteringMethod::boundary;
  int threads = 1;
  std::uint64_t seed = 0;
  TestFunction weak_test_function{TestFunctionKind::gaussian_bump, {0.1, 0.05}, 0.5, {1.0, 0.0}};
  DiagnosticsConfig diagnostics{};

  GridSpec grid() const { return make_grid(half_width, points_per_side); }
  AnnulusQuadrature annulus() const;
};

/// Throws ConfigError on unknown keys' values, bad kinds or out-of-range
/// numbers. Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Non-fatal remarks about a valid config (for example a non power-of-two N).
std::vector<std::string> config_warnings(const ExperimentConfig& config);

/// Git blob hash of the canonical config JSON.
std::string config_provenance(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

enum class ExitStatus : int { success = 0, config_error = 2, partial_dataset = 3, not_contractive = 4 };

struct ForwardResult {
  ScatteringDataset dataset;
  ExitStatus status = ExitStatus::success;
};

struct ReconstructResult {
  PointwiseReconstruction reconstruction;
  ErrorMetrics potential_error;
  ErrorMetrics gamma_error;
  Matrix2 weak{};
  double weak_rel_error = 0.0;
  bool gamma_recovered = false;
};

/// dataset.bkds, dataset.csv, manifest.json.
ForwardResult cmd_forward(const ExperimentConfig& config, const std::filesystem::path& out);

/// Reads a dataset written by cmd_forward and writes q_rec_q12/q21.cfld,
/// gamma_rec.cfld, errors.csv and manifest.json. Ground truth comes from the
/// config's conductivity. Throws GridMismatch if the dataset was made on
/// another grid and PartialDataset if samples failed.
ReconstructResult cmd_reconstruct(const std::filesystem::path& dataset, const ExperimentConfig& config,
                                  const std::filesystem::path& out);

/// forward then reconstruct into out/, plus summary.csv.
ExitStatus cmd_roundtrip(const ExperimentConfig& config, const std::filesystem::path& out);

/// decay.csv and stationary_phase.csv.
void cmd_diagnostics(const ExperimentConfig& config, const std::filesystem::path& out);

/// Header of errors.csv and summary.csv.
inline constexpr const char* kErrorTableHeader =
    "preset,N,R,n_r,n_theta,relL2_Q,relL2_gamma,diag_noise_floor,weak_rel_error";

}  // namespace bukhgeim
