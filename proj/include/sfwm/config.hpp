#pragma once

// Run configuration. JSON text, every object checked for unknown keys and
// every value validated before any computation starts. Errors are
// ConfigError carrying the path of the offending field, e.g.
// "segments[1].air_fill".

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfwm/dispersion.hpp"
#include "sfwm/phasematch.hpp"
#include "sfwm/spectra.hpp"

namespace sfwm::config {

// Published linearization used instead of solving the dispersion model.
struct PhaseMatchOverride {
  double lambda_s0_nm = 0.0;
  std::optional<double> lambda_i0_nm;  // cross-checked against energy conservation
  double tau_s_ps_per_m = 0.0;
  double theta_rad = 0.0;
  int tau_i_sign = +1;
};

struct SegmentConfig {
  dispersion::FiberSegment segment;
  std::optional<PhaseMatchOverride> phase_match;
};

struct AssemblyPiece {
  std::string segment;                 // label in `segments`
  std::optional<double> length_m;      // overrides the segment length
};

struct AssemblyConfig {
  std::string label;
  std::vector<AssemblyPiece> pieces;
};

struct FilterConfig {
  double fwhm_nm = 0.0;
  double scan_start_nm = 0.0;
  double scan_stop_nm = 0.0;
  std::size_t scan_points = 0;
  // "assembly" integrates |phi|^2 directly, "jsa" uses the built grid.
  std::string source = "assembly";

  std::vector<double> centers_nm() const;
};

struct PlannerConfig {
  double target_total_length_m = 0.0;
  std::optional<double> tolerance_m;
  std::size_t max_segments = 0;
  std::string method = "exhaustive";  // or "greedy"
  std::vector<std::string> pool;      // segment labels; empty means all
  std::size_t enumeration_cap = 100000;
};

struct DispersionConfig {
  dispersion::ModelOptions model;
  std::pair<double, double> range_nm{850.0, 1450.0};
  double step_nm = 1.0;
  std::pair<double, double> zdw_range_nm{900.0, 1250.0};
  // Sampling of k(omega) for the full delta-k model.
  std::pair<double, double> curve_range_nm{800.0, 1700.0};
  std::size_t curve_points = 4001;
};

struct GvmConfig {
  std::pair<double, double> pump_range_nm{950.0, 1100.0};
  std::size_t points = 151;
  std::vector<std::string> segments;  // empty means all
};

struct FitConfig {
  std::filesystem::path gvd_csv;  // resolved against the config directory
  double initial_core_radius_nm = 0.0;
  double initial_air_fill = 0.0;
  // Relative Gaussian noise added to the samples (seeded); 0 leaves them as read.
  double noise_fraction = 0.0;
  int max_iterations = 100;
};

struct G2TableConfig {
  std::vector<double> pump_fwhm_nm;
};

struct RunConfig {
  phasematch::PumpSpec pump;
  std::vector<SegmentConfig> segments;
  std::vector<AssemblyConfig> assemblies;
  spectra::GridOptions grid;
  spectra::DeltaKModel model = spectra::DeltaKModel::Linearized;
  std::optional<FilterConfig> filter;
  std::optional<PlannerConfig> planner;
  DispersionConfig dispersion;
  GvmConfig gvm;
  std::optional<FitConfig> fit;
  std::optional<G2TableConfig> g2_table;
  std::optional<std::filesystem::path> output_dir;  // relative to the working directory

  const SegmentConfig& segment(const std::string& label) const;
};

// Parses and validates. `base_dir` resolves relative paths inside the config.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

}  // namespace sfwm::config
