#pragma once

// Step-index equivalent model of a photonic crystal fiber segment.
//
// The core is fused silica (three-term Sellmeier), the holey cladding is
// replaced by a homogeneous medium whose index mixes silica and air by the
// air-filling fraction. The fundamental mode is found from the step-index
// eigenvalue equation, and dispersion quantities follow from central
// differences of k(omega).

#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

namespace sfwm::dispersion {

inline constexpr double kSellmeierMinNm = 300.0;
inline constexpr double kSellmeierMaxNm = 2000.0;

struct FiberSegment {
  std::string label;
  double core_radius_nm = 0.0;
  double air_fill = 0.0;
  double length_m = 0.0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class CladdingRule {
  IndexAverage,         // n_cl = (1 - f) n_si + f
  PermittivityAverage,  // n_cl^2 = (1 - f) n_si^2 + f
};

enum class ModeEquation {
  VectorHE11,  // exact step-index HE11 characteristic equation
  ScalarLP01,  // weakly-guiding approximation
};

struct ModelOptions {
  CladdingRule cladding = CladdingRule::IndexAverage;
  ModeEquation mode = ModeEquation::VectorHE11;
};

// Fused silica index from the Malitson Sellmeier fit. Valid on [300, 2000] nm.
double silica_refractive_index(double wavelength_nm);

double cladding_index(double wavelength_nm, double air_fill,
                      CladdingRule rule = CladdingRule::IndexAverage);

double effective_index(const FiberSegment& segment, double wavelength_nm,
                       const ModelOptions& options = {});

// k(lambda) in rad/m.
double propagation_constant(const FiberSegment& segment, double wavelength_nm,
                            const ModelOptions& options = {});

// k(omega) in rad/m for omega in rad/s.
double propagation_constant_at(const FiberSegment& segment, double omega,
                               const ModelOptions& options = {});

// dk/domega in s/m.
double group_slowness(const FiberSegment& segment, double wavelength_nm,
                      const ModelOptions& options = {});

// d^2k/domega^2 in ps^2/m.
double gvd(const FiberSegment& segment, double wavelength_nm,
           const ModelOptions& options = {});

// Zero-dispersion wavelengths in [lo_nm, hi_nm], ascending, polished to 0.01 nm.
std::vector<double> find_zdw(const FiberSegment& segment, double lo_nm, double hi_nm,
                             const ModelOptions& options = {});

// Relative finite-difference step used by group_slowness and gvd.
inline constexpr double kDerivativeStep = 1e-4;

enum class CurveProvenance { Model, Measured };

// Tabulated k(lambda). Interpolation is local (six-point Lagrange in omega),
// so k between samples is accurate to far below the phase-mismatch scale.
class DispersionCurve {
 public:
  DispersionCurve(std::vector<double> wavelength_nm, std::vector<double> k_rad_per_m,
                  CurveProvenance provenance);

  const std::vector<double>& wavelength_nm() const { return wavelength_nm_; }
  const std::vector<double>& k_rad_per_m() const { return k_; }
  CurveProvenance provenance() const { return provenance_; }
  const std::string& source_label() const { return source_label_; }
  void set_source_label(std::string label) { source_label_ = std::move(label); }

  double min_omega() const { return omega_.front(); }
  double max_omega() const { return omega_.back(); }

  // Throws DomainError outside the sampled range.
  double k_at(double omega) const;

 private:
  std::vector<double> wavelength_nm_;
  std::vector<double> k_;
  std::vector<double> omega_;    // ascending
  std::vector<double> k_omega_;  // matches omega_
  CurveProvenance provenance_;
  std::string source_label_;
};

// Samples the model uniformly in omega between the two wavelengths.
DispersionCurve model_curve(const FiberSegment& segment, double lo_nm, double hi_nm,
                            std::size_t n_points, const ModelOptions& options = {});

struct CurveRow {
  double wavelength_nm;
  double n_eff;
  double k_rad_per_m;
  double k1_ps_per_m;
  double beta2_ps2_per_m;
};

// Rows for the exported dispersion table on an evenly spaced wavelength grid.
std::vector<CurveRow> tabulate(const FiberSegment& segment, double lo_nm, double hi_nm,
                               double step_nm, const ModelOptions& options = {});

struct GvdSample {
  double wavelength_nm;
  double gvd_ps2_per_m;
};

struct StructureFit {
  double core_radius_nm;
  double air_fill;
  double residual;  // sum of squared gvd residuals, (ps^2/m)^2
  int iterations;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, StructureFit best)
      : std::runtime_error(what), best_(best) {}
  const StructureFit& best_so_far() const { return best_; }

 private:
  StructureFit best_;
};

struct FitOptions {
  int max_iterations = 100;
  double parameter_tolerance = 1e-9;  // relative step size that ends the search
  ModelOptions model;
};

// Levenberg-Marquardt least squares of model gvd against samples over (r, f).
StructureFit fit_structure(std::span<const GvdSample> samples, double initial_radius_nm,
                           double initial_air_fill, const FitOptions& options = {});

}  // namespace sfwm::dispersion
