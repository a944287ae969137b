#pragma once

// Joint spectral amplitude of photon pairs from a spliced fiber assembly.
//
// f(ws, wi) = alpha(ws, wi) * phi(ws, wi), with a Gaussian pump envelope
// alpha and the phase-matching function phi of a chain of homogeneous
// segments. Each segment contributes L sinc(dk L / 2) exp(i dk L / 2),
// rotated by the phase accumulated in the segments before it.

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sfwm/dispersion.hpp"
#include "sfwm/phasematch.hpp"

namespace sfwm::spectra {

using phasematch::PhaseMatchPoint;
using phasematch::PumpSpec;

enum class DeltaKModel { Linearized, Full };

struct AssemblySegment {
  std::string label;
  double length_m = 0.0;
  PhaseMatchPoint linearization;
  // Required in Full mode only.
  std::shared_ptr<const dispersion::DispersionCurve> curve;
};

struct AssemblySpec {
  std::vector<AssemblySegment> segments;
  DeltaKModel model = DeltaKModel::Linearized;

  void validate() const;
  double total_length() const;
};

// Uniformly spaced axis of angular frequencies, rad/s.
struct Axis {
  double start = 0.0;
  double step = 0.0;
  std::size_t n = 0;

  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  double back() const { return at(n - 1); }
  // Trapezoid weight of sample i.
  double weight(std::size_t i) const {
    return (i == 0 || i + 1 == n) ? 0.5 * step : step;
  }
  static Axis spanning(double lo, double hi, std::size_t n);
};

struct FrequencyGrid {
  Axis signal;
  Axis idler;
};

struct GridOptions {
  std::size_t ns = 512;
  std::size_t ni = 512;
  std::optional<std::pair<double, double>> signal_range_nm;
  std::optional<std::pair<double, double>> idler_range_nm;
  double sinc_lobes = 12.0;           // half-width of each segment window in sinc lobes
  double max_phase_step = kPiOver8;   // sum |dk_n| L_n change between samples
  double samples_per_sigma = 3.0;     // pump envelope resolution
  std::size_t max_cells = std::size_t{1} << 26;  // auto_grid refuses larger ns * ni

  static constexpr double kPiOver8 = 0.39269908169872414;
};

struct GridRequirement {
  double max_signal_step;
  double max_idler_step;
  std::size_t ns;
  std::size_t ni;
};

// Largest admissible spacings and the matching point counts for the given spans.
GridRequirement grid_requirement(const AssemblySpec& assembly, const PumpSpec& pump,
                                 double signal_span, double idler_span,
                                 const GridOptions& options = {});

// Grid covering every segment's phase-matching window, with point counts
// raised to satisfy grid_requirement. Throws GridResolutionError when the
// required grid exceeds max_cells (very short segments have very wide windows).
FrequencyGrid auto_grid(const AssemblySpec& assembly, const PumpSpec& pump,
                        const GridOptions& options = {});

// Throws GridResolutionError carrying the minimum point counts.
void check_resolution(const FrequencyGrid& grid, const AssemblySpec& assembly,
                      const PumpSpec& pump, const GridOptions& options = {});

double pump_envelope(const PumpSpec& pump, double omega_s, double omega_i);

// Linearized: tau_s (ws - ws0) + tau_i (wi - wi0). Full: 2k((ws+wi)/2) - k(ws) - k(wi).
double delta_k(const AssemblySegment& segment, double omega_s, double omega_i,
               DeltaKModel model = DeltaKModel::Linearized);

// Linearized delta_k of a bare phase-match point.
double delta_k(const PhaseMatchPoint& point, double omega_s, double omega_i);

std::complex<double> phi_homogeneous(double length_m, double delta_k);

// Coherent sum over segments; lengths and mismatches in splice order.
std::complex<double> phi_chain(std::span<const double> lengths,
                               std::span<const double> delta_ks);

std::complex<double> phi_assembly(const AssemblySpec& assembly, double omega_s,
                                  double omega_i);

enum class Execution { Serial, Parallel };

class JsaGrid {
 public:
  JsaGrid(FrequencyGrid grid, std::vector<std::complex<double>> amplitude, PumpSpec pump,
          AssemblySpec assembly);

  const FrequencyGrid& grid() const { return grid_; }
  const PumpSpec& pump() const { return pump_; }
  const AssemblySpec& assembly() const { return assembly_; }
  std::size_t ns() const { return grid_.signal.n; }
  std::size_t ni() const { return grid_.idler.n; }

  // Row-major, signal index outer.
  std::span<const std::complex<double>> amplitude() const { return amplitude_; }
  std::complex<double> at(std::size_t s, std::size_t i) const { return amplitude_[s * ni() + i]; }
  double intensity(std::size_t s, std::size_t i) const { return std::norm(at(s, i)); }

 private:
  FrequencyGrid grid_;
  std::vector<std::complex<double>> amplitude_;
  PumpSpec pump_;
  AssemblySpec assembly_;
};

// f = alpha * phi on every grid point. Refuses under-resolved grids.
JsaGrid build_jsa(const AssemblySpec& assembly, const PumpSpec& pump,
                  const FrequencyGrid& grid, Execution execution = Execution::Parallel,
                  const GridOptions& options = {});

enum class AxisKind { AngularFrequency, WavelengthNm };
enum class Normalization { Raw, Peak };

struct Spectrum1D {
  AxisKind axis_kind = AxisKind::AngularFrequency;
  std::vector<double> axis;    // ascending
  std::vector<double> values;  // >= 0
  Normalization normalization = Normalization::Raw;

  Spectrum1D peak_normalized() const;
  // Re-expresses an angular-frequency axis in nm (values unchanged, order reversed).
  Spectrum1D in_wavelength() const;
};

enum class Side { Signal, Idler };

// Trapezoid projection of |f|^2 onto one axis.
Spectrum1D marginal(const JsaGrid& jsa, Side side = Side::Signal);

struct FilterSpec {
  double center_nm = 0.0;
  double fwhm_nm = 0.0;

  void validate() const;
  // Width of exp[-(w - w')^2 / sigma_s^2] whose intensity FWHM is fwhm_nm.
  double sigma_s() const;
};

struct FilterScan {
  Spectrum1D spectrum;                      // axis: centers in nm
  std::vector<std::size_t> outside_support; // indices of centers scored zero
};

// Filter scan from the signal marginal of a built JSA.
FilterScan filter_scan(const JsaGrid& jsa, double filter_fwhm_nm,
                       std::span<const double> centers_nm);

// Filter scan of |phi(ws, 2 w_pc - ws)|^2 integrated on a signal grid fine
// enough for the filter.
FilterScan filter_scan(const AssemblySpec& assembly, const PumpSpec& pump,
                       double filter_fwhm_nm, std::span<const double> centers_nm,
                       const GridOptions& options = {});

}  // namespace sfwm::spectra
