#pragma once

#include <optional>
#include <vector>

#include "sfwm/dispersion.hpp"

namespace sfwm::phasematch {

struct Gain {
  double gamma_per_w_km = 0.0;
  double peak_power_w = 0.0;
  // G up to a constant factor: G is proportional to gamma * P_p.
  double coefficient() const { return gamma_per_w_km * 1e-3 * peak_power_w; }
};

struct PumpSpec {
  double center_wavelength_nm = 0.0;
  double fwhm_nm = 0.0;
  std::optional<Gain> gain;

  void validate() const;
  double center_omega() const;
  // Envelope width in rad/s for an amplitude exp[-(w - w_pc)^2 / (2 sigma_p^2)],
  // so that the intensity FWHM in omega matches fwhm_nm.
  double sigma_p() const;
};

// Linearization of one segment around its perfect phase-matching point.
struct PhaseMatchPoint {
  double pump_wavelength_nm = 0.0;
  double lambda_s0_nm = 0.0;
  double lambda_i0_nm = 0.0;
  double tau_s_ps_per_m = 0.0;
  double tau_i_ps_per_m = 0.0;
  double theta_rad = 0.0;
  bool ambiguous = false;  // more than one nondegenerate root in the search window

  double omega_s0() const;
  // 2 w_pc - w_s0, exact energy conservation.
  double omega_i0() const;
};

double theta_from(double tau_s, double tau_i);

// Idler wavelength fixed by 2/lambda_p = 1/lambda_s + 1/lambda_i.
double idler_wavelength_nm(double pump_nm, double signal_nm);

// Builds a point from (lambda_s0, tau_s, tau_i); lambda_i0 and theta are derived.
PhaseMatchPoint make_point(double pump_nm, double lambda_s0_nm, double tau_s_ps_per_m,
                           double tau_i_ps_per_m);

// Builds a point from tabulated values where only |theta| is known.
// tau_i = sign * tau_s * tan(theta).
PhaseMatchPoint from_published(double pump_nm, double lambda_s0_nm, double tau_s_ps_per_m,
                               double theta_rad, int tau_i_sign = +1);

struct SolveOptions {
  dispersion::ModelOptions model;
  double min_detuning_nm = 1.0;   // excludes the degenerate root at the pump
  double max_signal_nm = dispersion::kSellmeierMaxNm;
  double coarse_step_nm = 1.0;
};

// 2k(w_p) - k(w_s) - k(2w_p - w_s), rad/m. The nonlinear 2 gamma P term is omitted.
double momentum_mismatch(const dispersion::FiberSegment& segment, double pump_nm,
                         double signal_nm, const dispersion::ModelOptions& model = {});

// Nondegenerate phase-matching root on the red-signal branch (lambda_s0 > pump).
// Throws PhaseMatchError when there is none.
PhaseMatchPoint solve_phase_match(const dispersion::FiberSegment& segment, double pump_nm,
                                  const SolveOptions& options = {});

inline PhaseMatchPoint solve_phase_match(const dispersion::FiberSegment& segment,
                                         const PumpSpec& pump, const SolveOptions& options = {}) {
  return solve_phase_match(segment, pump.center_wavelength_nm, options);
}

struct GvmRow {
  double pump_nm;
  std::optional<PhaseMatchPoint> point;
};

std::vector<GvmRow> gvm_curve(const dispersion::FiberSegment& segment, double lo_nm,
                              double hi_nm, std::size_t n_points,
                              const SolveOptions& options = {});

struct AgvmRoots {
  std::optional<double> pump_for_tau_i_zero;
  std::optional<double> pump_for_tau_s_zero;
};

// Pump wavelengths where tau_i and tau_s change sign, scanned on a grid of
// `scan_step_nm` and polished to 1e-3 nm.
AgvmRoots agvm_roots(const dispersion::FiberSegment& segment, double lo_nm, double hi_nm,
                     const SolveOptions& options = {}, double scan_step_nm = 5.0);

}  // namespace sfwm::phasematch
