#pragma once

// Grid kernels. Every kernel has a plain serial reference and an OpenMP
// version; the reference stays in the library so tests and the benchmark can
// compare the two. Parallel versions never reduce across threads: each
// thread writes its own rows and the final sums run serially in index order,
// so results do not depend on the thread count.

#include <complex>
#include <span>
#include <vector>

#include "sfwm/spectra.hpp"

namespace sfwm::kernels {

// One segment in SI units.
struct SegmentModel {
  double length = 0.0;     // m
  double tau_s = 0.0;      // s/m
  double tau_i = 0.0;      // s/m
  double omega_s0 = 0.0;   // rad/s
  double omega_i0 = 0.0;   // rad/s
  const dispersion::DispersionCurve* curve = nullptr;  // Full mode only
};

struct JsaProblem {
  spectra::Axis signal;
  spectra::Axis idler;
  double omega_pc = 0.0;
  double sigma_p = 0.0;
  spectra::DeltaKModel model = spectra::DeltaKModel::Linearized;
  std::vector<SegmentModel> segments;
};

JsaProblem make_problem(const spectra::AssemblySpec& assembly, const spectra::PumpSpec& pump,
                        const spectra::FrequencyGrid& grid);

// Reference: evaluates the public pump_envelope / delta_k / phi_chain per point.
void fill_jsa_serial(const spectra::AssemblySpec& assembly, const spectra::PumpSpec& pump,
                     const spectra::FrequencyGrid& grid,
                     std::span<std::complex<double>> out);

// Row-parallel fill with the per-segment arithmetic inlined.
void fill_jsa_parallel(const JsaProblem& problem, std::span<std::complex<double>> out);

// g2 = 1 + numerator / denominator with trapezoid weights on both axes.
struct G2Sums {
  double numerator = 0.0;
  double denominator = 0.0;
  double g2() const { return 1.0 + numerator / denominator; }
};

G2Sums g2_sums_serial(std::span<const std::complex<double>> f, const spectra::Axis& signal,
                      const spectra::Axis& idler);

G2Sums g2_sums_parallel(std::span<const std::complex<double>> f, const spectra::Axis& signal,
                        const spectra::Axis& idler);

// Trapezoid projection of |f|^2 onto the signal (idler) axis.
std::vector<double> project_serial(std::span<const std::complex<double>> f,
                                   const spectra::Axis& signal, const spectra::Axis& idler,
                                   spectra::Side side);

std::vector<double> project_parallel(std::span<const std::complex<double>> f,
                                     const spectra::Axis& signal, const spectra::Axis& idler,
                                     spectra::Side side);

}  // namespace sfwm::kernels
