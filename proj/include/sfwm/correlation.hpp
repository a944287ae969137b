#pragma once

// Second-order coherence of one daughter field and the Schmidt decomposition
// of the joint spectral amplitude. Both paths use the same trapezoid weights,
// so they agree to rounding on any grid.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "sfwm/spectra.hpp"

namespace sfwm::correlation {

using spectra::Execution;

// g2 = 1 + sum_{s,s'} |sum_i f*(s,i) f(s',i)|^2 / (sum_{s,i} |f|^2)^2.
// Throws CorrelationError when the JSA is identically zero.
double g2_quadrature(const spectra::JsaGrid& jsa, Execution execution = Execution::Parallel);

double g2_quadrature(std::span<const std::complex<double>> amplitude,
                     const spectra::Axis& signal, const spectra::Axis& idler,
                     Execution execution = Execution::Parallel);

struct SchmidtResult {
  std::vector<double> singular_values;  // descending
  double schmidt_number = 1.0;          // (sum s^2)^2 / sum s^4
  double purity = 1.0;                  // 1 / K
  double g2 = 2.0;                      // 1 + purity
};

SchmidtResult schmidt_decompose(const spectra::JsaGrid& jsa);

SchmidtResult schmidt_decompose(std::span<const std::complex<double>> amplitude,
                                const spectra::Axis& signal, const spectra::Axis& idler);

struct G2Case {
  std::string configuration;
  spectra::AssemblySpec assembly;
  spectra::PumpSpec pump;
};

struct G2Row {
  std::string configuration;
  double total_length_m = 0.0;
  double pump_fwhm_nm = 0.0;
  double g2 = 0.0;
  double schmidt_number = 0.0;
  double purity = 0.0;
  spectra::FrequencyGrid grid;
};

// One row per case, each on its own auto-sized grid. Errors propagate.
std::vector<G2Row> g2_table(std::span<const G2Case> cases,
                            const spectra::GridOptions& options = {});

}  // namespace sfwm::correlation
