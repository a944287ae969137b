#include "sfwm/correlation.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "sfwm/errors.hpp"
#include "sfwm/kernels.hpp"

namespace sfwm::correlation {

double g2_quadrature(std::span<const std::complex<double>> amplitude,
                     const spectra::Axis& signal, const spectra::Axis& idler,
                     Execution execution) {
  if (signal.n < 2 || idler.n < 2 || amplitude.size() != signal.n * idler.n) {
    throw std::invalid_argument("g2_quadrature: amplitude does not match a 2x2 or larger grid");
  }
  const auto sums = execution == Execution::Serial
                        ? kernels::g2_sums_serial(amplitude, signal, idler)
                        : kernels::g2_sums_parallel(amplitude, signal, idler);
  if (!(sums.denominator > 0.0) || !std::isfinite(sums.denominator)) {
    throw CorrelationError("g2 undefined: joint spectral amplitude is zero");
  }
  return sums.g2();
}

double g2_quadrature(const spectra::JsaGrid& jsa, Execution execution) {
  return g2_quadrature(jsa.amplitude(), jsa.grid().signal, jsa.grid().idler, execution);
}

SchmidtResult schmidt_decompose(std::span<const std::complex<double>> amplitude,
                                const spectra::Axis& signal, const spectra::Axis& idler) {
  const std::size_t ns = signal.n;
  const std::size_t ni = idler.n;
  if (ns < 2 || ni < 2 || amplitude.size() != ns * ni) {
    throw std::invalid_argument("schmidt_decompose: amplitude does not match a 2x2 or larger grid");
  }
  Eigen::MatrixXcd m(ns, ni);
  for (std::size_t s = 0; s < ns; ++s) {
    const double ws = std::sqrt(signal.weight(s));
    for (std::size_t i = 0; i < ni; ++i) {
      m(s, i) = ws * std::sqrt(idler.weight(i)) * amplitude[s * ni + i];
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  if (svd.info() != Eigen::Success) {
    throw NumericError("singular value decomposition did not converge", 0.0);
  }
  const Eigen::VectorXd sv = svd.singularValues();

  SchmidtResult out;
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  double s2 = 0.0;
  double s4 = 0.0;
  for (double v : out.singular_values) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  if (!(s2 > 0.0)) throw CorrelationError("Schmidt decomposition undefined: zero amplitude");
  out.schmidt_number = s2 * s2 / s4;
  out.purity = s4 / (s2 * s2);
  out.g2 = 1.0 + out.purity;
  return out;
}

SchmidtResult schmidt_decompose(const spectra::JsaGrid& jsa) {
  return schmidt_decompose(jsa.amplitude(), jsa.grid().signal, jsa.grid().idler);
}

std::vector<G2Row> g2_table(std::span<const G2Case> cases, const spectra::GridOptions& options) {
  std::vector<G2Row> rows;
  rows.reserve(cases.size());
  for (const auto& c : cases) {
    const auto grid = spectra::auto_grid(c.assembly, c.pump, options);
    const auto jsa = spectra::build_jsa(c.assembly, c.pump, grid, Execution::Parallel, options);
    const auto schmidt = schmidt_decompose(jsa);
    G2Row row;
    row.configuration = c.configuration;
    row.total_length_m = c.assembly.total_length();
    row.pump_fwhm_nm = c.pump.fwhm_nm;
    row.g2 = g2_quadrature(jsa);
    row.schmidt_number = schmidt.schmidt_number;
    row.purity = schmidt.purity;
    row.grid = grid;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sfwm::correlation
