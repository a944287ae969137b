#include <cmath>

#include "sfwm/kernels.hpp"
#include "sfwm/units.hpp"

namespace sfwm::kernels {

JsaProblem make_problem(const spectra::AssemblySpec& assembly, const spectra::PumpSpec& pump,
                        const spectra::FrequencyGrid& grid) {
  JsaProblem p;
  p.signal = grid.signal;
  p.idler = grid.idler;
  p.omega_pc = pump.center_omega();
  p.sigma_p = pump.sigma_p();
  p.model = assembly.model;
  p.segments.reserve(assembly.segments.size());
  for (const auto& seg : assembly.segments) {
    const auto& lin = seg.linearization;
    p.segments.push_back(SegmentModel{seg.length_m, lin.tau_s_ps_per_m * kPicosecond,
                                      lin.tau_i_ps_per_m * kPicosecond, lin.omega_s0(),
                                      lin.omega_i0(), seg.curve.get()});
  }
  return p;
}

void fill_jsa_serial(const spectra::AssemblySpec& assembly, const spectra::PumpSpec& pump,
                     const spectra::FrequencyGrid& grid,
                     std::span<std::complex<double>> out) {
  const std::size_t m = assembly.segments.size();
  std::vector<double> lengths(m);
  std::vector<double> dks(m);
  for (std::size_t n = 0; n < m; ++n) lengths[n] = assembly.segments[n].length_m;
  for (std::size_t s = 0; s < grid.signal.n; ++s) {
    const double ws = grid.signal.at(s);
    for (std::size_t i = 0; i < grid.idler.n; ++i) {
      const double wi = grid.idler.at(i);
      for (std::size_t n = 0; n < m; ++n) {
        dks[n] = spectra::delta_k(assembly.segments[n], ws, wi, assembly.model);
      }
      out[s * grid.idler.n + i] =
          spectra::pump_envelope(pump, ws, wi) * spectra::phi_chain(lengths, dks);
    }
  }
}

G2Sums g2_sums_serial(std::span<const std::complex<double>> f, const spectra::Axis& signal,
                      const spectra::Axis& idler) {
  const std::size_t ns = signal.n;
  const std::size_t ni = idler.n;
  G2Sums sums;
  double total = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t i = 0; i < ni; ++i) {
      total += signal.weight(s) * idler.weight(i) * std::norm(f[s * ni + i]);
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t t = 0; t < ns; ++t) {
      std::complex<double> overlap = 0.0;
      for (std::size_t i = 0; i < ni; ++i) {
        overlap += idler.weight(i) * std::conj(f[s * ni + i]) * f[t * ni + i];
      }
      sums.numerator += signal.weight(s) * signal.weight(t) * std::norm(overlap);
    }
  }
  sums.denominator = total * total;
  return sums;
}

std::vector<double> project_serial(std::span<const std::complex<double>> f,
                                   const spectra::Axis& signal, const spectra::Axis& idler,
                                   spectra::Side side) {
  const std::size_t ns = signal.n;
  const std::size_t ni = idler.n;
  std::vector<double> out(side == spectra::Side::Signal ? ns : ni, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t i = 0; i < ni; ++i) {
      const double v = std::norm(f[s * ni + i]);
      if (side == spectra::Side::Signal) {
        out[s] += idler.weight(i) * v;
      } else {
        out[i] += signal.weight(s) * v;
      }
    }
  }
  return out;
}

}  // namespace sfwm::kernels
