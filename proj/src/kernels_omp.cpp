#include <cmath>

#include "sfwm/kernels.hpp"

namespace sfwm::kernels {

namespace {

inline double segment_delta_k(const JsaProblem& p, const SegmentModel& seg, double ws,
                              double wi) {
  if (p.model == spectra::DeltaKModel::Linearized) {
    return seg.tau_s * (ws - seg.omega_s0) + seg.tau_i * (wi - seg.omega_i0);
  }
  return 2.0 * seg.curve->k_at(0.5 * (ws + wi)) - seg.curve->k_at(ws) - seg.curve->k_at(wi);
}

}  // namespace

void fill_jsa_parallel(const JsaProblem& p, std::span<std::complex<double>> out) {
  const std::size_t ns = p.signal.n;
  const std::size_t ni = p.idler.n;
  const double inv_4sigma2 = 1.0 / (4.0 * p.sigma_p * p.sigma_p);
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < ns; ++s) {
    const double ws = p.signal.at(s);
    std::complex<double>* row = out.data() + s * ni;
    for (std::size_t i = 0; i < ni; ++i) {
      const double wi = p.idler.at(i);
      const double detune = ws + wi - 2.0 * p.omega_pc;
      const double alpha = std::exp(-detune * detune * inv_4sigma2);
      double re = 0.0;
      double im = 0.0;
      double accumulated = 0.0;
      for (const auto& seg : p.segments) {
        const double half = 0.5 * segment_delta_k(p, seg, ws, wi) * seg.length;
        const double amp = half == 0.0 ? seg.length : seg.length * std::sin(half) / half;
        const double phase = half + accumulated;
        re += amp * std::cos(phase);
        im += amp * std::sin(phase);
        accumulated += 2.0 * half;
      }
      row[i] = {alpha * re, alpha * im};
    }
  }
}

G2Sums g2_sums_parallel(std::span<const std::complex<double>> f, const spectra::Axis& signal,
                        const spectra::Axis& idler) {
  const std::size_t ns = signal.n;
  const std::size_t ni = idler.n;
  // sqrt(w_i)-weighted copy split into real and imaginary planes.
  std::vector<double> re(ns * ni);
  std::vector<double> im(ns * ni);
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t i = 0; i < ni; ++i) {
      const double w = std::sqrt(idler.weight(i));
      re[s * ni + i] = w * f[s * ni + i].real();
      im[s * ni + i] = w * f[s * ni + i].imag();
    }
  }

  std::vector<double> row_num(ns, 0.0);
  std::vector<double> row_diag(ns, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t s = 0; s < ns; ++s) {
    const double* ar = re.data() + s * ni;
    const double* ai = im.data() + s * ni;
    double acc = 0.0;
    for (std::size_t t = s; t < ns; ++t) {
      const double* br = re.data() + t * ni;
      const double* bi = im.data() + t * ni;
      // conj(a) . b
      double gr = 0.0;
      double gi = 0.0;
      for (std::size_t i = 0; i < ni; ++i) {
        gr += ar[i] * br[i] + ai[i] * bi[i];
        gi += ar[i] * bi[i] - ai[i] * br[i];
      }
      const double g2 = gr * gr + gi * gi;
      if (t == s) {
        row_diag[s] = gr;
        acc += signal.weight(t) * g2;
      } else {
        acc += 2.0 * signal.weight(t) * g2;
      }
    }
    row_num[s] = signal.weight(s) * acc;
  }

  G2Sums sums;
  double total = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    sums.numerator += row_num[s];
    total += signal.weight(s) * row_diag[s];
  }
  sums.denominator = total * total;
  return sums;
}

std::vector<double> project_parallel(std::span<const std::complex<double>> f,
                                     const spectra::Axis& signal, const spectra::Axis& idler,
                                     spectra::Side side) {
  const std::size_t ns = signal.n;
  const std::size_t ni = idler.n;
  if (side == spectra::Side::Signal) {
    std::vector<double> out(ns, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < ns; ++s) {
      double acc = 0.0;
      for (std::size_t i = 0; i < ni; ++i) acc += idler.weight(i) * std::norm(f[s * ni + i]);
      out[s] = acc;
    }
    return out;
  }
  std::vector<double> out(ni, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < ni; ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < ns; ++s) acc += signal.weight(s) * std::norm(f[s * ni + i]);
    out[i] = acc;
  }
  return out;
}

}  // namespace sfwm::kernels
