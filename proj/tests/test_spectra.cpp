#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/kernels.hpp"
#include "sfwm/spectra.hpp"
#include "sfwm/units.hpp"

using namespace sfwm;
using namespace sfwm::spectra;

namespace {

// Composite Simpson integral of exp(i dk z) over [0, L]; n is rounded up to odd.
std::complex<double> z_quadrature(double length, double dk, std::size_t n) {
  if (n % 2 == 0) ++n;
  const double h = length / static_cast<double>(n - 1);
  std::complex<double> sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += w * std::polar(1.0, dk * h * static_cast<double>(k));
  }
  return sum * (h / 3.0);
}

// Piecewise-constant dk(z): each segment integrated on its own Simpson grid.
std::complex<double> chain_quadrature(const std::vector<double>& lengths,
                                      const std::vector<double>& dks, std::size_t total_points) {
  double total = 0.0;
  for (double l : lengths) total += l;
  std::complex<double> sum = 0.0;
  double phase = 0.0;
  for (std::size_t n = 0; n < lengths.size(); ++n) {
    const auto pts = std::max<std::size_t>(
        3, static_cast<std::size_t>(static_cast<double>(total_points) * lengths[n] / total));
    sum += std::polar(1.0, phase) * z_quadrature(lengths[n], dks[n], pts);
    phase += dks[n] * lengths[n];
  }
  return sum;
}

std::vector<double> signal_profile(const AssemblySpec& a, const Axis& axis, double wpc) {
  std::vector<double> out(axis.n);
  for (std::size_t s = 0; s < axis.n; ++s) {
    const double ws = axis.at(s);
    out[s] = std::norm(phi_assembly(a, ws, 2.0 * wpc - ws));
  }
  return out;
}

int maxima_above(const std::vector<double>& v, double fraction) {
  const double peak = *std::max_element(v.begin(), v.end());
  int count = 0;
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    if (v[k] > v[k - 1] && v[k] >= v[k + 1] && v[k] > fraction * peak) ++count;
  }
  return count;
}

double peak_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

TEST_CASE("pump envelope") {
  const auto pump = fixtures::pump();
  const double wpc = pump.center_omega();
  const double sp = pump.sigma_p();
  CHECK(pump_envelope(pump, wpc + 1e13, wpc - 1e13) == doctest::Approx(1.0));
  CHECK(pump_envelope(pump, wpc + sp, wpc + sp) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(pump_envelope(pump, wpc + 3e12, wpc - 1e12) == pump_envelope(pump, wpc - 1e12, wpc + 3e12));
}

TEST_CASE("unit conversions") {
  CHECK(omega_from_nm(1000.0) == doctest::Approx(2.0 * kPi * 299792458.0 / 1e-6).epsilon(1e-15));
  CHECK(nm_from_omega(omega_from_nm(1413.6)) == doctest::Approx(1413.6).epsilon(1e-15));
}

TEST_CASE("linearized delta k") {
  const auto p = fixtures::published("S1");
  CHECK(delta_k(p, p.omega_s0(), p.omega_i0()) == 0.0);
  // 1 rad/ps of signal detuning at 3.2 ps/m.
  const auto flat = phasematch::make_point(1070.0, 1409.9, 3.2, 0.0);
  CHECK(delta_k(flat, flat.omega_s0() + 1e12, flat.omega_i0()) == doctest::Approx(3.2).epsilon(1e-12));
  CHECK(delta_k(flat, flat.omega_s0() + 2e12, flat.omega_i0() + 5e12) ==
        delta_k(flat, flat.omega_s0() + 2e12, flat.omega_i0() - 7e12));
}

TEST_CASE("full delta k agrees with the linearization near the anchor") {
  const auto seg = fixtures::structure("S2");
  const auto point = phasematch::solve_phase_match(seg, 1070.0);
  auto curve = std::make_shared<const dispersion::DispersionCurve>(
      dispersion::model_curve(seg, 800.0, 1700.0, 4001));
  const AssemblySegment a{"S2", 0.3, point, curve};
  const double ws = point.omega_s0() + 2e11;
  const double wi = point.omega_i0() - 2e11;
  CHECK(std::abs(delta_k(a, point.omega_s0(), point.omega_i0(), DeltaKModel::Full)) < 1e-4);
  CHECK(delta_k(a, ws, wi, DeltaKModel::Full) ==
        doctest::Approx(delta_k(a, ws, wi, DeltaKModel::Linearized)).epsilon(0.01));
  CHECK_THROWS_AS(delta_k(a, omega_from_nm(2000.0), wi, DeltaKModel::Full), DomainError);
}

TEST_CASE("homogeneous phase-matching function") {
  CHECK(phi_homogeneous(0.3, 0.0) == std::complex<double>(0.3, 0.0));
  CHECK(std::abs(phi_homogeneous(0.3, 2.0 * kPi / 0.3)) < 1e-15);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> len(0.1, 2.0);
  std::uniform_real_distribution<double> phase(-3.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    const double l = len(rng);
    const double dk = phase(rng) / l;
    const double ref = std::abs(z_quadrature(l, dk, 10000));
    CHECK(std::abs(phi_homogeneous(l, dk)) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("identical segments collapse to one homogeneous piece") {
  const auto a = fixtures::assembly({"S2", "S2"}, 0.3);
  const auto b = fixtures::assembly({"S2"}, 0.6);
  const auto pump = fixtures::pump();
  const auto grid = auto_grid(b, pump);
  for (std::size_t s = 0; s < grid.signal.n; s += 7) {
    for (std::size_t i = 0; i < grid.idler.n; i += 11) {
      const auto x = phi_assembly(a, grid.signal.at(s), grid.idler.at(i));
      const auto y = phi_assembly(b, grid.signal.at(s), grid.idler.at(i));
      CHECK(std::abs(x - y) <= 1e-12 * std::max(std::abs(y), 1e-3));
    }
  }
}

TEST_CASE("S1+S3 matches brute-force z integration") {
  const auto a = fixtures::assembly({"S1", "S3"}, 0.3);
  const auto pump = fixtures::pump();
  const auto grid = auto_grid(a, pump);
  const double wpc = pump.center_omega();
  for (std::size_t s = 0; s < grid.signal.n; s += 37) {
    const double ws = grid.signal.at(s);
    const double wi = 2.0 * wpc - ws;
    std::vector<double> lengths;
    std::vector<double> dks;
    for (const auto& seg : a.segments) {
      lengths.push_back(seg.length_m);
      dks.push_back(delta_k(seg, ws, wi));
    }
    const auto ref = chain_quadrature(lengths, dks, 100000);
    CHECK(std::abs(phi_assembly(a, ws, wi) - ref) <= 1e-7 * std::abs(ref));
  }
}

TEST_CASE("two-segment reversal keeps |phi|, four-segment reordering does not") {
  const auto pump = fixtures::pump();
  const double wpc = pump.center_omega();
  const auto ab = fixtures::assembly({"S1", "S3"});
  const auto ba = fixtures::assembly({"S3", "S1"});
  const auto grid = auto_grid(ab, pump);
  for (std::size_t s = 0; s < grid.signal.n; ++s) {
    for (std::size_t i = 0; i < grid.idler.n; i += 17) {
      const double x = std::abs(phi_assembly(ab, grid.signal.at(s), grid.idler.at(i)));
      const double y = std::abs(phi_assembly(ba, grid.signal.at(s), grid.idler.at(i)));
      CHECK(x == doctest::Approx(y).epsilon(1e-12).scale(0.6));
    }
  }

  const auto p = fixtures::assembly({"S1", "S2", "S3", "S4"});
  const auto q = fixtures::assembly({"S1", "S4", "S2", "S3"});
  const auto g4 = auto_grid(p, pump);
  const auto fp = signal_profile(p, g4.signal, wpc);
  const auto fq = signal_profile(q, g4.signal, wpc);
  double worst = 0.0;
  for (std::size_t k = 0; k < fp.size(); ++k) worst = std::max(worst, std::abs(fp[k] - fq[k]));
  CHECK(worst > 0.01 * peak_of(fp));
}

TEST_CASE("coherent sum is bounded by the total length") {
  const auto a = fixtures::assembly({"S1", "S4", "S2", "S3"});
  const auto grid = auto_grid(a, fixtures::pump());
  for (std::size_t s = 0; s < grid.signal.n; s += 3) {
    for (std::size_t i = 0; i < grid.idler.n; i += 5) {
      CHECK(std::abs(phi_assembly(a, grid.signal.at(s), grid.idler.at(i))) <= 1.2 + 1e-12);
    }
  }
}

TEST_CASE("grid auto-sizing covers every segment and enforces resolution") {
  const auto a = fixtures::assembly({"S1", "S4"}, 1.5);
  const auto pump = fixtures::pump();
  const auto grid = auto_grid(a, pump);
  for (const auto& seg : a.segments) {
    CHECK(grid.signal.start < seg.linearization.omega_s0());
    CHECK(grid.signal.back() > seg.linearization.omega_s0());
    CHECK(grid.idler.start < seg.linearization.omega_i0());
    CHECK(grid.idler.back() > seg.linearization.omega_i0());
  }
  CHECK_NOTHROW(check_resolution(grid, a, pump));

  const FrequencyGrid coarse{Axis::spanning(grid.signal.start, grid.signal.back(), 64),
                             Axis::spanning(grid.idler.start, grid.idler.back(), 64)};
  try {
    build_jsa(a, pump, coarse);
    FAIL("expected a resolution error");
  } catch (const GridResolutionError& e) {
    CHECK(e.required_ns() > 64);
    CHECK(e.required_ni() > 64);
  }
}

TEST_CASE("pump must match the linearization") {
  const auto a = fixtures::assembly({"S2"});
  auto pump = fixtures::pump();
  pump.center_wavelength_nm = 1071.0;
  CHECK_THROWS(build_jsa(a, pump, auto_grid(a, fixtures::pump())));
}

TEST_CASE("JSI of a single segment peaks at the phase-matched pair") {
  for (const char* label : {"S1", "S2", "S3", "S4"}) {
    const auto a = fixtures::assembly({label});
    const auto pump = fixtures::pump();
    const auto jsa = build_jsa(a, pump, auto_grid(a, pump));
    std::size_t bs = 0;
    std::size_t bi = 0;
    for (std::size_t s = 0; s < jsa.ns(); ++s) {
      for (std::size_t i = 0; i < jsa.ni(); ++i) {
        if (jsa.intensity(s, i) > jsa.intensity(bs, bi)) {
          bs = s;
          bi = i;
        }
      }
    }
    const auto& g = jsa.grid();
    const auto& p = a.segments[0].linearization;
    CHECK(std::abs(g.signal.at(bs) - p.omega_s0()) <= g.signal.step);
    CHECK(std::abs(g.idler.at(bi) - p.omega_i0()) <= g.idler.step);
  }
}

TEST_CASE("JSI scales with the square of a vanishing length") {
  const auto pump = fixtures::pump();
  const auto a1 = fixtures::assembly({"S2"}, 1e-3);
  const auto a2 = fixtures::assembly({"S2"}, 2e-3);
  CHECK_THROWS_AS(auto_grid(a2, pump), GridResolutionError);
  // A 0.3 m window is narrow compared with the millimetre-length sinc.
  const auto grid = auto_grid(fixtures::assembly({"S2"}, 0.3), pump);
  const auto j1 = build_jsa(a1, pump, grid);
  const auto j2 = build_jsa(a2, pump, grid);
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < j1.ns(); ++s) {
    for (std::size_t i = 0; i < j1.ni(); ++i) {
      m1 = std::max(m1, j1.intensity(s, i));
      m2 = std::max(m2, j2.intensity(s, i));
    }
  }
  CHECK(m1 <= 1e-6 + 1e-12);
  CHECK(m2 / m1 == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("JSI of short S2 is elongated along the idler axis") {
  const auto a = fixtures::assembly({"S2"}, 0.3);
  const auto pump = fixtures::pump(2.0);
  const auto jsa = build_jsa(a, pump, auto_grid(a, pump));
  const auto& g = jsa.grid();
  double m0 = 0.0, ms = 0.0, mi = 0.0, ss = 0.0, ii = 0.0;
  for (std::size_t s = 0; s < jsa.ns(); ++s) {
    for (std::size_t i = 0; i < jsa.ni(); ++i) {
      const double w = jsa.intensity(s, i);
      const double x = g.signal.at(s) - g.signal.at(0);
      const double y = g.idler.at(i) - g.idler.at(0);
      m0 += w;
      ms += w * x;
      mi += w * y;
      ss += w * x * x;
      ii += w * y * y;
    }
  }
  const double var_s = ss / m0 - (ms / m0) * (ms / m0);
  const double var_i = ii / m0 - (mi / m0) * (mi / m0);
  MESSAGE("idler/signal variance ratio ", var_i / var_s);
  CHECK(var_i / var_s > 10.0);
}

TEST_CASE("marginal with tau_i = 0 is the phase-matching profile") {
  const auto point = phasematch::make_point(1070.0, 1413.6, 3.2, 0.0);
  AssemblySpec a;
  a.segments.push_back({"S2", 0.3, point, nullptr});
  const auto pump = fixtures::pump(2.0);
  const auto jsa = build_jsa(a, pump, auto_grid(a, pump));
  const auto m = marginal(jsa);
  const double wpc = pump.center_omega();
  const double expected = std::sqrt(2.0 * kPi) * pump.sigma_p();
  const double peak = 0.09;  // L^2
  for (std::size_t s = 0; s < m.axis.size(); ++s) {
    const double ws = m.axis[s];
    const double phi2 = std::norm(phi_assembly(a, ws, 2.0 * wpc - ws));
    if (phi2 < 1e-3 * peak) continue;
    CHECK(m.values[s] / phi2 == doctest::Approx(expected).epsilon(0.01));
  }

  auto wide = pump;
  wide.fwhm_nm = 4.0;
  const auto jw = build_jsa(a, wide, auto_grid(a, wide));
  const auto mw = marginal(jw);
  REQUIRE(mw.axis.size() > 0);
  const auto n1 = m.peak_normalized();
  const auto n2 = mw.peak_normalized();
  CHECK(peak_of(mw.values) / peak_of(m.values) == doctest::Approx(2.0).epsilon(0.01));
  // Compare shapes where the two grids share a signal frequency range.
  for (std::size_t s = 0; s < n1.axis.size(); s += 5) {
    const double ws = n1.axis[s];
    if (ws < n2.axis.front() || ws > n2.axis.back()) continue;
    const auto it = std::lower_bound(n2.axis.begin(), n2.axis.end(), ws);
    const std::size_t k = static_cast<std::size_t>(it - n2.axis.begin());
    if (k == 0 || k >= n2.axis.size()) continue;
    const double t = (ws - n2.axis[k - 1]) / (n2.axis[k] - n2.axis[k - 1]);
    const double v = (1.0 - t) * n2.values[k - 1] + t * n2.values[k];
    CHECK(std::abs(v - n1.values[s]) <= 0.01);
  }
}

TEST_CASE("inhomogeneous S1+S3 marginal is modulated, homogeneous 0.6 m is not") {
  const auto pump = fixtures::pump();
  const auto inh = fixtures::assembly({"S1", "S3"}, 0.3);
  const auto hom = fixtures::assembly({"S2"}, 0.6);
  const auto mi = marginal(build_jsa(inh, pump, auto_grid(inh, pump)));
  const auto mh = marginal(build_jsa(hom, pump, auto_grid(hom, pump)));
  CHECK(maxima_above(mi.values, 0.2) > 1);
  CHECK(maxima_above(mh.values, 0.2) == 1);
}

TEST_CASE("S1+S3 with 0.3 m pieces interferes") {
  const auto pump = fixtures::pump();
  const double wpc = pump.center_omega();
  const auto both = fixtures::assembly({"S1", "S3"}, 0.3);
  const auto grid = auto_grid(both, pump);
  const auto total = signal_profile(both, grid.signal, wpc);
  const auto p1 = signal_profile(fixtures::assembly({"S1"}, 0.3), grid.signal, wpc);
  const auto p3 = signal_profile(fixtures::assembly({"S3"}, 0.3), grid.signal, wpc);
  double cross = 0.0;
  for (std::size_t k = 0; k < total.size(); ++k) {
    cross = std::max(cross, std::abs(total[k] - p1[k] - p3[k]));
  }
  CHECK(cross > 0.1 * peak_of(total));
}

TEST_CASE("grid refinement leaves marginals and filter scans unchanged") {
  const auto pump = fixtures::pump();
  const auto a = fixtures::assembly({"S1", "S2"}, 0.3);
  const auto coarse = auto_grid(a, pump);
  const FrequencyGrid fine{
      Axis::spanning(coarse.signal.start, coarse.signal.back(), 2 * coarse.signal.n - 1),
      Axis::spanning(coarse.idler.start, coarse.idler.back(), 2 * coarse.idler.n - 1)};
  const auto jc = build_jsa(a, pump, coarse);
  const auto jf = build_jsa(a, pump, fine);
  const auto mc = marginal(jc);
  const auto mf = marginal(jf);
  const double peak = peak_of(mc.values);
  double worst = 0.0;
  for (std::size_t s = 0; s < mc.values.size(); ++s) {
    worst = std::max(worst, std::abs(mc.values[s] - mf.values[2 * s]));
  }
  CHECK(worst < 1e-3 * peak);

  std::vector<double> centers;
  for (double nm = 1400.0; nm <= 1425.0; nm += 0.5) centers.push_back(nm);
  const auto sc = filter_scan(jc, 0.5, centers);
  const auto sf = filter_scan(jf, 0.5, centers);
  const double speak = peak_of(sc.spectrum.values);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    CHECK(std::abs(sc.spectrum.values[k] - sf.spectrum.values[k]) < 1e-3 * speak);
  }
}

TEST_CASE("narrow filter reproduces the phase-matching profile") {
  const auto pump = fixtures::pump();
  const double wpc = pump.center_omega();
  const auto a = fixtures::assembly({"S1", "S3"}, 0.3);
  auto profile = [&](double nm) {
    const double w = omega_from_nm(nm);
    return std::norm(phi_assembly(a, w, 2.0 * wpc - w));
  };
  // Outer half-maximum width of |phi|^2 along the energy-conservation diagonal.
  std::vector<double> dense;
  for (double nm = 1390.0; nm <= 1440.0; nm += 0.005) dense.push_back(profile(nm));
  const double half = 0.5 * peak_of(dense);
  std::size_t first = 0;
  while (dense[first] < half) ++first;
  std::size_t last = dense.size() - 1;
  while (dense[last] < half) --last;
  const double bandwidth = 0.005 * static_cast<double>(last - first);
  REQUIRE(bandwidth > 1.0);

  std::vector<double> centers;
  for (double nm = 1400.0; nm <= 1427.0; nm += 0.25) centers.push_back(nm);
  const auto scan = filter_scan(a, pump, bandwidth / 100.0, centers).spectrum.peak_normalized();
  std::vector<double> direct;
  for (double c : centers) direct.push_back(profile(c));
  const double dp = peak_of(direct);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    CHECK(std::abs(scan.values[k] - direct[k] / dp) < 0.02);
  }
}

TEST_CASE("filter scan equals a brute-force convolution on a 10x finer grid") {
  const auto pump = fixtures::pump();
  const double wpc = pump.center_omega();
  const auto a = fixtures::assembly({"S1", "S2"}, 0.3);
  const std::vector<double> centers{1405.0, 1410.0, 1411.5, 1413.0, 1416.0};
  const double fwhm = 1.0;
  const auto scan = filter_scan(a, pump, fwhm, centers);

  const auto grid = auto_grid(a, pump);
  double narrowest = 1e300;
  for (double c : centers) narrowest = std::min(narrowest, FilterSpec{c, fwhm}.sigma_s());
  const double base = std::min(grid.signal.step, narrowest / 8.0);
  const double span = grid.signal.back() - grid.signal.start;
  const auto fine = Axis::spanning(grid.signal.start, grid.signal.back(),
                                   10 * static_cast<std::size_t>(std::ceil(span / base)) + 1);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double wc = omega_from_nm(centers[k]);
    const double sigma = FilterSpec{centers[k], fwhm}.sigma_s();
    double acc = 0.0;
    for (std::size_t s = 0; s < fine.n; ++s) {
      const double ws = fine.at(s);
      const double d = (ws - wc) / sigma;
      acc += fine.weight(s) * std::norm(phi_assembly(a, ws, 2.0 * wpc - ws)) * std::exp(-d * d);
    }
    CHECK(scan.spectrum.values[k] == doctest::Approx(acc).epsilon(1e-4));
  }
}

TEST_CASE("wide filter flat-tops to the integral") {
  const auto pump = fixtures::pump();
  const auto a = fixtures::assembly({"S2"}, 0.6);
  const std::vector<double> centers{1412.0, 1413.0, 1413.6, 1414.0, 1415.0};
  const auto scan = filter_scan(a, pump, 2000.0, centers);
  const double ref = scan.spectrum.values[2];
  for (double v : scan.spectrum.values) CHECK(v == doctest::Approx(ref).epsilon(0.01));
}

TEST_CASE("filter centers outside the grid score zero and are flagged") {
  const auto pump = fixtures::pump();
  const auto a = fixtures::assembly({"S2"}, 0.3);
  const std::vector<double> centers{1300.0, 1413.6, 1600.0};
  const auto scan = filter_scan(a, pump, 0.5, centers);
  CHECK(scan.outside_support == std::vector<std::size_t>{0, 2});
  CHECK(scan.spectrum.values[0] == 0.0);
  CHECK(scan.spectrum.values[1] > 0.0);
  CHECK_THROWS(filter_scan(a, pump, 0.0, centers));
}

TEST_CASE("gain prefactor scales the filter scan") {
  const auto a = fixtures::assembly({"S2"}, 0.3);
  auto pump = fixtures::pump();
  const std::vector<double> centers{1413.6};
  const double bare = filter_scan(a, pump, 0.5, centers).spectrum.values[0];
  pump.gain = phasematch::Gain{10.0, 100.0};
  const double g = pump.gain->coefficient();
  const double gained = filter_scan(a, pump, 0.5, centers).spectrum.values[0];
  CHECK(gained == doctest::Approx(bare * g * g / pump.sigma_p()).epsilon(1e-12));
}

TEST_CASE("spectrum wavelength view reverses the frequency axis") {
  Spectrum1D s;
  s.axis = {omega_from_nm(1500.0), omega_from_nm(1400.0)};
  s.values = {1.0, 3.0};
  const auto nm = s.in_wavelength();
  CHECK(nm.axis[0] == doctest::Approx(1400.0));
  CHECK(nm.values[0] == 3.0);
  CHECK(s.peak_normalized().values[1] == 1.0);
}
