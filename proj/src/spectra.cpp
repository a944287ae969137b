#include "sfwm/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sfwm/errors.hpp"
#include "sfwm/kernels.hpp"
#include "sfwm/units.hpp"

namespace sfwm::spectra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

struct Window {
  double lo;
  double hi;
};

// Half-widths (signal, idler) of one segment's phase-matching window.
std::pair<double, double> half_widths(const AssemblySegment& seg, double sigma_p,
                                      double lobes) {
  const double ts = std::abs(seg.linearization.tau_s_ps_per_m) * kPicosecond * seg.length_m;
  const double ti = std::abs(seg.linearization.tau_i_ps_per_m) * kPicosecond * seg.length_m;
  const double hs = ts > 0.0 ? 2.0 * kPi * lobes / ts : kInf;
  const double hi = ti > 0.0 ? 2.0 * kPi * lobes / ti : kInf;
  return {std::min(hs, hi + 4.0 * sigma_p), std::min(hi, hs + 4.0 * sigma_p)};
}

std::pair<double, double> omega_range_from_nm(const std::pair<double, double>& nm) {
  const double a = omega_from_nm(nm.first);
  const double b = omega_from_nm(nm.second);
  return {std::min(a, b), std::max(a, b)};
}

std::size_t points_for(double span, double max_step) {
  if (!(span > 0.0)) return 2;
  return static_cast<std::size_t>(std::ceil(span / max_step - 1e-9)) + 1;
}

void check_pump_consistency(const AssemblySpec& assembly, const PumpSpec& pump) {
  if (assembly.model != DeltaKModel::Linearized) return;
  for (const auto& seg : assembly.segments) {
    const double lp = seg.linearization.pump_wavelength_nm;
    if (std::abs(lp - pump.center_wavelength_nm) > 1e-9 * pump.center_wavelength_nm) {
      std::ostringstream os;
      os << "segment '" << seg.label << "' is linearized at pump " << lp
         << " nm but the pump is centred at " << pump.center_wavelength_nm << " nm";
      throw std::invalid_argument(os.str());
    }
  }
}

}  // namespace

void AssemblySpec::validate() const {
  if (segments.empty()) throw std::invalid_argument("assembly needs at least one segment");
  for (const auto& seg : segments) {
    if (!(seg.length_m > 0.0)) {
      throw std::invalid_argument("assembly segment '" + seg.label + "' has non-positive length");
    }
    if (model == DeltaKModel::Full && !seg.curve) {
      throw std::invalid_argument("full delta-k model needs a dispersion curve for segment '" +
                                  seg.label + "'");
    }
  }
  if (model == DeltaKModel::Linearized) {
    const double lp = segments.front().linearization.pump_wavelength_nm;
    for (const auto& seg : segments) {
      if (std::abs(seg.linearization.pump_wavelength_nm - lp) > 1e-9 * lp) {
        throw std::invalid_argument("linearized assembly segments must share one pump");
      }
    }
  }
}

double AssemblySpec::total_length() const {
  double total = 0.0;
  for (const auto& seg : segments) total += seg.length_m;
  return total;
}

Axis Axis::spanning(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("axis needs n >= 2 and hi > lo");
  return Axis{lo, (hi - lo) / static_cast<double>(n - 1), n};
}

GridRequirement grid_requirement(const AssemblySpec& assembly, const PumpSpec& pump,
                                 double signal_span, double idler_span,
                                 const GridOptions& options) {
  double sum_s = 0.0;
  double sum_i = 0.0;
  for (const auto& seg : assembly.segments) {
    sum_s += std::abs(seg.linearization.tau_s_ps_per_m) * kPicosecond * seg.length_m;
    sum_i += std::abs(seg.linearization.tau_i_ps_per_m) * kPicosecond * seg.length_m;
  }
  const double pump_step = pump.sigma_p() / options.samples_per_sigma;
  GridRequirement req{};
  req.max_signal_step = sum_s > 0.0 ? std::min(options.max_phase_step / sum_s, pump_step) : pump_step;
  req.max_idler_step = sum_i > 0.0 ? std::min(options.max_phase_step / sum_i, pump_step) : pump_step;
  req.ns = points_for(signal_span, req.max_signal_step);
  req.ni = points_for(idler_span, req.max_idler_step);
  return req;
}

FrequencyGrid auto_grid(const AssemblySpec& assembly, const PumpSpec& pump,
                        const GridOptions& options) {
  assembly.validate();
  pump.validate();
  const double sigma_p = pump.sigma_p();
  Window sig{kInf, -kInf};
  Window idl{kInf, -kInf};
  for (const auto& seg : assembly.segments) {
    const auto [hs, hi] = half_widths(seg, sigma_p, options.sinc_lobes);
    const double ws0 = seg.linearization.omega_s0();
    const double wi0 = seg.linearization.omega_i0();
    sig.lo = std::min(sig.lo, ws0 - hs);
    sig.hi = std::max(sig.hi, ws0 + hs);
    idl.lo = std::min(idl.lo, wi0 - hi);
    idl.hi = std::max(idl.hi, wi0 + hi);
  }
  if (options.signal_range_nm) {
    const auto [lo, hi] = omega_range_from_nm(*options.signal_range_nm);
    sig = {lo, hi};
  }
  if (options.idler_range_nm) {
    const auto [lo, hi] = omega_range_from_nm(*options.idler_range_nm);
    idl = {lo, hi};
  }
  if (!std::isfinite(sig.lo) || !std::isfinite(sig.hi) || !std::isfinite(idl.lo) ||
      !std::isfinite(idl.hi)) {
    throw std::invalid_argument("auto_grid: unbounded window (tau_s and tau_i both zero)");
  }
  const auto req = grid_requirement(assembly, pump, sig.hi - sig.lo, idl.hi - idl.lo, options);
  const std::size_t ns = std::max(options.ns, req.ns);
  const std::size_t ni = std::max(options.ni, req.ni);
  if (static_cast<double>(ns) * static_cast<double>(ni) > static_cast<double>(options.max_cells)) {
    std::ostringstream os;
    os << "auto_grid: required grid " << ns << " x " << ni << " exceeds " << options.max_cells
       << " cells; give signal_range_nm / idler_range_nm explicitly";
    throw GridResolutionError(os.str(), ns, ni);
  }
  return FrequencyGrid{Axis::spanning(sig.lo, sig.hi, ns), Axis::spanning(idl.lo, idl.hi, ni)};
}

void check_resolution(const FrequencyGrid& grid, const AssemblySpec& assembly,
                      const PumpSpec& pump, const GridOptions& options) {
  const double span_s = grid.signal.back() - grid.signal.start;
  const double span_i = grid.idler.back() - grid.idler.start;
  const auto req = grid_requirement(assembly, pump, span_s, span_i, options);
  if (grid.signal.n < req.ns || grid.idler.n < req.ni) {
    std::ostringstream os;
    os << "grid under-resolves the joint spectrum: need at least ns = " << req.ns
       << ", ni = " << req.ni << " (have " << grid.signal.n << " x " << grid.idler.n << ")";
    throw GridResolutionError(os.str(), std::max(req.ns, grid.signal.n),
                              std::max(req.ni, grid.idler.n));
  }
}

double pump_envelope(const PumpSpec& pump, double omega_s, double omega_i) {
  const double sigma = pump.sigma_p();
  const double d = omega_s + omega_i - 2.0 * pump.center_omega();
  return std::exp(-d * d / (4.0 * sigma * sigma));
}

double delta_k(const PhaseMatchPoint& point, double omega_s, double omega_i) {
  return point.tau_s_ps_per_m * kPicosecond * (omega_s - point.omega_s0()) +
         point.tau_i_ps_per_m * kPicosecond * (omega_i - point.omega_i0());
}

double delta_k(const AssemblySegment& segment, double omega_s, double omega_i,
               DeltaKModel model) {
  if (model == DeltaKModel::Linearized) return delta_k(segment.linearization, omega_s, omega_i);
  if (!segment.curve) {
    throw std::invalid_argument("full delta-k model needs a dispersion curve");
  }
  const auto& c = *segment.curve;
  return 2.0 * c.k_at(0.5 * (omega_s + omega_i)) - c.k_at(omega_s) - c.k_at(omega_i);
}

std::complex<double> phi_homogeneous(double length_m, double delta_k) {
  const double half = 0.5 * delta_k * length_m;
  return length_m * sinc(half) * std::polar(1.0, half);
}

std::complex<double> phi_chain(std::span<const double> lengths,
                               std::span<const double> delta_ks) {
  std::complex<double> sum = 0.0;
  double accumulated = 0.0;
  for (std::size_t n = 0; n < lengths.size(); ++n) {
    sum += phi_homogeneous(lengths[n], delta_ks[n]) * std::polar(1.0, accumulated);
    accumulated += delta_ks[n] * lengths[n];
  }
  return sum;
}

std::complex<double> phi_assembly(const AssemblySpec& assembly, double omega_s,
                                  double omega_i) {
  std::vector<double> lengths;
  std::vector<double> dks;
  lengths.reserve(assembly.segments.size());
  dks.reserve(assembly.segments.size());
  for (const auto& seg : assembly.segments) {
    lengths.push_back(seg.length_m);
    dks.push_back(delta_k(seg, omega_s, omega_i, assembly.model));
  }
  return phi_chain(lengths, dks);
}

JsaGrid::JsaGrid(FrequencyGrid grid, std::vector<std::complex<double>> amplitude,
                 PumpSpec pump, AssemblySpec assembly)
    : grid_(grid), amplitude_(std::move(amplitude)), pump_(std::move(pump)),
      assembly_(std::move(assembly)) {
  if (amplitude_.size() != grid_.signal.n * grid_.idler.n) {
    throw std::invalid_argument("JSA amplitude size does not match the grid");
  }
}

JsaGrid build_jsa(const AssemblySpec& assembly, const PumpSpec& pump,
                  const FrequencyGrid& grid, Execution execution,
                  const GridOptions& options) {
  assembly.validate();
  pump.validate();
  check_pump_consistency(assembly, pump);
  check_resolution(grid, assembly, pump, options);
  if (assembly.model == DeltaKModel::Full) {
    const double lo = std::min(grid.signal.start, grid.idler.start);
    const double hi = std::max(grid.signal.back(), grid.idler.back());
    for (const auto& seg : assembly.segments) {
      if (lo < seg.curve->min_omega() || hi > seg.curve->max_omega()) {
        std::ostringstream os;
        os << "grid [" << nm_from_omega(hi) << ", " << nm_from_omega(lo)
           << "] nm exceeds the dispersion curve of segment '" << seg.label << "'";
        throw DomainError(os.str());
      }
    }
  }

  std::vector<std::complex<double>> amplitude(grid.signal.n * grid.idler.n);
  if (execution == Execution::Serial) {
    kernels::fill_jsa_serial(assembly, pump, grid, amplitude);
  } else {
    kernels::fill_jsa_parallel(kernels::make_problem(assembly, pump, grid), amplitude);
  }
  for (const auto& v : amplitude) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericError("non-finite joint spectral amplitude", 0.0);
    }
  }
  return JsaGrid(grid, std::move(amplitude), pump, assembly);
}

Spectrum1D Spectrum1D::peak_normalized() const {
  Spectrum1D out = *this;
  const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  if (peak > 0.0) {
    for (auto& v : out.values) v /= peak;
  }
  out.normalization = Normalization::Peak;
  return out;
}

Spectrum1D Spectrum1D::in_wavelength() const {
  if (axis_kind == AxisKind::WavelengthNm) return *this;
  Spectrum1D out;
  out.axis_kind = AxisKind::WavelengthNm;
  out.normalization = normalization;
  out.axis.resize(axis.size());
  out.values.resize(values.size());
  const std::size_t n = axis.size();
  for (std::size_t k = 0; k < n; ++k) {
    out.axis[k] = nm_from_omega(axis[n - 1 - k]);
    out.values[k] = values[n - 1 - k];
  }
  return out;
}

Spectrum1D marginal(const JsaGrid& jsa, Side side) {
  const auto& g = jsa.grid();
  Spectrum1D out;
  out.axis_kind = AxisKind::AngularFrequency;
  out.values = kernels::project_parallel(jsa.amplitude(), g.signal, g.idler, side);
  const Axis& ax = side == Side::Signal ? g.signal : g.idler;
  out.axis.resize(ax.n);
  for (std::size_t k = 0; k < ax.n; ++k) out.axis[k] = ax.at(k);
  return out;
}

void FilterSpec::validate() const {
  if (!(fwhm_nm > 0.0)) throw std::invalid_argument("filter fwhm_nm must be > 0");
  if (!(center_nm > 0.0)) throw std::invalid_argument("filter center_nm must be > 0");
}

double FilterSpec::sigma_s() const {
  return omega_width_from_nm(fwhm_nm, center_nm) / (2.0 * std::sqrt(std::log(2.0)));
}

namespace {

double gain_prefactor(const PumpSpec& pump) {
  if (!pump.gain) return 1.0;
  const double g = pump.gain->coefficient();
  return g * g / pump.sigma_p();
}

void check_centers(std::span<const double> centers_nm, double fwhm_nm) {
  if (!(fwhm_nm > 0.0)) throw std::invalid_argument("filter fwhm_nm must be > 0");
  for (std::size_t k = 0; k < centers_nm.size(); ++k) {
    if (!(centers_nm[k] > 0.0)) throw std::invalid_argument("filter centers must be > 0");
    if (k > 0 && !(centers_nm[k] > centers_nm[k - 1])) {
      throw std::invalid_argument("filter centers must be strictly ascending");
    }
  }
}

// Convolves density(w) sampled on `axis` with each Gaussian filter.
FilterScan convolve(const Axis& axis, const std::vector<double>& density, double scale,
                    double fwhm_nm, std::span<const double> centers_nm) {
  FilterScan scan;
  scan.spectrum.axis_kind = AxisKind::WavelengthNm;
  scan.spectrum.axis.assign(centers_nm.begin(), centers_nm.end());
  scan.spectrum.values.assign(centers_nm.size(), 0.0);
  std::vector<char> outside(centers_nm.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < centers_nm.size(); ++k) {
    const double wc = omega_from_nm(centers_nm[k]);
    if (wc < axis.start || wc > axis.back()) {
      outside[k] = 1;
      continue;
    }
    const double sigma = FilterSpec{centers_nm[k], fwhm_nm}.sigma_s();
    double acc = 0.0;
    for (std::size_t s = 0; s < axis.n; ++s) {
      const double d = (axis.at(s) - wc) / sigma;
      acc += axis.weight(s) * density[s] * std::exp(-d * d);
    }
    scan.spectrum.values[k] = scale * acc;
  }
  for (std::size_t k = 0; k < outside.size(); ++k) {
    if (outside[k]) scan.outside_support.push_back(k);
  }
  return scan;
}

}  // namespace

FilterScan filter_scan(const JsaGrid& jsa, double filter_fwhm_nm,
                       std::span<const double> centers_nm) {
  check_centers(centers_nm, filter_fwhm_nm);
  const auto& g = jsa.grid();
  const auto projected = kernels::project_parallel(jsa.amplitude(), g.signal, g.idler, Side::Signal);
  // Marginal = sqrt(2 pi) sigma_p |phi|^2 when the pump integrates out.
  const double scale = gain_prefactor(jsa.pump()) / (std::sqrt(2.0 * kPi) * jsa.pump().sigma_p());
  return convolve(g.signal, projected, scale, filter_fwhm_nm, centers_nm);
}

FilterScan filter_scan(const AssemblySpec& assembly, const PumpSpec& pump,
                       double filter_fwhm_nm, std::span<const double> centers_nm,
                       const GridOptions& options) {
  check_centers(centers_nm, filter_fwhm_nm);
  check_pump_consistency(assembly, pump);
  const FrequencyGrid grid = auto_grid(assembly, pump, options);
  // The filter must be resolved as well as the phase.
  double narrowest = kInf;
  for (double c : centers_nm) narrowest = std::min(narrowest, FilterSpec{c, filter_fwhm_nm}.sigma_s());
  const double step = std::min(grid.signal.step, narrowest / 8.0);
  const double span = grid.signal.back() - grid.signal.start;
  const Axis axis = Axis::spanning(grid.signal.start, grid.signal.back(),
                                   static_cast<std::size_t>(std::ceil(span / step)) + 1);
  const double wpc = pump.center_omega();
  std::vector<double> density(axis.n);
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < axis.n; ++s) {
    const double ws = axis.at(s);
    density[s] = std::norm(phi_assembly(assembly, ws, 2.0 * wpc - ws));
  }
  return convolve(axis, density, gain_prefactor(pump), filter_fwhm_nm, centers_nm);
}

}  // namespace sfwm::spectra
