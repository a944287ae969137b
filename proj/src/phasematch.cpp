#include "sfwm/phasematch.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/toms748_solve.hpp>

#include "sfwm/errors.hpp"
#include "sfwm/units.hpp"

namespace sfwm::phasematch {

using dispersion::FiberSegment;

void PumpSpec::validate() const {
  if (!(center_wavelength_nm > 0.0)) {
    throw std::invalid_argument("pump center_wavelength_nm must be > 0");
  }
  if (!(fwhm_nm > 0.0)) throw std::invalid_argument("pump fwhm_nm must be > 0");
  if (gain && !(gain->gamma_per_w_km >= 0.0 && gain->peak_power_w >= 0.0)) {
    throw std::invalid_argument("pump gain constants must be non-negative");
  }
}

double PumpSpec::center_omega() const { return omega_from_nm(center_wavelength_nm); }

double PumpSpec::sigma_p() const {
  // Intensity FWHM of exp[-x^2/sigma^2] is 2 sigma sqrt(ln 2).
  return kPi * kSpeedOfLight * fwhm_nm * kNanometre /
         (center_wavelength_nm * kNanometre * center_wavelength_nm * kNanometre *
          std::sqrt(std::log(2.0)));
}

double PhaseMatchPoint::omega_s0() const { return omega_from_nm(lambda_s0_nm); }

double PhaseMatchPoint::omega_i0() const {
  return 2.0 * omega_from_nm(pump_wavelength_nm) - omega_s0();
}

double theta_from(double tau_s, double tau_i) {
  return std::atan2(std::abs(tau_i), std::abs(tau_s));
}

double idler_wavelength_nm(double pump_nm, double signal_nm) {
  return 1.0 / (2.0 / pump_nm - 1.0 / signal_nm);
}

PhaseMatchPoint make_point(double pump_nm, double lambda_s0_nm, double tau_s_ps_per_m,
                           double tau_i_ps_per_m) {
  if (!(pump_nm > 0.0) || !(lambda_s0_nm > pump_nm / 2.0)) {
    throw std::invalid_argument("phase-match point: invalid pump or signal wavelength");
  }
  PhaseMatchPoint p;
  p.pump_wavelength_nm = pump_nm;
  p.lambda_s0_nm = lambda_s0_nm;
  p.lambda_i0_nm = idler_wavelength_nm(pump_nm, lambda_s0_nm);
  p.tau_s_ps_per_m = tau_s_ps_per_m;
  p.tau_i_ps_per_m = tau_i_ps_per_m;
  p.theta_rad = theta_from(tau_s_ps_per_m, tau_i_ps_per_m);
  return p;
}

PhaseMatchPoint from_published(double pump_nm, double lambda_s0_nm, double tau_s_ps_per_m,
                               double theta_rad, int tau_i_sign) {
  if (!(theta_rad >= 0.0 && theta_rad <= kPi / 2.0)) {
    throw std::invalid_argument("theta must lie in [0, pi/2]");
  }
  if (tau_i_sign != 1 && tau_i_sign != -1) {
    throw std::invalid_argument("tau_i_sign must be +1 or -1");
  }
  const double tau_i = tau_i_sign * tau_s_ps_per_m * std::tan(theta_rad);
  return make_point(pump_nm, lambda_s0_nm, tau_s_ps_per_m, tau_i);
}

double momentum_mismatch(const FiberSegment& segment, double pump_nm, double signal_nm,
                         const dispersion::ModelOptions& model) {
  const double wp = omega_from_nm(pump_nm);
  const double ws = omega_from_nm(signal_nm);
  return 2.0 * dispersion::propagation_constant_at(segment, wp, model) -
         dispersion::propagation_constant_at(segment, ws, model) -
         dispersion::propagation_constant_at(segment, 2.0 * wp - ws, model);
}

PhaseMatchPoint solve_phase_match(const FiberSegment& segment, double pump_nm,
                                  const SolveOptions& options) {
  const double wp = omega_from_nm(pump_nm);
  const double kp2 = 2.0 * dispersion::propagation_constant_at(segment, wp, options.model);
  auto mismatch = [&](double signal_nm) {
    const double ws = omega_from_nm(signal_nm);
    return kp2 - dispersion::propagation_constant_at(segment, ws, options.model) -
           dispersion::propagation_constant_at(segment, 2.0 * wp - ws, options.model);
  };

  const double lo = pump_nm + options.min_detuning_nm;
  // The idler must also stay inside the material window.
  double hi = options.max_signal_nm;
  const double idler_floor = dispersion::kSellmeierMinNm;
  if (idler_wavelength_nm(pump_nm, hi) < idler_floor || 2.0 / pump_nm - 1.0 / hi <= 0.0) {
    hi = 1.0 / (2.0 / pump_nm - 1.0 / idler_floor);
  }
  if (!(lo < hi)) throw PhaseMatchError("no phase matching: empty signal search window");

  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / options.coarse_step_nm));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    grid[i] = std::min(lo + options.coarse_step_nm * static_cast<double>(i), hi);
  }
  std::vector<double> values(grid.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = mismatch(grid[i]);

  std::vector<std::size_t> brackets;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (values[i] == 0.0 || std::signbit(values[i]) != std::signbit(values[i + 1])) {
      brackets.push_back(i);
    }
  }
  if (brackets.empty()) {
    std::ostringstream os;
    os << "no phase matching: no nondegenerate root for pump " << pump_nm << " nm in ["
       << lo << ", " << hi << "] nm";
    throw PhaseMatchError(os.str());
  }

  const std::size_t b = brackets.front();
  double signal_nm = grid[b];
  if (values[b] != 0.0) {
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        mismatch, grid[b], grid[b + 1], values[b], values[b + 1],
        boost::math::tools::eps_tolerance<double>(50), max_iter);
    signal_nm = 0.5 * (bracket.first + bracket.second);
  }

  const double idler_nm = idler_wavelength_nm(pump_nm, signal_nm);
  const double k1_p = dispersion::group_slowness(segment, pump_nm, options.model);
  const double k1_s = dispersion::group_slowness(segment, signal_nm, options.model);
  const double k1_i = dispersion::group_slowness(segment, idler_nm, options.model);
  PhaseMatchPoint point = make_point(pump_nm, signal_nm, (k1_p - k1_s) / kPicosecond,
                                     (k1_p - k1_i) / kPicosecond);
  point.ambiguous = brackets.size() > 1;
  return point;
}

std::vector<GvmRow> gvm_curve(const FiberSegment& segment, double lo_nm, double hi_nm,
                              std::size_t n_points, const SolveOptions& options) {
  if (n_points < 2 || !(lo_nm < hi_nm)) {
    throw std::invalid_argument("gvm_curve: need lo < hi and at least 2 points");
  }
  std::vector<GvmRow> rows(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    rows[i].pump_nm =
        lo_nm + (hi_nm - lo_nm) * static_cast<double>(i) / static_cast<double>(n_points - 1);
  }
  // Each solve is itself parallel over its coarse grid; keep the sweep serial.
  for (auto& row : rows) {
    try {
      row.point = solve_phase_match(segment, row.pump_nm, options);
    } catch (const PhaseMatchError&) {
      row.point.reset();
    } catch (const DomainError&) {
      row.point.reset();
    }
  }
  return rows;
}

namespace {

std::optional<double> polish_sign_change(const FiberSegment& segment,
                                         const std::vector<GvmRow>& rows, bool idler,
                                         const SolveOptions& options) {
  auto tau = [&](const PhaseMatchPoint& p) { return idler ? p.tau_i_ps_per_m : p.tau_s_ps_per_m; };
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (!rows[i].point || !rows[i + 1].point) continue;
    const double fa = tau(*rows[i].point);
    const double fb = tau(*rows[i + 1].point);
    if (fa == 0.0) return rows[i].pump_nm;
    if (std::signbit(fa) == std::signbit(fb)) continue;
    auto f = [&](double pump_nm) { return tau(solve_phase_match(segment, pump_nm, options)); };
    std::uintmax_t max_iter = 60;
    const auto tol = [](double a, double b) { return std::abs(b - a) < 1e-3; };
    try {
      const auto bracket = boost::math::tools::toms748_solve(f, rows[i].pump_nm,
                                                             rows[i + 1].pump_nm, fa, fb, tol,
                                                             max_iter);
      return 0.5 * (bracket.first + bracket.second);
    } catch (const PhaseMatchError&) {
      continue;
    }
  }
  return std::nullopt;
}

}  // namespace

AgvmRoots agvm_roots(const FiberSegment& segment, double lo_nm, double hi_nm,
                     const SolveOptions& options, double scan_step_nm) {
  if (!(scan_step_nm > 0.0)) throw std::invalid_argument("agvm_roots: scan step must be > 0");
  const auto n = static_cast<std::size_t>(std::ceil((hi_nm - lo_nm) / scan_step_nm)) + 1;
  const auto rows = gvm_curve(segment, lo_nm, hi_nm, std::max<std::size_t>(n, 2), options);
  AgvmRoots roots;
  roots.pump_for_tau_i_zero = polish_sign_change(segment, rows, true, options);
  roots.pump_for_tau_s_zero = polish_sign_change(segment, rows, false, options);
  return roots;
}

}  // namespace sfwm::phasematch
