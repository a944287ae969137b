#include "sfwm/dispersion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/toms748_solve.hpp>

#include "sfwm/errors.hpp"
#include "sfwm/units.hpp"

namespace sfwm::dispersion {

namespace {

constexpr double kBesselJ0FirstZero = 2.404825557695773;
constexpr double kBesselJ1FirstZero = 3.831705970207512;

std::string window_message(double wavelength_nm) {
  std::ostringstream os;
  os << "wavelength " << wavelength_nm << " nm outside the Sellmeier validity window ["
     << kSellmeierMinNm << ", " << kSellmeierMaxNm << "] nm";
  return os.str();
}

void check_window(double wavelength_nm) {
  // Round-trip slack for wavelengths recovered from angular frequencies.
  constexpr double kSlack = 1e-9;
  if (!(wavelength_nm >= kSellmeierMinNm * (1.0 - kSlack) &&
        wavelength_nm <= kSellmeierMaxNm * (1.0 + kSlack))) {
    throw DomainError(window_message(wavelength_nm));
  }
}

// Characteristic function of the fundamental mode in the transverse core
// parameter U. Zero at the bound mode.
struct ModeFunction {
  ModeEquation equation;
  double v;         // normalized frequency
  double n_core;
  double n_clad;
  double k0_a;      // k0 * core radius

  double operator()(double u) const {
    const double w = std::sqrt(std::max(v * v - u * u, 0.0));
    const double j0 = std::cyl_bessel_j(0.0, u);
    const double j1 = std::cyl_bessel_j(1.0, u);
    const double k0 = std::cyl_bessel_k(0.0, w);
    const double k1 = std::cyl_bessel_k(1.0, w);
    if (equation == ModeEquation::ScalarLP01) {
      return u * j1 / j0 - w * k1 / k0;
    }
    // HE11 branch of the exact step-index equation, solved for J0/(U J1):
    //   J0/(U J1) = -(1+D)/2 * K1'/(W K1) + 1/U^2 - R
    //   R^2 = ((1-D)/2 * K1'/(W K1))^2 + (beta/(k n1))^2 (1/U^2 + 1/W^2)^2
    const double ratio = (n_clad * n_clad) / (n_core * n_core);
    const double k1_prime = -k0 - k1 / w;
    const double y = k1_prime / (w * k1);
    const double beta_norm2 = 1.0 - (u / (k0_a * n_core)) * (u / (k0_a * n_core));
    const double s = 1.0 / (u * u) + 1.0 / (w * w);
    const double half_diff = 0.5 * (1.0 - ratio) * y;
    const double r = std::sqrt(half_diff * half_diff + beta_norm2 * s * s);
    return j0 / (u * j1) - 1.0 / (u * u) + 0.5 * (1.0 + ratio) * y + r;
  }
};

double solve_mode_parameter(const ModeFunction& fn, double wavelength_nm,
                            const FiberSegment& segment) {
  const double pole =
      fn.equation == ModeEquation::ScalarLP01 ? kBesselJ0FirstZero : kBesselJ1FirstZero;
  const double u_hi = std::min(fn.v, pole) * (1.0 - 1e-12);
  const double u_lo = 1e-4 * u_hi;
  constexpr int kScan = 48;

  double a = u_lo;
  double fa = fn(a);
  for (int i = 1; i <= kScan; ++i) {
    const double b = u_lo + (u_hi - u_lo) * i / kScan;
    const double fb = fn(b);
    if (std::isfinite(fa) && std::isfinite(fb) && (fa == 0.0 || std::signbit(fa) != std::signbit(fb))) {
      if (fa == 0.0) return a;
      std::uintmax_t max_iter = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          fn, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), max_iter);
      const double root = 0.5 * (bracket.first + bracket.second);
      if (max_iter >= 200) {
        throw NumericError("mode eigenvalue solver did not converge", fn(root));
      }
      return root;
    }
    a = b;
    fa = fb;
  }
  std::ostringstream os;
  os << "mode cutoff: no guided fundamental mode for segment '" << segment.label
     << "' at " << wavelength_nm << " nm (V = " << fn.v << ")";
  throw ModeCutoffError(os.str());
}

// Central difference of k(omega) with one Richardson step.
double k_derivative(const FiberSegment& segment, double omega, int order,
                    const ModelOptions& options) {
  const double h = kDerivativeStep * omega;
  check_window(nm_from_omega(omega + h));
  check_window(nm_from_omega(omega - h));
  auto k = [&](double w) { return propagation_constant_at(segment, w, options); };
  if (order == 1) {
    const double d_h = (k(omega + h) - k(omega - h)) / (2.0 * h);
    const double d_h2 = (k(omega + 0.5 * h) - k(omega - 0.5 * h)) / h;
    return (4.0 * d_h2 - d_h) / 3.0;
  }
  const double k_mid = k(omega);
  const double d_h = (k(omega + h) - 2.0 * k_mid + k(omega - h)) / (h * h);
  const double hh = 0.5 * h;
  const double d_h2 = (k(omega + hh) - 2.0 * k_mid + k(omega - hh)) / (hh * hh);
  return (4.0 * d_h2 - d_h) / 3.0;
}

}  // namespace

void FiberSegment::validate() const {
  if (!(core_radius_nm > 0.0) || !std::isfinite(core_radius_nm)) {
    throw std::invalid_argument("core_radius_nm must be > 0 (segment '" + label + "')");
  }
  if (!(air_fill > 0.0 && air_fill < 1.0)) {
    throw std::invalid_argument("air_fill must lie in (0, 1) (segment '" + label + "')");
  }
  if (!(length_m > 0.0) || !std::isfinite(length_m)) {
    throw std::invalid_argument("length_m must be > 0 (segment '" + label + "')");
  }
}

double silica_refractive_index(double wavelength_nm) {
  check_window(wavelength_nm);
  // Malitson (1965), wavelength in micrometres.
  constexpr std::array<double, 3> b{0.6961663, 0.4079426, 0.8974794};
  constexpr std::array<double, 3> c{0.0684043, 0.1162414, 9.896161};
  const double l2 = (wavelength_nm * 1e-3) * (wavelength_nm * 1e-3);
  double n2 = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    n2 += b[i] * l2 / (l2 - c[i] * c[i]);
  }
  return std::sqrt(n2);
}

double cladding_index(double wavelength_nm, double air_fill, CladdingRule rule) {
  if (!(air_fill >= 0.0 && air_fill <= 1.0)) {
    throw DomainError("air_fill must lie in [0, 1]");
  }
  const double n_si = silica_refractive_index(wavelength_nm);
  if (rule == CladdingRule::PermittivityAverage) {
    return std::sqrt((1.0 - air_fill) * n_si * n_si + air_fill);
  }
  return (1.0 - air_fill) * n_si + air_fill;
}

double effective_index(const FiberSegment& segment, double wavelength_nm,
                       const ModelOptions& options) {
  const double n_core = silica_refractive_index(wavelength_nm);
  const double n_clad = cladding_index(wavelength_nm, segment.air_fill, options.cladding);
  const double k0 = 2.0 * kPi / (wavelength_nm * kNanometre);
  const double k0_a = k0 * segment.core_radius_nm * kNanometre;
  const double v = k0_a * std::sqrt(n_core * n_core - n_clad * n_clad);
  const ModeFunction fn{options.mode, v, n_core, n_clad, k0_a};
  const double u = solve_mode_parameter(fn, wavelength_nm, segment);
  const double n_eff = std::sqrt(n_core * n_core - (u / k0_a) * (u / k0_a));
  if (!(n_eff > n_clad && n_eff < n_core)) {
    std::ostringstream os;
    os << "mode cutoff: effective index " << n_eff << " outside (" << n_clad << ", "
       << n_core << ") at " << wavelength_nm << " nm";
    throw ModeCutoffError(os.str());
  }
  return n_eff;
}

double propagation_constant(const FiberSegment& segment, double wavelength_nm,
                            const ModelOptions& options) {
  return effective_index(segment, wavelength_nm, options) * 2.0 * kPi /
         (wavelength_nm * kNanometre);
}

double propagation_constant_at(const FiberSegment& segment, double omega,
                               const ModelOptions& options) {
  return effective_index(segment, nm_from_omega(omega), options) * omega / kSpeedOfLight;
}

double group_slowness(const FiberSegment& segment, double wavelength_nm,
                      const ModelOptions& options) {
  return k_derivative(segment, omega_from_nm(wavelength_nm), 1, options);
}

double gvd(const FiberSegment& segment, double wavelength_nm, const ModelOptions& options) {
  return k_derivative(segment, omega_from_nm(wavelength_nm), 2, options) / kPs2;
}

std::vector<double> find_zdw(const FiberSegment& segment, double lo_nm, double hi_nm,
                             const ModelOptions& options) {
  if (!(lo_nm < hi_nm)) throw std::invalid_argument("find_zdw: empty search range");
  auto f = [&](double lam) { return gvd(segment, lam, options); };
  const auto n = static_cast<std::size_t>(std::ceil(hi_nm - lo_nm));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    grid[i] = std::min(lo_nm + static_cast<double>(i), hi_nm);
  }
  std::vector<double> values(grid.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid[i]);

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double fa = values[i];
    const double fb = values[i + 1];
    if (fa == 0.0) {
      roots.push_back(grid[i]);
      continue;
    }
    if (std::signbit(fa) == std::signbit(fb) || fb == 0.0) continue;
    std::uintmax_t max_iter = 100;
    const auto tol = [](double a, double b) { return std::abs(b - a) < 1e-4; };
    const auto bracket =
        boost::math::tools::toms748_solve(f, grid[i], grid[i + 1], fa, fb, tol, max_iter);
    roots.push_back(0.5 * (bracket.first + bracket.second));
  }
  if (!values.empty() && values.back() == 0.0) roots.push_back(grid.back());
  return roots;
}

DispersionCurve::DispersionCurve(std::vector<double> wavelength_nm,
                                 std::vector<double> k_rad_per_m, CurveProvenance provenance)
    : wavelength_nm_(std::move(wavelength_nm)), k_(std::move(k_rad_per_m)),
      provenance_(provenance) {
  if (wavelength_nm_.size() != k_.size()) {
    throw std::invalid_argument("dispersion curve: wavelength and k lists differ in length");
  }
  if (wavelength_nm_.size() < 6) {
    throw std::invalid_argument("dispersion curve: at least 6 samples required");
  }
  for (std::size_t i = 0; i < k_.size(); ++i) {
    if (!(k_[i] > 0.0)) throw std::invalid_argument("dispersion curve: k must be positive");
    if (i > 0 && !(wavelength_nm_[i] > wavelength_nm_[i - 1])) {
      throw std::invalid_argument("dispersion curve: wavelengths must be strictly ascending");
    }
  }
  omega_.resize(k_.size());
  k_omega_.resize(k_.size());
  const std::size_t n = k_.size();
  for (std::size_t i = 0; i < n; ++i) {
    omega_[i] = omega_from_nm(wavelength_nm_[n - 1 - i]);
    k_omega_[i] = k_[n - 1 - i];
  }
}

double DispersionCurve::k_at(double omega) const {
  if (!(omega >= omega_.front() && omega <= omega_.back())) {
    std::ostringstream os;
    os << "dispersion curve: " << nm_from_omega(omega) << " nm outside tabulated range ["
       << wavelength_nm_.front() << ", " << wavelength_nm_.back() << "] nm";
    throw DomainError(os.str());
  }
  constexpr std::size_t kStencil = 6;
  const auto it = std::upper_bound(omega_.begin(), omega_.end(), omega);
  const auto upper = static_cast<std::size_t>(it - omega_.begin());
  std::size_t first = upper >= kStencil / 2 ? upper - kStencil / 2 : 0;
  first = std::min(first, omega_.size() - kStencil);
  double sum = 0.0;
  for (std::size_t j = first; j < first + kStencil; ++j) {
    double basis = 1.0;
    for (std::size_t m = first; m < first + kStencil; ++m) {
      if (m != j) basis *= (omega - omega_[m]) / (omega_[j] - omega_[m]);
    }
    sum += basis * k_omega_[j];
  }
  return sum;
}

DispersionCurve model_curve(const FiberSegment& segment, double lo_nm, double hi_nm,
                            std::size_t n_points, const ModelOptions& options) {
  if (!(lo_nm < hi_nm) || n_points < 6) {
    throw std::invalid_argument("model_curve: need lo < hi and at least 6 points");
  }
  const double w_lo = omega_from_nm(hi_nm);
  const double w_hi = omega_from_nm(lo_nm);
  std::vector<double> lam(n_points);
  std::vector<double> k(n_points);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n_points; ++i) {
    // i = 0 is the shortest wavelength; walk omega downwards.
    const double w = w_hi - (w_hi - w_lo) * static_cast<double>(i) /
                                static_cast<double>(n_points - 1);
    lam[i] = nm_from_omega(w);
    k[i] = propagation_constant_at(segment, w, options);
  }
  DispersionCurve curve(std::move(lam), std::move(k), CurveProvenance::Model);
  curve.set_source_label(segment.label);
  return curve;
}

std::vector<CurveRow> tabulate(const FiberSegment& segment, double lo_nm, double hi_nm,
                               double step_nm, const ModelOptions& options) {
  if (!(step_nm > 0.0) || !(lo_nm <= hi_nm)) {
    throw std::invalid_argument("tabulate: need step > 0 and lo <= hi");
  }
  const auto n = static_cast<std::size_t>(std::floor((hi_nm - lo_nm) / step_nm + 1e-9)) + 1;
  std::vector<CurveRow> rows(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = lo_nm + step_nm * static_cast<double>(i);
    const double n_eff = effective_index(segment, lam, options);
    rows[i] = CurveRow{lam, n_eff, n_eff * 2.0 * kPi / (lam * kNanometre),
                       group_slowness(segment, lam, options) / kPicosecond,
                       gvd(segment, lam, options)};
  }
  return rows;
}

StructureFit fit_structure(std::span<const GvdSample> samples, double initial_radius_nm,
                           double initial_air_fill, const FitOptions& options) {
  if (samples.size() < 6) {
    throw std::invalid_argument("fit_structure: at least 6 gvd samples required");
  }
  bool has_positive = false;
  bool has_negative = false;
  for (const auto& s : samples) {
    if (!std::isfinite(s.wavelength_nm) || !std::isfinite(s.gvd_ps2_per_m)) {
      throw std::invalid_argument("fit_structure: non-finite sample");
    }
    has_positive |= s.gvd_ps2_per_m > 0.0;
    has_negative |= s.gvd_ps2_per_m < 0.0;
  }
  if (!(has_positive && has_negative)) {
    throw std::invalid_argument("fit_structure: samples must span a zero-dispersion wavelength");
  }

  const std::size_t m = samples.size();
  FiberSegment probe{"fit", initial_radius_nm, initial_air_fill, 1.0};
  probe.validate();

  auto residuals = [&](double r, double f) {
    FiberSegment seg{"fit", r, f, 1.0};
    std::vector<double> res(m);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i) {
      res[i] = gvd(seg, samples[i].wavelength_nm, options.model) - samples[i].gvd_ps2_per_m;
    }
    return res;
  };
  auto cost_of = [](const std::vector<double>& res) {
    double c = 0.0;
    for (double v : res) c += v * v;
    return c;
  };

  double r = initial_radius_nm;
  double f = initial_air_fill;
  std::vector<double> res = residuals(r, f);
  double cost = cost_of(res);
  double lambda = 1e-3;
  constexpr double kDr = 0.05;   // nm
  constexpr double kDf = 5e-5;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const auto rp = residuals(r + kDr, f);
    const auto rm = residuals(r - kDr, f);
    const auto fp = residuals(r, f + kDf);
    const auto fm = residuals(r, f - kDf);
    // Normal equations of the 2-parameter problem.
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double jr = (rp[i] - rm[i]) / (2.0 * kDr);
      const double jf = (fp[i] - fm[i]) / (2.0 * kDf);
      a11 += jr * jr;
      a12 += jr * jf;
      a22 += jf * jf;
      g1 += jr * res[i];
      g2 += jf * res[i];
    }

    bool accepted = false;
    double step_r = 0.0;
    double step_f = 0.0;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      const double b11 = a11 * (1.0 + lambda);
      const double b22 = a22 * (1.0 + lambda);
      const double det = b11 * b22 - a12 * a12;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 4.0;
        continue;
      }
      step_r = -(b22 * g1 - a12 * g2) / det;
      step_f = -(-a12 * g1 + b11 * g2) / det;
      const double r_new = r + step_r;
      const double f_new = std::clamp(f + step_f, 1e-4, 1.0 - 1e-4);
      if (!(r_new > 1.0)) {
        lambda *= 4.0;
        continue;
      }
      try {
        auto res_new = residuals(r_new, f_new);
        const double cost_new = cost_of(res_new);
        if (cost_new <= cost) {
          r = r_new;
          f = f_new;
          res = std::move(res_new);
          cost = cost_new;
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          break;
        }
      } catch (const std::exception&) {
        // trial point left the guided regime; shrink the step
      }
      lambda *= 4.0;
    }
    const StructureFit current{r, f, cost, iter};
    if (!accepted) return current;  // no downhill step left: local minimum
    const double rel = std::max(std::abs(step_r) / r, std::abs(step_f) / f);
    if (rel < options.parameter_tolerance || cost == 0.0) return current;
  }
  throw FitError("fit_structure: no convergence within iteration bound",
                 StructureFit{r, f, cost, options.max_iterations});
}

}  // namespace sfwm::dispersion
