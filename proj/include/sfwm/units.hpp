#pragma once

#include <numbers>

namespace sfwm {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;

inline constexpr double kNanometre = 1e-9;
inline constexpr double kPicosecond = 1e-12;
inline constexpr double kPs2 = 1e-24;

// Angular frequency (rad/s) of a vacuum wavelength given in nm.
inline constexpr double omega_from_nm(double wavelength_nm) {
  return 2.0 * kPi * kSpeedOfLight / (wavelength_nm * kNanometre);
}

inline constexpr double nm_from_omega(double omega) {
  return 2.0 * kPi * kSpeedOfLight / omega / kNanometre;
}

// Width in rad/s of a wavelength interval of `width_nm` centred at `center_nm`.
inline constexpr double omega_width_from_nm(double width_nm, double center_nm) {
  const double lam = center_nm * kNanometre;
  return 2.0 * kPi * kSpeedOfLight * width_nm * kNanometre / (lam * lam);
}

}  // namespace sfwm
