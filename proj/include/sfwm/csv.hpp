#pragma once

// Plain CSV readers and writers. Floats use 12 significant digits via
// std::to_chars, so output is locale independent and byte stable.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sfwm/correlation.hpp"
#include "sfwm/dispersion.hpp"
#include "sfwm/phasematch.hpp"
#include "sfwm/spectra.hpp"

namespace sfwm::io {

std::string format_number(double value);

// Header `wavelength_nm,beta2_ps2_per_m`. Throws std::runtime_error naming the line.
std::vector<dispersion::GvdSample> read_gvd_csv(std::istream& in);
std::vector<dispersion::GvdSample> read_gvd_csv(const std::string& path);

void write_gvd_csv(std::ostream& out, std::span<const dispersion::GvdSample> samples);

void write_dispersion_curve(std::ostream& out, std::span<const dispersion::CurveRow> rows);

void write_gvm_curve(std::ostream& out, std::span<const phasematch::GvmRow> rows);

// label,r_nm,f,lambda_p_nm,lambda_s0_nm,lambda_i0_nm,tau_s_ps_per_m,tau_i_ps_per_m,theta_rad,ambiguous
struct PhaseMatchRow {
  std::string label;
  double core_radius_nm;
  double air_fill;
  phasematch::PhaseMatchPoint point;
};
void write_phasematch_table(std::ostream& out, std::span<const PhaseMatchRow> rows);

// Matrix layout: corner cell, then idler wavelengths; each row starts with
// the signal wavelength. Both wavelength axes ascending.
void write_jsi(std::ostream& out, const spectra::JsaGrid& jsa);

// `x_nm,intensity`, converting a frequency axis to ascending nm.
void write_spectrum(std::ostream& out, const spectra::Spectrum1D& spectrum);

void write_g2_table(std::ostream& out, std::span<const correlation::G2Row> rows);

}  // namespace sfwm::io
