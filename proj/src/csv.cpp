#include "sfwm/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sfwm/units.hpp"

namespace sfwm::io {

namespace {

double parse_number(const std::string& field, std::size_t line) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return value;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 12);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  std::string s(buf.data(), ptr);
  if (s == "-0") s = "0";
  return s;
}

std::vector<dispersion::GvdSample> read_gvd_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "wavelength_nm,beta2_ps2_per_m") {
    throw std::runtime_error("line 1: expected header 'wavelength_nm,beta2_ps2_per_m'");
  }
  std::vector<dispersion::GvdSample> samples;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw std::runtime_error("line " + std::to_string(number) + ": expected two fields");
    }
    samples.push_back({parse_number(line.substr(0, comma), number),
                       parse_number(line.substr(comma + 1), number)});
  }
  return samples;
}

std::vector<dispersion::GvdSample> read_gvd_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_gvd_csv(in);
}

void write_gvd_csv(std::ostream& out, std::span<const dispersion::GvdSample> samples) {
  out << "wavelength_nm,beta2_ps2_per_m\n";
  for (const auto& s : samples) {
    out << format_number(s.wavelength_nm) << ',' << format_number(s.gvd_ps2_per_m) << '\n';
  }
}

void write_dispersion_curve(std::ostream& out, std::span<const dispersion::CurveRow> rows) {
  out << "wavelength_nm,n_eff,k_rad_per_m,k1_ps_per_m,beta2_ps2_per_m\n";
  for (const auto& r : rows) {
    out << format_number(r.wavelength_nm) << ',' << format_number(r.n_eff) << ','
        << format_number(r.k_rad_per_m) << ',' << format_number(r.k1_ps_per_m) << ','
        << format_number(r.beta2_ps2_per_m) << '\n';
  }
}

void write_gvm_curve(std::ostream& out, std::span<const phasematch::GvmRow> rows) {
  out << "lambda_p_nm,lambda_s0_nm,lambda_i0_nm,tau_s_ps_per_m,tau_i_ps_per_m,theta_rad\n";
  for (const auto& r : rows) {
    out << format_number(r.pump_nm);
    if (r.point) {
      const auto& p = *r.point;
      out << ',' << format_number(p.lambda_s0_nm) << ',' << format_number(p.lambda_i0_nm) << ','
          << format_number(p.tau_s_ps_per_m) << ',' << format_number(p.tau_i_ps_per_m) << ','
          << format_number(p.theta_rad);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
}

void write_phasematch_table(std::ostream& out, std::span<const PhaseMatchRow> rows) {
  out << "label,r_nm,f,lambda_p_nm,lambda_s0_nm,lambda_i0_nm,tau_s_ps_per_m,tau_i_ps_per_m,"
         "theta_rad,ambiguous\n";
  for (const auto& r : rows) {
    const auto& p = r.point;
    out << r.label << ',' << format_number(r.core_radius_nm) << ',' << format_number(r.air_fill)
        << ',' << format_number(p.pump_wavelength_nm) << ',' << format_number(p.lambda_s0_nm)
        << ',' << format_number(p.lambda_i0_nm) << ',' << format_number(p.tau_s_ps_per_m) << ','
        << format_number(p.tau_i_ps_per_m) << ',' << format_number(p.theta_rad) << ','
        << (p.ambiguous ? 1 : 0) << '\n';
  }
}

void write_jsi(std::ostream& out, const spectra::JsaGrid& jsa) {
  const std::size_t ns = jsa.ns();
  const std::size_t ni = jsa.ni();
  const auto& g = jsa.grid();
  out << "signal_nm";
  // Frequency axes ascend, so wavelengths ascend when walked backwards.
  for (std::size_t i = ni; i-- > 0;) out << ',' << format_number(nm_from_omega(g.idler.at(i)));
  out << '\n';
  for (std::size_t s = ns; s-- > 0;) {
    out << format_number(nm_from_omega(g.signal.at(s)));
    for (std::size_t i = ni; i-- > 0;) out << ',' << format_number(jsa.intensity(s, i));
    out << '\n';
  }
}

void write_spectrum(std::ostream& out, const spectra::Spectrum1D& spectrum) {
  const auto nm = spectrum.in_wavelength();
  out << "x_nm,intensity\n";
  for (std::size_t k = 0; k < nm.axis.size(); ++k) {
    out << format_number(nm.axis[k]) << ',' << format_number(nm.values[k]) << '\n';
  }
}

void write_g2_table(std::ostream& out, std::span<const correlation::G2Row> rows) {
  out << "configuration,total_length_m,pump_fwhm_nm,g2,schmidt_number,purity\n";
  for (const auto& r : rows) {
    out << r.configuration << ',' << format_number(r.total_length_m) << ','
        << format_number(r.pump_fwhm_nm) << ',' << format_number(r.g2) << ','
        << format_number(r.schmidt_number) << ',' << format_number(r.purity) << '\n';
  }
}

}  // namespace sfwm::io
