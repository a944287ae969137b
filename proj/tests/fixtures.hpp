#pragma once

// Shared test data: the four elemental segments and their published
// linearization at a 1070 nm pump.

#include <string>
#include <vector>

#include "sfwm/phasematch.hpp"
#include "sfwm/planner.hpp"
#include "sfwm/spectra.hpp"

namespace fixtures {

struct Elemental {
  std::string label;
  double core_radius_nm;
  double lambda_s0_nm;
  double lambda_i0_nm;
  double tau_s_ps_per_m;
  double theta_rad;
};

inline const std::vector<Elemental>& elementals() {
  static const std::vector<Elemental> rows{
      {"S1", 947.0, 1409.9, 862.1, 3.2, 0.004},
      {"S2", 947.5, 1413.6, 860.8, 3.2, 0.002},
      {"S3", 948.0, 1417.3, 859.4, 3.3, 0.001},
      {"S4", 948.5, 1421.0, 858.1, 3.4, 0.004},
  };
  return rows;
}

inline constexpr double kPumpNm = 1070.0;
inline constexpr double kAirFill = 0.296;

inline const Elemental& elemental(const std::string& label) {
  for (const auto& e : elementals()) {
    if (e.label == label) return e;
  }
  throw std::out_of_range(label);
}

inline sfwm::phasematch::PhaseMatchPoint published(const std::string& label, int sign = +1) {
  const auto& e = elemental(label);
  return sfwm::phasematch::from_published(kPumpNm, e.lambda_s0_nm, e.tau_s_ps_per_m, e.theta_rad,
                                          sign);
}

inline sfwm::dispersion::FiberSegment structure(const std::string& label, double length_m = 0.3) {
  return {label, elemental(label).core_radius_nm, kAirFill, length_m};
}

inline sfwm::phasematch::PumpSpec pump(double fwhm_nm = 2.0) {
  return {kPumpNm, fwhm_nm, std::nullopt};
}

inline sfwm::spectra::AssemblySpec assembly(const std::vector<std::string>& labels,
                                            double length_m = 0.3, int sign = +1) {
  sfwm::spectra::AssemblySpec a;
  for (const auto& l : labels) a.segments.push_back({l, length_m, published(l, sign), nullptr});
  return a;
}

inline sfwm::planner::SegmentPool pool(const std::vector<std::string>& labels, double target_m) {
  sfwm::planner::SegmentPool p;
  for (const auto& l : labels) p.candidates.push_back({structure(l), published(l)});
  p.constraints.target_total_length_m = target_m;
  return p;
}

struct G2Reference {
  std::string configuration;
  std::vector<std::string> labels;
  double segment_length_m;
  double g2_2nm;
  double g2_5nm;
};

inline const std::vector<G2Reference>& g2_reference() {
  static const std::vector<G2Reference> rows{
      {"S1+S2", {"S1", "S2"}, 0.3, 1.62, 1.86},
      {"S1+S3", {"S1", "S3"}, 0.3, 1.43, 1.75},
      {"S1+S2+S3", {"S1", "S2", "S3"}, 0.3, 1.52, 1.82},
      {"S1+S2+S3+S4", {"S1", "S2", "S3", "S4"}, 0.3, 1.42, 1.75},
      {"S1+S4+S2+S3", {"S1", "S4", "S2", "S3"}, 0.3, 1.44, 1.76},
      {"S1+S3 (3 m)", {"S1", "S3"}, 1.5, 1.49, 1.79},
      {"S2 0.3 m", {"S2"}, 0.3, 1.56, 1.81},
      {"S2 0.6 m", {"S2"}, 0.6, 1.75, 1.90},
      {"S2 0.9 m", {"S2"}, 0.9, 1.83, 1.93},
      {"S2 1.5 m", {"S2"}, 1.5, 1.89, 1.96},
  };
  return rows;
}

}  // namespace fixtures
