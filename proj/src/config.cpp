#include "sfwm/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "sfwm/errors.hpp"

namespace sfwm::config {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t k) {
  return path + "[" + std::to_string(k) + "]";
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) throw ConfigError(join(path, item.key()), "unknown key");
  }
}

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError(join(path, key), "required field missing");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
  return v;
}

std::size_t count(const json& j, const std::string& path, std::size_t min) {
  if (!j.is_number_integer() || j.get<long long>() < static_cast<long long>(min)) {
    throw ConfigError(path, "expected an integer >= " + std::to_string(min));
  }
  return j.get<std::size_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::string label(const json& j, const std::string& path) {
  const std::string s = text(j, path);
  const bool ok = !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+' ||
           c == '.';
  });
  if (!ok) throw ConfigError(path, "labels use letters, digits and _ - + . only");
  return s;
}

std::pair<double, double> range(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [low, high]");
  const double lo = positive(j[0], index(path, 0));
  const double hi = positive(j[1], index(path, 1));
  if (!(hi > lo)) throw ConfigError(path, "high must exceed low");
  return {lo, hi};
}

std::vector<std::string> labels(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of labels");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(label(j[k], index(path, k)));
  return out;
}

phasematch::PumpSpec parse_pump(const json& j, const std::string& path) {
  check_keys(j, path, {"center_wavelength_nm", "fwhm_nm", "gamma_per_w_km", "peak_power_w"});
  phasematch::PumpSpec pump;
  pump.center_wavelength_nm =
      positive(field(j, path, "center_wavelength_nm"), join(path, "center_wavelength_nm"));
  pump.fwhm_nm = positive(field(j, path, "fwhm_nm"), join(path, "fwhm_nm"));
  const bool has_gamma = j.contains("gamma_per_w_km");
  const bool has_power = j.contains("peak_power_w");
  if (has_gamma != has_power) {
    throw ConfigError(join(path, has_gamma ? "peak_power_w" : "gamma_per_w_km"),
                      "gamma_per_w_km and peak_power_w must be given together");
  }
  if (has_gamma) {
    pump.gain = phasematch::Gain{
        positive(j.at("gamma_per_w_km"), join(path, "gamma_per_w_km")),
        positive(j.at("peak_power_w"), join(path, "peak_power_w"))};
  }
  return pump;
}

PhaseMatchOverride parse_override(const json& j, const std::string& path, double pump_nm) {
  check_keys(j, path,
             {"lambda_s0_nm", "lambda_i0_nm", "tau_s_ps_per_m", "theta_rad", "tau_i_sign"});
  PhaseMatchOverride o;
  o.lambda_s0_nm = positive(field(j, path, "lambda_s0_nm"), join(path, "lambda_s0_nm"));
  if (!(o.lambda_s0_nm > pump_nm)) {
    throw ConfigError(join(path, "lambda_s0_nm"), "signal must lie on the red side of the pump");
  }
  o.tau_s_ps_per_m = number(field(j, path, "tau_s_ps_per_m"), join(path, "tau_s_ps_per_m"));
  o.theta_rad = number(field(j, path, "theta_rad"), join(path, "theta_rad"));
  if (o.theta_rad < 0.0 || o.theta_rad > 1.5707963267948966) {
    throw ConfigError(join(path, "theta_rad"), "must lie in [0, pi/2]");
  }
  if (j.contains("tau_i_sign")) {
    const auto& s = j.at("tau_i_sign");
    if (!s.is_number_integer() || (s.get<int>() != 1 && s.get<int>() != -1)) {
      throw ConfigError(join(path, "tau_i_sign"), "must be +1 or -1");
    }
    o.tau_i_sign = s.get<int>();
  }
  if (j.contains("lambda_i0_nm")) {
    o.lambda_i0_nm = positive(j.at("lambda_i0_nm"), join(path, "lambda_i0_nm"));
    const double derived = phasematch::idler_wavelength_nm(pump_nm, o.lambda_s0_nm);
    if (std::abs(derived - *o.lambda_i0_nm) > 1.0) {
      std::ostringstream os;
      os << "inconsistent with energy conservation (expected " << derived << " nm)";
      throw ConfigError(join(path, "lambda_i0_nm"), os.str());
    }
  }
  return o;
}

SegmentConfig parse_segment(const json& j, const std::string& path, double pump_nm) {
  check_keys(j, path, {"label", "core_radius_nm", "air_fill", "length_m", "phase_match"});
  SegmentConfig s;
  s.segment.label = label(field(j, path, "label"), join(path, "label"));
  s.segment.core_radius_nm =
      positive(field(j, path, "core_radius_nm"), join(path, "core_radius_nm"));
  s.segment.air_fill = number(field(j, path, "air_fill"), join(path, "air_fill"));
  if (!(s.segment.air_fill > 0.0 && s.segment.air_fill < 1.0)) {
    throw ConfigError(join(path, "air_fill"), "must lie strictly between 0 and 1");
  }
  s.segment.length_m = positive(field(j, path, "length_m"), join(path, "length_m"));
  if (j.contains("phase_match")) {
    s.phase_match = parse_override(j.at("phase_match"), join(path, "phase_match"), pump_nm);
  }
  return s;
}

AssemblyConfig parse_assembly(const json& j, const std::string& path,
                              const std::set<std::string>& known) {
  check_keys(j, path, {"label", "segments"});
  AssemblyConfig a;
  a.label = label(field(j, path, "label"), join(path, "label"));
  const auto& list = field(j, path, "segments");
  const std::string lpath = join(path, "segments");
  if (!list.is_array() || list.empty()) throw ConfigError(lpath, "expected a non-empty array");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string p = index(lpath, k);
    AssemblyPiece piece;
    if (list[k].is_string()) {
      piece.segment = label(list[k], p);
    } else {
      check_keys(list[k], p, {"segment", "length_m"});
      piece.segment = label(field(list[k], p, "segment"), join(p, "segment"));
      if (list[k].contains("length_m")) {
        piece.length_m = positive(list[k].at("length_m"), join(p, "length_m"));
      }
    }
    if (!known.count(piece.segment)) throw ConfigError(p, "unknown segment '" + piece.segment + "'");
    a.pieces.push_back(piece);
  }
  return a;
}

spectra::GridOptions parse_grid(const json& j, const std::string& path) {
  check_keys(j, path, {"ns", "ni", "signal_range_nm", "idler_range_nm", "sinc_lobes"});
  spectra::GridOptions g;
  if (j.contains("ns")) g.ns = count(j.at("ns"), join(path, "ns"), 2);
  if (j.contains("ni")) g.ni = count(j.at("ni"), join(path, "ni"), 2);
  if (j.contains("signal_range_nm")) {
    g.signal_range_nm = range(j.at("signal_range_nm"), join(path, "signal_range_nm"));
  }
  if (j.contains("idler_range_nm")) {
    g.idler_range_nm = range(j.at("idler_range_nm"), join(path, "idler_range_nm"));
  }
  if (j.contains("sinc_lobes")) g.sinc_lobes = positive(j.at("sinc_lobes"), join(path, "sinc_lobes"));
  return g;
}

FilterConfig parse_filter(const json& j, const std::string& path) {
  check_keys(j, path, {"fwhm_nm", "scan_start_nm", "scan_stop_nm", "scan_points", "source"});
  FilterConfig f;
  f.fwhm_nm = positive(field(j, path, "fwhm_nm"), join(path, "fwhm_nm"));
  f.scan_start_nm = positive(field(j, path, "scan_start_nm"), join(path, "scan_start_nm"));
  f.scan_stop_nm = positive(field(j, path, "scan_stop_nm"), join(path, "scan_stop_nm"));
  if (!(f.scan_stop_nm > f.scan_start_nm)) {
    throw ConfigError(join(path, "scan_stop_nm"), "must exceed scan_start_nm");
  }
  f.scan_points = count(field(j, path, "scan_points"), join(path, "scan_points"), 2);
  if (j.contains("source")) {
    f.source = text(j.at("source"), join(path, "source"));
    if (f.source != "assembly" && f.source != "jsa") {
      throw ConfigError(join(path, "source"), "must be \"assembly\" or \"jsa\"");
    }
  }
  return f;
}

PlannerConfig parse_planner(const json& j, const std::string& path,
                            const std::set<std::string>& known) {
  check_keys(j, path, {"target_total_length_m", "tolerance_m", "max_segments", "method", "pool",
                       "enumeration_cap"});
  PlannerConfig p;
  p.target_total_length_m =
      positive(field(j, path, "target_total_length_m"), join(path, "target_total_length_m"));
  if (j.contains("tolerance_m")) {
    p.tolerance_m = number(j.at("tolerance_m"), join(path, "tolerance_m"));
    if (*p.tolerance_m < 0.0) throw ConfigError(join(path, "tolerance_m"), "must be >= 0");
  }
  if (j.contains("max_segments")) p.max_segments = count(j.at("max_segments"), join(path, "max_segments"), 1);
  if (j.contains("method")) {
    p.method = text(j.at("method"), join(path, "method"));
    if (p.method != "exhaustive" && p.method != "greedy") {
      throw ConfigError(join(path, "method"), "must be \"exhaustive\" or \"greedy\"");
    }
  }
  if (j.contains("pool")) {
    p.pool = labels(j.at("pool"), join(path, "pool"));
    for (std::size_t k = 0; k < p.pool.size(); ++k) {
      if (!known.count(p.pool[k])) {
        throw ConfigError(index(join(path, "pool"), k), "unknown segment '" + p.pool[k] + "'");
      }
    }
  }
  if (j.contains("enumeration_cap")) {
    p.enumeration_cap = count(j.at("enumeration_cap"), join(path, "enumeration_cap"), 1);
  }
  return p;
}

DispersionConfig parse_dispersion(const json& j, const std::string& path) {
  check_keys(j, path, {"cladding", "mode_equation", "range_nm", "step_nm", "zdw_range_nm",
                       "curve_range_nm", "curve_points"});
  DispersionConfig d;
  if (j.contains("cladding")) {
    const auto s = text(j.at("cladding"), join(path, "cladding"));
    if (s == "index_average") {
      d.model.cladding = dispersion::CladdingRule::IndexAverage;
    } else if (s == "permittivity_average") {
      d.model.cladding = dispersion::CladdingRule::PermittivityAverage;
    } else {
      throw ConfigError(join(path, "cladding"), "must be \"index_average\" or \"permittivity_average\"");
    }
  }
  if (j.contains("mode_equation")) {
    const auto s = text(j.at("mode_equation"), join(path, "mode_equation"));
    if (s == "vector_he11") {
      d.model.mode = dispersion::ModeEquation::VectorHE11;
    } else if (s == "scalar_lp01") {
      d.model.mode = dispersion::ModeEquation::ScalarLP01;
    } else {
      throw ConfigError(join(path, "mode_equation"), "must be \"vector_he11\" or \"scalar_lp01\"");
    }
  }
  auto in_window = [&](const std::pair<double, double>& r, const std::string& p) {
    if (r.first < dispersion::kSellmeierMinNm || r.second > dispersion::kSellmeierMaxNm) {
      throw ConfigError(p, "must lie inside [300, 2000] nm");
    }
    return r;
  };
  if (j.contains("range_nm")) d.range_nm = in_window(range(j.at("range_nm"), join(path, "range_nm")), join(path, "range_nm"));
  if (j.contains("step_nm")) d.step_nm = positive(j.at("step_nm"), join(path, "step_nm"));
  if (j.contains("zdw_range_nm")) {
    d.zdw_range_nm = in_window(range(j.at("zdw_range_nm"), join(path, "zdw_range_nm")), join(path, "zdw_range_nm"));
  }
  if (j.contains("curve_range_nm")) {
    d.curve_range_nm = in_window(range(j.at("curve_range_nm"), join(path, "curve_range_nm")), join(path, "curve_range_nm"));
  }
  if (j.contains("curve_points")) d.curve_points = count(j.at("curve_points"), join(path, "curve_points"), 6);
  return d;
}

GvmConfig parse_gvm(const json& j, const std::string& path, const std::set<std::string>& known) {
  check_keys(j, path, {"pump_range_nm", "points", "segments"});
  GvmConfig g;
  if (j.contains("pump_range_nm")) g.pump_range_nm = range(j.at("pump_range_nm"), join(path, "pump_range_nm"));
  if (j.contains("points")) g.points = count(j.at("points"), join(path, "points"), 2);
  if (j.contains("segments")) {
    g.segments = labels(j.at("segments"), join(path, "segments"));
    for (std::size_t k = 0; k < g.segments.size(); ++k) {
      if (!known.count(g.segments[k])) {
        throw ConfigError(index(join(path, "segments"), k), "unknown segment '" + g.segments[k] + "'");
      }
    }
  }
  return g;
}

FitConfig parse_fit(const json& j, const std::string& path, const std::filesystem::path& base) {
  check_keys(j, path, {"gvd_csv", "initial_core_radius_nm", "initial_air_fill", "noise_fraction",
                       "max_iterations"});
  FitConfig f;
  const std::filesystem::path csv = text(field(j, path, "gvd_csv"), join(path, "gvd_csv"));
  f.gvd_csv = csv.is_absolute() ? csv : base / csv;
  if (!std::filesystem::is_regular_file(f.gvd_csv)) {
    throw ConfigError(join(path, "gvd_csv"), "file not found: " + f.gvd_csv.string());
  }
  f.initial_core_radius_nm =
      positive(field(j, path, "initial_core_radius_nm"), join(path, "initial_core_radius_nm"));
  f.initial_air_fill = number(field(j, path, "initial_air_fill"), join(path, "initial_air_fill"));
  if (!(f.initial_air_fill > 0.0 && f.initial_air_fill < 1.0)) {
    throw ConfigError(join(path, "initial_air_fill"), "must lie strictly between 0 and 1");
  }
  if (j.contains("noise_fraction")) {
    f.noise_fraction = number(j.at("noise_fraction"), join(path, "noise_fraction"));
    if (f.noise_fraction < 0.0) throw ConfigError(join(path, "noise_fraction"), "must be >= 0");
  }
  if (j.contains("max_iterations")) {
    f.max_iterations = static_cast<int>(count(j.at("max_iterations"), join(path, "max_iterations"), 1));
  }
  return f;
}

G2TableConfig parse_g2_table(const json& j, const std::string& path) {
  check_keys(j, path, {"pump_fwhm_nm"});
  const auto& list = field(j, path, "pump_fwhm_nm");
  const std::string lpath = join(path, "pump_fwhm_nm");
  if (!list.is_array() || list.empty()) throw ConfigError(lpath, "expected a non-empty array");
  G2TableConfig t;
  for (std::size_t k = 0; k < list.size(); ++k) t.pump_fwhm_nm.push_back(positive(list[k], index(lpath, k)));
  return t;
}

}  // namespace

std::vector<double> FilterConfig::centers_nm() const {
  std::vector<double> out(scan_points);
  const double step = (scan_stop_nm - scan_start_nm) / static_cast<double>(scan_points - 1);
  for (std::size_t k = 0; k < scan_points; ++k) out[k] = scan_start_nm + step * static_cast<double>(k);
  return out;
}

const SegmentConfig& RunConfig::segment(const std::string& label) const {
  for (const auto& s : segments) {
    if (s.segment.label == label) return s;
  }
  throw std::out_of_range("unknown segment '" + label + "'");
}

RunConfig parse_config(const std::string& content, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "", {"pump", "segments", "assemblies", "grid", "model", "filter", "planner",
                        "dispersion", "gvm", "fit", "g2_table", "output_dir"});
  RunConfig cfg;
  cfg.pump = parse_pump(field(root, "", "pump"), "pump");

  const auto& segs = field(root, "", "segments");
  if (!segs.is_array() || segs.empty()) throw ConfigError("segments", "expected a non-empty array");
  std::set<std::string> known;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const std::string p = index("segments", k);
    cfg.segments.push_back(parse_segment(segs[k], p, cfg.pump.center_wavelength_nm));
    if (!known.insert(cfg.segments.back().segment.label).second) {
      throw ConfigError(join(p, "label"), "duplicate label");
    }
  }

  if (root.contains("assemblies")) {
    const auto& list = root.at("assemblies");
    if (!list.is_array()) throw ConfigError("assemblies", "expected an array");
    std::set<std::string> seen;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string p = index("assemblies", k);
      cfg.assemblies.push_back(parse_assembly(list[k], p, known));
      if (!seen.insert(cfg.assemblies.back().label).second) {
        throw ConfigError(join(p, "label"), "duplicate label");
      }
    }
  }
  if (root.contains("grid")) cfg.grid = parse_grid(root.at("grid"), "grid");
  if (root.contains("model")) {
    const auto m = text(root.at("model"), "model");
    if (m == "linearized") {
      cfg.model = spectra::DeltaKModel::Linearized;
    } else if (m == "full") {
      cfg.model = spectra::DeltaKModel::Full;
    } else {
      throw ConfigError("model", "must be \"linearized\" or \"full\"");
    }
  }
  if (root.contains("filter")) cfg.filter = parse_filter(root.at("filter"), "filter");
  if (root.contains("planner")) cfg.planner = parse_planner(root.at("planner"), "planner", known);
  if (root.contains("dispersion")) cfg.dispersion = parse_dispersion(root.at("dispersion"), "dispersion");
  if (root.contains("gvm")) cfg.gvm = parse_gvm(root.at("gvm"), "gvm", known);
  if (root.contains("fit")) cfg.fit = parse_fit(root.at("fit"), "fit", base_dir);
  if (root.contains("g2_table")) cfg.g2_table = parse_g2_table(root.at("g2_table"), "g2_table");
  if (root.contains("output_dir")) {
    cfg.output_dir = std::filesystem::path(text(root.at("output_dir"), "output_dir"));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace sfwm::config
