#include "sfwm/run.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "sfwm/correlation.hpp"
#include "sfwm/csv.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/planner.hpp"
#include "sfwm/units.hpp"

namespace sfwm::run {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Thrown with the pipeline stage that failed.
struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage(std::move(stage)) {}
  std::string stage;
};

template <class F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::string render(const std::function<void(std::ostream&)>& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json axis_json(const spectra::Axis& a) {
  ordered_json j;
  j["start_rad_per_s"] = a.start;
  j["step_rad_per_s"] = a.step;
  j["n"] = a.n;
  j["range_nm"] = {nm_from_omega(a.back()), nm_from_omega(a.start)};
  return j;
}

ordered_json grid_json(const std::string& label, const spectra::FrequencyGrid& g) {
  ordered_json j;
  j["label"] = label;
  j["signal"] = axis_json(g.signal);
  j["idler"] = axis_json(g.idler);
  return j;
}

ordered_json pump_json(const phasematch::PumpSpec& p) {
  ordered_json j;
  j["center_wavelength_nm"] = p.center_wavelength_nm;
  j["fwhm_nm"] = p.fwhm_nm;
  j["sigma_p_rad_per_s"] = p.sigma_p();
  if (p.gain) {
    j["gamma_per_w_km"] = p.gain->gamma_per_w_km;
    j["peak_power_w"] = p.gain->peak_power_w;
  }
  return j;
}

ordered_json point_json(const phasematch::PhaseMatchPoint& p) {
  ordered_json j;
  j["lambda_s0_nm"] = p.lambda_s0_nm;
  j["lambda_i0_nm"] = p.lambda_i0_nm;
  j["tau_s_ps_per_m"] = p.tau_s_ps_per_m;
  j["tau_i_ps_per_m"] = p.tau_i_ps_per_m;
  j["theta_rad"] = p.theta_rad;
  if (p.ambiguous) j["ambiguous"] = true;
  return j;
}

const char* model_name(spectra::DeltaKModel m) {
  return m == spectra::DeltaKModel::Full ? "full" : "linearized";
}

// Resolves segments and assemblies from a config, caching solved points and curves.
class Resolver {
 public:
  explicit Resolver(const config::RunConfig& cfg) : cfg_(cfg) {}

  phasematch::PhaseMatchPoint point(const config::SegmentConfig& s) {
    const auto& label = s.segment.label;
    if (auto it = points_.find(label); it != points_.end()) return it->second;
    const double pump_nm = cfg_.pump.center_wavelength_nm;
    phasematch::PhaseMatchPoint p;
    if (s.phase_match) {
      const auto& o = *s.phase_match;
      p = phasematch::from_published(pump_nm, o.lambda_s0_nm, o.tau_s_ps_per_m, o.theta_rad,
                                     o.tau_i_sign);
    } else {
      p = in_stage("phasematch", [&] {
        phasematch::SolveOptions opts;
        opts.model = cfg_.dispersion.model;
        return phasematch::solve_phase_match(s.segment, pump_nm, opts);
      });
    }
    points_.emplace(label, p);
    return p;
  }

  std::shared_ptr<const dispersion::DispersionCurve> curve(const config::SegmentConfig& s) {
    const auto& label = s.segment.label;
    if (auto it = curves_.find(label); it != curves_.end()) return it->second;
    auto c = in_stage("dispersion", [&] {
      const auto& d = cfg_.dispersion;
      auto made = std::make_shared<dispersion::DispersionCurve>(dispersion::model_curve(
          s.segment, d.curve_range_nm.first, d.curve_range_nm.second, d.curve_points, d.model));
      made->set_source_label(label);
      return std::shared_ptr<const dispersion::DispersionCurve>(made);
    });
    curves_.emplace(label, c);
    return c;
  }

  spectra::AssemblySpec assembly(const config::AssemblyConfig& a) {
    spectra::AssemblySpec spec;
    spec.model = cfg_.model;
    for (const auto& piece : a.pieces) {
      const auto& s = cfg_.segment(piece.segment);
      spectra::AssemblySegment seg;
      seg.label = piece.segment;
      seg.length_m = piece.length_m.value_or(s.segment.length_m);
      seg.linearization = point(s);
      if (cfg_.model == spectra::DeltaKModel::Full) seg.curve = curve(s);
      spec.segments.push_back(std::move(seg));
    }
    return spec;
  }

  // Configured assemblies, or every segment in order when none are given.
  std::vector<std::pair<std::string, spectra::AssemblySpec>> assemblies() {
    std::vector<config::AssemblyConfig> list = cfg_.assemblies;
    if (list.empty()) {
      config::AssemblyConfig all{"assembly", {}};
      for (const auto& s : cfg_.segments) all.pieces.push_back({s.segment.label, std::nullopt});
      list.push_back(all);
    }
    std::vector<std::pair<std::string, spectra::AssemblySpec>> out;
    for (const auto& a : list) out.emplace_back(a.label, assembly(a));
    return out;
  }

 private:
  const config::RunConfig& cfg_;
  std::map<std::string, phasematch::PhaseMatchPoint> points_;
  std::map<std::string, std::shared_ptr<const dispersion::DispersionCurve>> curves_;
};

struct Context {
  const config::RunConfig& cfg;
  Resolver resolver;
  Outputs files;
  ordered_json grids = ordered_json::array();
  std::uint64_t seed;

  void add_grid(const std::string& label, const spectra::FrequencyGrid& g) {
    grids.push_back(grid_json(label, g));
  }
};

spectra::JsaGrid build(Context& ctx, const std::string& label, const spectra::AssemblySpec& a,
                       const phasematch::PumpSpec& pump) {
  return in_stage("spectra", [&] {
    const auto grid = spectra::auto_grid(a, pump, ctx.cfg.grid);
    ctx.add_grid(label, grid);
    return spectra::build_jsa(a, pump, grid, spectra::Execution::Parallel, ctx.cfg.grid);
  });
}

ordered_json jsa_sidecar(const std::string& label, const spectra::JsaGrid& jsa,
                         const config::RunConfig& cfg) {
  ordered_json j;
  j["assembly"] = label;
  j["model"] = model_name(cfg.model);
  j["pump"] = pump_json(jsa.pump());
  ordered_json segs = ordered_json::array();
  for (const auto& s : jsa.assembly().segments) {
    ordered_json e;
    e["label"] = s.label;
    e["length_m"] = s.length_m;
    e["linearization"] = point_json(s.linearization);
    segs.push_back(e);
  }
  j["segments"] = segs;
  j["grid"] = grid_json(label, jsa.grid());
  j["normalization"] = "raw";
  return j;
}

void cmd_dispersion(Context& ctx) {
  const auto& d = ctx.cfg.dispersion;
  std::ostringstream zdw;
  zdw << "label,zdw_nm\n";
  for (const auto& s : ctx.cfg.segments) {
    const auto rows = in_stage("dispersion", [&] {
      return dispersion::tabulate(s.segment, d.range_nm.first, d.range_nm.second, d.step_nm, d.model);
    });
    ctx.files["dispersion_" + s.segment.label + ".csv"] =
        render([&](std::ostream& os) { io::write_dispersion_curve(os, rows); });
    const auto roots = in_stage("dispersion", [&] {
      return dispersion::find_zdw(s.segment, d.zdw_range_nm.first, d.zdw_range_nm.second, d.model);
    });
    for (double r : roots) zdw << s.segment.label << ',' << io::format_number(r) << '\n';
  }
  ctx.files["zdw.csv"] = zdw.str();
}

void cmd_fit(Context& ctx) {
  if (!ctx.cfg.fit) throw StageError("config", "fit: section missing");
  const auto& f = *ctx.cfg.fit;
  auto samples = in_stage("io", [&] { return io::read_gvd_csv(f.gvd_csv.string()); });
  if (f.noise_fraction > 0.0) {
    std::mt19937_64 rng(ctx.seed);
    std::normal_distribution<double> noise(0.0, f.noise_fraction);
    for (auto& s : samples) s.gvd_ps2_per_m *= 1.0 + noise(rng);
  }
  dispersion::FitOptions opts;
  opts.max_iterations = f.max_iterations;
  opts.model = ctx.cfg.dispersion.model;
  ordered_json j;
  j["samples"] = samples.size();
  j["noise_fraction"] = f.noise_fraction;
  j["initial_core_radius_nm"] = f.initial_core_radius_nm;
  j["initial_air_fill"] = f.initial_air_fill;
  const auto fit = in_stage("dispersion", [&] {
    return dispersion::fit_structure(samples, f.initial_core_radius_nm, f.initial_air_fill, opts);
  });
  j["core_radius_nm"] = fit.core_radius_nm;
  j["air_fill"] = fit.air_fill;
  j["residual_ps4_per_m2"] = fit.residual;
  j["iterations"] = fit.iterations;
  ctx.files["fit.json"] = dump(j);
  ctx.files["fit_samples.csv"] =
      render([&](std::ostream& os) { io::write_gvd_csv(os, samples); });
}

void cmd_phasematch(Context& ctx) {
  std::vector<io::PhaseMatchRow> rows;
  for (const auto& s : ctx.cfg.segments) {
    rows.push_back({s.segment.label, s.segment.core_radius_nm, s.segment.air_fill,
                    ctx.resolver.point(s)});
  }
  ctx.files["phasematch.csv"] =
      render([&](std::ostream& os) { io::write_phasematch_table(os, rows); });
}

void cmd_gvm_curve(Context& ctx) {
  const auto& g = ctx.cfg.gvm;
  std::vector<std::string> labels = g.segments;
  if (labels.empty()) {
    for (const auto& s : ctx.cfg.segments) labels.push_back(s.segment.label);
  }
  phasematch::SolveOptions opts;
  opts.model = ctx.cfg.dispersion.model;
  std::ostringstream roots;
  roots << "label,pump_tau_i_zero_nm,pump_tau_s_zero_nm\n";
  for (const auto& label : labels) {
    const auto& seg = ctx.cfg.segment(label).segment;
    const auto rows = in_stage("phasematch", [&] {
      return phasematch::gvm_curve(seg, g.pump_range_nm.first, g.pump_range_nm.second, g.points, opts);
    });
    ctx.files["gvm_" + label + ".csv"] = render([&](std::ostream& os) { io::write_gvm_curve(os, rows); });
    const auto r = in_stage("phasematch", [&] {
      return phasematch::agvm_roots(seg, g.pump_range_nm.first, g.pump_range_nm.second, opts);
    });
    roots << label << ',' << (r.pump_for_tau_i_zero ? io::format_number(*r.pump_for_tau_i_zero) : "")
          << ',' << (r.pump_for_tau_s_zero ? io::format_number(*r.pump_for_tau_s_zero) : "") << '\n';
  }
  ctx.files["agvm_roots.csv"] = roots.str();
}

void cmd_jsa(Context& ctx) {
  for (const auto& [label, a] : ctx.resolver.assemblies()) {
    const auto jsa = build(ctx, label, a, ctx.cfg.pump);
    ctx.files["jsi_" + label + ".csv"] = render([&](std::ostream& os) { io::write_jsi(os, jsa); });
    ctx.files["jsi_" + label + ".meta.json"] = dump(jsa_sidecar(label, jsa, ctx.cfg));
  }
}

void cmd_marginal(Context& ctx) {
  for (const auto& [label, a] : ctx.resolver.assemblies()) {
    const auto jsa = build(ctx, label, a, ctx.cfg.pump);
    const auto sig = spectra::marginal(jsa, spectra::Side::Signal);
    const auto idl = spectra::marginal(jsa, spectra::Side::Idler);
    ctx.files["marginal_signal_" + label + ".csv"] =
        render([&](std::ostream& os) { io::write_spectrum(os, sig); });
    ctx.files["marginal_idler_" + label + ".csv"] =
        render([&](std::ostream& os) { io::write_spectrum(os, idl); });
    ctx.files["marginal_" + label + ".meta.json"] = dump(jsa_sidecar(label, jsa, ctx.cfg));
  }
}

void cmd_filter_scan(Context& ctx) {
  if (!ctx.cfg.filter) throw StageError("config", "filter: section missing");
  const auto& f = *ctx.cfg.filter;
  const auto centers = f.centers_nm();
  for (const auto& [label, a] : ctx.resolver.assemblies()) {
    spectra::FilterScan scan;
    if (f.source == "jsa") {
      const auto jsa = build(ctx, label, a, ctx.cfg.pump);
      scan = in_stage("spectra", [&] { return spectra::filter_scan(jsa, f.fwhm_nm, centers); });
    } else {
      scan = in_stage("spectra", [&] {
        ctx.add_grid(label, spectra::auto_grid(a, ctx.cfg.pump, ctx.cfg.grid));
        return spectra::filter_scan(a, ctx.cfg.pump, f.fwhm_nm, centers, ctx.cfg.grid);
      });
    }
    ctx.files["filter_scan_" + label + ".csv"] =
        render([&](std::ostream& os) { io::write_spectrum(os, scan.spectrum); });
    ordered_json meta;
    meta["assembly"] = label;
    meta["source"] = f.source;
    meta["filter_fwhm_nm"] = f.fwhm_nm;
    meta["pump"] = pump_json(ctx.cfg.pump);
    meta["outside_support"] = scan.outside_support;
    ctx.files["filter_scan_" + label + ".meta.json"] = dump(meta);
  }
}

std::vector<correlation::G2Row> g2_rows(Context& ctx, const std::vector<double>& fwhms) {
  std::vector<correlation::G2Case> cases;
  for (const auto& [label, a] : ctx.resolver.assemblies()) {
    for (double w : fwhms) {
      auto pump = ctx.cfg.pump;
      pump.fwhm_nm = w;
      cases.push_back({label, a, pump});
    }
  }
  auto rows = in_stage("correlation", [&] { return correlation::g2_table(cases, ctx.cfg.grid); });
  for (const auto& r : rows) ctx.add_grid(r.configuration, r.grid);
  return rows;
}

void cmd_g2(Context& ctx) {
  const auto rows = g2_rows(ctx, {ctx.cfg.pump.fwhm_nm});
  ctx.files["g2.csv"] = render([&](std::ostream& os) { io::write_g2_table(os, rows); });
}

void cmd_g2_table(Context& ctx) {
  if (!ctx.cfg.g2_table) throw StageError("config", "g2_table: section missing");
  const auto rows = g2_rows(ctx, ctx.cfg.g2_table->pump_fwhm_nm);
  ctx.files["g2_table.csv"] = render([&](std::ostream& os) { io::write_g2_table(os, rows); });
}

void cmd_plan(Context& ctx) {
  if (!ctx.cfg.planner) throw StageError("config", "planner: section missing");
  const auto& p = *ctx.cfg.planner;
  planner::SegmentPool pool;
  std::vector<std::string> labels = p.pool;
  if (labels.empty()) {
    for (const auto& s : ctx.cfg.segments) labels.push_back(s.segment.label);
  }
  for (const auto& label : labels) {
    const auto& s = ctx.cfg.segment(label);
    pool.candidates.push_back({s.segment, ctx.resolver.point(s)});
  }
  pool.constraints = {p.target_total_length_m, p.tolerance_m, p.max_segments};
  planner::PlanOptions opts;
  opts.grid = ctx.cfg.grid;
  opts.enumeration_cap = p.enumeration_cap;
  const auto plan = in_stage("planner", [&] {
    return p.method == "greedy" ? planner::plan_greedy(pool, ctx.cfg.pump, opts)
                                : planner::plan_exhaustive(pool, ctx.cfg.pump, opts);
  });
  ordered_json j;
  j["method"] = p.method;
  j["target_total_length_m"] = p.target_total_length_m;
  j["tolerance_m"] = pool.tolerance();
  ordered_json order = ordered_json::array();
  for (std::size_t k : plan.order) {
    ordered_json e;
    e["label"] = pool.candidates[k].segment.label;
    e["length_m"] = pool.candidates[k].segment.length_m;
    e["lambda_s0_nm"] = pool.candidates[k].point.lambda_s0_nm;
    order.push_back(e);
  }
  j["order"] = order;
  j["total_length_m"] = plan.total_length_m;
  j["predicted_g2"] = plan.predicted_g2;
  j["plans_evaluated"] = plan.evaluated;
  j["spectrum_csv"] = "plan_spectrum.csv";
  ctx.files["plan.json"] = dump(j);
  ctx.files["plan_spectrum.csv"] =
      render([&](std::ostream& os) { io::write_spectrum(os, plan.predicted_spectrum); });
}

const std::map<std::string, void (*)(Context&)>& table() {
  static const std::map<std::string, void (*)(Context&)> t{
      {"dispersion", cmd_dispersion}, {"fit", cmd_fit},
      {"phasematch", cmd_phasematch}, {"gvm-curve", cmd_gvm_curve},
      {"jsa", cmd_jsa},               {"marginal", cmd_marginal},
      {"filter-scan", cmd_filter_scan}, {"g2", cmd_g2},
      {"g2-table", cmd_g2_table},     {"plan", cmd_plan}};
  return t;
}

void print_error(std::ostream& err, const std::string& stage, const std::string& message,
                 const std::string& field = {}) {
  ordered_json j;
  j["error"] = true;
  j["stage"] = stage;
  if (!field.empty()) j["field"] = field;
  j["message"] = message;
  err << j.dump() << std::endl;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : table()) v.push_back(k);
    return v;
  }();
  return names;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

Outputs execute(const std::string& subcommand, const config::RunConfig& cfg,
                const std::string& config_bytes, std::uint64_t seed) {
  const auto it = table().find(subcommand);
  if (it == table().end()) throw StageError("cli", "unknown subcommand '" + subcommand + "'");
  Context ctx{cfg, Resolver(cfg), {}, ordered_json::array(), seed};
  it->second(ctx);

  ordered_json manifest;
  manifest["tool"] = "sfwm";
  manifest["version"] = SFWM_VERSION;
  manifest["subcommand"] = subcommand;
  manifest["config_sha256"] = sha256_hex(config_bytes);
  manifest["seed"] = seed;
  manifest["model"] = model_name(cfg.model);
  manifest["grids"] = ctx.grids;
  ordered_json names = ordered_json::array();
  for (const auto& [name, _] : ctx.files) names.push_back(name);
  manifest["outputs"] = names;
  ctx.files[subcommand + ".manifest.json"] = dump(manifest);
  return std::move(ctx.files);
}

int run(const std::string& subcommand, const RunOptions& options, std::ostream& err) {
  if (!table().count(subcommand)) {
    print_error(err, "cli", "unknown subcommand '" + subcommand + "'");
    return 64;
  }
  std::string bytes;
  config::RunConfig cfg;
  try {
    std::ifstream in(options.config_path, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot read " + options.config_path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    bytes = buf.str();
    cfg = config::parse_config(bytes, options.config_path.parent_path());
  } catch (const ConfigError& e) {
    print_error(err, "config", e.what(), e.field());
    return 2;
  }

  std::filesystem::path out_dir = options.out_dir.value_or(cfg.output_dir.value_or("out"));
  Outputs files;
  try {
    files = execute(subcommand, cfg, bytes, options.seed);
  } catch (const StageError& e) {
    print_error(err, e.stage, e.what());
    return e.stage == "config" ? 2 : 3;
  } catch (const ConfigError& e) {
    print_error(err, "config", e.what(), e.field());
    return 2;
  } catch (const std::exception& e) {
    print_error(err, "run", e.what());
    return 3;
  }

  try {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, contents] : files) {
      std::ofstream out(out_dir / name, std::ios::binary);
      out << contents;
      if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
    }
  } catch (const std::exception& e) {
    print_error(err, "io", e.what());
    return 3;
  }
  return 0;
}

}  // namespace sfwm::run
