#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const char* kConfig = R"({
  "pump": {"center_wavelength_nm": 1070, "fwhm_nm": 2},
  "segments": [
    {"label": "S1", "core_radius_nm": 947, "air_fill": 0.296, "length_m": 0.3,
     "phase_match": {"lambda_s0_nm": 1409.9, "tau_s_ps_per_m": 3.2, "theta_rad": 0.004}},
    {"label": "S3", "core_radius_nm": 948, "air_fill": 0.296, "length_m": 0.3,
     "phase_match": {"lambda_s0_nm": 1417.3, "tau_s_ps_per_m": 3.3, "theta_rad": 0.001}}
  ],
  "assemblies": [{"label": "pair", "segments": ["S1", "S3"]}],
  "grid": {"ns": 96, "ni": 64}
})";

struct TempDir {
  TempDir() {
    path = fs::temp_directory_path() / ("sfwm_cli_" + std::to_string(std::rand()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path path;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int cli(const std::string& args, const fs::path& err) {
  const std::string cmd = std::string("\"") + SFWM_CLI_PATH + "\" " + args + " 2> \"" +
                          err.string() + "\" > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<double>> read_table(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    // strtod, not stod: far JSI tails are subnormal.
    for (std::string c; std::getline(cells, c, ',');) {
      row.push_back(std::strtod(c.c_str(), nullptr));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double trapezoid_weight(std::size_t k, std::size_t n, double step) {
  return (k == 0 || k + 1 == n) ? 0.5 * step : step;
}

}  // namespace

TEST_CASE("jsa and marginal exports integrate to the same total") {
  TempDir tmp;
  write(tmp.path / "run.json", kConfig);
  const auto cfg = (tmp.path / "run.json").string();
  const auto out = tmp.path / "out";
  REQUIRE(cli("jsa --config \"" + cfg + "\" --out \"" + out.string() + "\"", tmp.path / "e1") == 0);
  REQUIRE(cli("marginal --config \"" + cfg + "\" --out \"" + out.string() + "\"", tmp.path / "e2") ==
          0);

  const auto meta = nlohmann::json::parse(slurp(out / "jsi_pair.meta.json"));
  const double ds = meta["grid"]["signal"]["step_rad_per_s"].get<double>();
  const double di = meta["grid"]["idler"]["step_rad_per_s"].get<double>();

  // JSI rows are signal wavelengths, columns idler wavelengths; reversal of
  // either axis leaves trapezoid weights unchanged.
  const auto jsi = read_table(out / "jsi_pair.csv");
  const std::size_t ns = jsi.size();
  const std::size_t ni = jsi.front().size() - 1;
  CHECK(ns == meta["grid"]["signal"]["n"].get<std::size_t>());
  double total = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t i = 0; i < ni; ++i) {
      total += trapezoid_weight(s, ns, ds) * trapezoid_weight(i, ni, di) * jsi[s][i + 1];
    }
  }

  auto integrate = [](const std::vector<std::vector<double>>& m, double step) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) sum += trapezoid_weight(k, m.size(), step) * m[k][1];
    return sum;
  };
  const double from_signal = integrate(read_table(out / "marginal_signal_pair.csv"), ds);
  const double from_idler = integrate(read_table(out / "marginal_idler_pair.csv"), di);
  CHECK(std::abs(from_signal - total) <= 1e-10 * total);
  CHECK(std::abs(from_idler - total) <= 1e-10 * total);
  CHECK(fs::exists(out / "jsa.manifest.json"));
  CHECK(fs::exists(out / "marginal.manifest.json"));
}

TEST_CASE("invalid config is rejected before any output is written") {
  TempDir tmp;
  std::string bad = kConfig;
  bad.replace(bad.find("\"air_fill\": 0.296"), 17, "\"air_fill\": 1.2");
  write(tmp.path / "bad.json", bad);
  const auto out = tmp.path / "out";
  const int code = cli("g2 --config \"" + (tmp.path / "bad.json").string() + "\" --out \"" +
                           out.string() + "\"",
                       tmp.path / "err");
  CHECK(code != 0);
  CHECK(slurp(tmp.path / "err").find("segments[0].air_fill") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("reruns are byte identical") {
  TempDir tmp;
  write(tmp.path / "run.json", kConfig);
  const auto cfg = (tmp.path / "run.json").string();
  REQUIRE(cli("g2 --threads 1 --config \"" + cfg + "\" --out \"" + (tmp.path / "a").string() + "\"",
              tmp.path / "e") == 0);
  REQUIRE(cli("g2 --threads 4 --config \"" + cfg + "\" --out \"" + (tmp.path / "b").string() + "\"",
              tmp.path / "e") == 0);
  for (const auto& entry : fs::directory_iterator(tmp.path / "a")) {
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(tmp.path / "b" / name));
  }
}
