// Serial reference vs OpenMP kernels on a four-segment assembly.
// Usage: bench_kernels [n_points] [repeats]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "sfwm/kernels.hpp"

using namespace sfwm;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, double diff) {
  std::printf("%-10s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  max|diff| %.3g\n", name,
              serial, parallel, serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 512;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

  phasematch::PumpSpec pump{1070.0, 2.0, std::nullopt};
  spectra::AssemblySpec assembly;
  const double ls[] = {1409.9, 1413.6, 1417.3, 1421.0};
  const double taus[] = {3.2, 3.2, 3.3, 3.4};
  const double thetas[] = {0.004, 0.002, 0.001, 0.004};
  for (int k = 0; k < 4; ++k) {
    assembly.segments.push_back({"S" + std::to_string(k + 1), 0.3,
                                 phasematch::from_published(1070.0, ls[k], taus[k], thetas[k]),
                                 nullptr});
  }
  spectra::GridOptions opts;
  opts.ns = n;
  opts.ni = n;
  const auto grid = spectra::auto_grid(assembly, pump, opts);
  const std::size_t size = grid.signal.n * grid.idler.n;
  std::printf("grid %zu x %zu, %d threads\n", grid.signal.n, grid.idler.n, omp_get_max_threads());

  std::vector<std::complex<double>> a(size), b(size);
  const auto problem = kernels::make_problem(assembly, pump, grid);
  const double t_fill_s = best_of(repeats, [&] { kernels::fill_jsa_serial(assembly, pump, grid, a); });
  const double t_fill_p = best_of(repeats, [&] { kernels::fill_jsa_parallel(problem, b); });
  double diff = 0.0;
  for (std::size_t k = 0; k < size; ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  report("fill", t_fill_s, t_fill_p, diff);

  kernels::G2Sums gs, gp;
  const double t_g2_s = best_of(repeats, [&] { gs = kernels::g2_sums_serial(a, grid.signal, grid.idler); });
  const double t_g2_p = best_of(repeats, [&] { gp = kernels::g2_sums_parallel(a, grid.signal, grid.idler); });
  report("g2", t_g2_s, t_g2_p, std::abs(gs.g2() - gp.g2()));

  std::vector<double> ms, mp;
  const double t_m_s = best_of(repeats, [&] {
    ms = kernels::project_serial(a, grid.signal, grid.idler, spectra::Side::Signal);
  });
  const double t_m_p = best_of(repeats, [&] {
    mp = kernels::project_parallel(a, grid.signal, grid.idler, spectra::Side::Signal);
  });
  double mdiff = 0.0;
  for (std::size_t k = 0; k < ms.size(); ++k) mdiff = std::max(mdiff, std::abs(ms[k] - mp[k]));
  report("marginal", t_m_s, t_m_p, mdiff);
  return 0;
}
