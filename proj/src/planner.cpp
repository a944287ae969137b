#include "sfwm/planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "sfwm/correlation.hpp"
#include "sfwm/errors.hpp"

namespace sfwm::planner {

namespace {

constexpr double kLengthSlack = 1e-9;

// True when candidate a beats incumbent b.
bool better(double g2_a, double len_a, const std::vector<std::size_t>& a, double g2_b,
            double len_b, const std::vector<std::size_t>& b, double tie) {
  if (g2_a > g2_b + tie) return true;
  if (g2_a < g2_b - tie) return false;
  if (len_a < len_b - kLengthSlack) return true;
  if (len_a > len_b + kLengthSlack) return false;
  return a < b;
}

// Visits every ordered subset of distinct indices with size in [1, max_k].
void enumerate(std::size_t n, std::size_t max_k,
               const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> order;
  std::vector<char> used(n, 0);
  std::function<void()> rec = [&]() {
    if (!order.empty()) visit(order);
    if (order.size() == max_k) return;
    for (std::size_t k = 0; k < n; ++k) {
      if (used[k]) continue;
      used[k] = 1;
      order.push_back(k);
      rec();
      order.pop_back();
      used[k] = 0;
    }
  };
  rec();
}

}  // namespace

void SegmentPool::validate() const {
  if (candidates.empty()) throw std::invalid_argument("segment pool is empty");
  for (const auto& c : candidates) c.segment.validate();
  if (!(constraints.target_total_length_m > 0.0)) {
    throw std::invalid_argument("planner target_total_length_m must be > 0");
  }
  if (constraints.tolerance_m && !(*constraints.tolerance_m >= 0.0)) {
    throw std::invalid_argument("planner tolerance_m must be >= 0");
  }
  const double lp = candidates.front().point.pump_wavelength_nm;
  for (const auto& c : candidates) {
    if (std::abs(c.point.pump_wavelength_nm - lp) > 1e-9 * lp) {
      throw std::invalid_argument("pool candidates must be linearized at one pump");
    }
  }
}

double SegmentPool::tolerance() const {
  if (constraints.tolerance_m) return *constraints.tolerance_m;
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) shortest = std::min(shortest, c.segment.length_m);
  return shortest;
}

std::size_t SegmentPool::max_segments() const {
  const std::size_t n = candidates.size();
  return constraints.max_segments == 0 ? n : std::min(n, constraints.max_segments);
}

double SegmentPool::total_length(std::span<const std::size_t> order) const {
  double total = 0.0;
  for (std::size_t k : order) total += candidates.at(k).segment.length_m;
  return total;
}

bool SegmentPool::length_ok(double total_m) const {
  return std::abs(total_m - constraints.target_total_length_m) <= tolerance() + kLengthSlack;
}

spectra::AssemblySpec make_assembly(std::span<const std::size_t> order, const SegmentPool& pool) {
  spectra::AssemblySpec assembly;
  std::vector<char> seen(pool.candidates.size(), 0);
  for (std::size_t k : order) {
    if (k >= pool.candidates.size()) throw std::out_of_range("plan index out of range");
    if (seen[k]) throw std::invalid_argument("plan repeats a pool index");
    seen[k] = 1;
    const auto& c = pool.candidates[k];
    assembly.segments.push_back({c.segment.label, c.segment.length_m, c.point, nullptr});
  }
  return assembly;
}

PlanEvaluation evaluate_plan(std::span<const std::size_t> order, const SegmentPool& pool,
                             const phasematch::PumpSpec& pump, const PlanOptions& options) {
  if (order.empty()) throw std::invalid_argument("plan is empty");
  const auto assembly = make_assembly(order, pool);
  const auto grid = spectra::auto_grid(assembly, pump, options.grid);
  const auto jsa = spectra::build_jsa(assembly, pump, grid, spectra::Execution::Parallel,
                                      options.grid);
  return {correlation::g2_quadrature(jsa), spectra::marginal(jsa).in_wavelength()};
}

std::size_t count_feasible(const SegmentPool& pool) {
  std::size_t count = 0;
  enumerate(pool.candidates.size(), pool.max_segments(), [&](const auto& order) {
    if (pool.length_ok(pool.total_length(order))) ++count;
  });
  return count;
}

SplicePlan plan_exhaustive(const SegmentPool& pool, const phasematch::PumpSpec& pump,
                           const PlanOptions& options) {
  pool.validate();
  // Counting is cheap next to scoring but still exponential; stop early.
  std::size_t count = 0;
  std::vector<std::vector<std::size_t>> feasible;
  bool over = false;
  enumerate(pool.candidates.size(), pool.max_segments(), [&](const auto& order) {
    if (over || !pool.length_ok(pool.total_length(order))) return;
    if (++count > options.enumeration_cap) {
      over = true;
      return;
    }
    feasible.push_back(order);
  });
  if (over) {
    std::ostringstream os;
    os << "more than " << options.enumeration_cap
       << " feasible ordered subsets; use plan_greedy for this pool";
    throw PlanError(os.str());
  }
  if (feasible.empty()) throw PlanError("no ordered subset meets the length constraint");

  std::vector<double> scores(feasible.size());
  for (std::size_t k = 0; k < feasible.size(); ++k) {
    scores[k] = evaluate_plan(feasible[k], pool, pump, options).g2;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < feasible.size(); ++k) {
    if (better(scores[k], pool.total_length(feasible[k]), feasible[k], scores[best],
               pool.total_length(feasible[best]), feasible[best], options.tie_tolerance)) {
      best = k;
    }
  }
  SplicePlan plan;
  plan.order = feasible[best];
  plan.total_length_m = pool.total_length(plan.order);
  auto eval = evaluate_plan(plan.order, pool, pump, options);
  plan.predicted_g2 = eval.g2;
  plan.predicted_spectrum = std::move(eval.spectrum);
  plan.evaluated = feasible.size();
  return plan;
}

SplicePlan plan_greedy(const SegmentPool& pool, const phasematch::PumpSpec& pump,
                       const PlanOptions& options) {
  pool.validate();
  const std::size_t n = pool.candidates.size();
  const double target = pool.constraints.target_total_length_m;
  const std::size_t max_k = pool.max_segments();

  std::vector<std::size_t> by_wavelength(n);
  std::iota(by_wavelength.begin(), by_wavelength.end(), 0);
  std::stable_sort(by_wavelength.begin(), by_wavelength.end(), [&](std::size_t a, std::size_t b) {
    return pool.candidates[a].point.lambda_s0_nm < pool.candidates[b].point.lambda_s0_nm;
  });

  // Seed: each run of neighbours in lambda_s0 order, grown while that brings
  // the total closer to the target; keep the feasible run with least spread.
  std::vector<std::size_t> seed;
  double seed_spread = std::numeric_limits<double>::infinity();
  double seed_miss = std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::size_t> run{by_wavelength[start]};
    double total = pool.candidates[run[0]].segment.length_m;
    for (std::size_t next = start + 1; next < n && run.size() < max_k; ++next) {
      const double grown = total + pool.candidates[by_wavelength[next]].segment.length_m;
      if (std::abs(grown - target) >= std::abs(total - target)) break;
      run.push_back(by_wavelength[next]);
      total = grown;
    }
    if (!pool.length_ok(total)) continue;
    const double spread = pool.candidates[run.back()].point.lambda_s0_nm -
                          pool.candidates[run.front()].point.lambda_s0_nm;
    const double miss = std::abs(total - target);
    if (spread < seed_spread - 1e-12 ||
        (std::abs(spread - seed_spread) <= 1e-12 && miss < seed_miss - kLengthSlack)) {
      seed = run;
      seed_spread = spread;
      seed_miss = miss;
    }
  }
  if (seed.empty()) throw PlanError("no run of neighbouring candidates meets the length constraint");

  SplicePlan plan;
  plan.order = seed;
  plan.predicted_g2 = evaluate_plan(plan.order, pool, pump, options).g2;
  plan.evaluated = 1;

  auto try_order = [&](std::vector<std::size_t> order) {
    if (!pool.length_ok(pool.total_length(order))) return false;
    const double g2 = evaluate_plan(order, pool, pump, options).g2;
    ++plan.evaluated;
    if (g2 > plan.predicted_g2 + options.tie_tolerance) {
      plan.order = std::move(order);
      plan.predicted_g2 = g2;
      return true;
    }
    return false;
  };

  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t a = 0; a < plan.order.size() && !improved; ++a) {
      for (std::size_t b = a + 1; b < plan.order.size() && !improved; ++b) {
        auto order = plan.order;
        std::swap(order[a], order[b]);
        improved = try_order(std::move(order));
      }
    }
    for (std::size_t a = 0; a < plan.order.size() && !improved; ++a) {
      for (std::size_t k = 0; k < n && !improved; ++k) {
        if (std::find(plan.order.begin(), plan.order.end(), k) != plan.order.end()) continue;
        auto order = plan.order;
        order[a] = k;
        improved = try_order(std::move(order));
      }
    }
  }

  plan.total_length_m = pool.total_length(plan.order);
  plan.predicted_spectrum = evaluate_plan(plan.order, pool, pump, options).spectrum;
  return plan;
}

}  // namespace sfwm::planner
