#pragma once

// Selection and ordering of fiber pieces from a pool so that the spliced
// assembly has the highest predicted g2 (most factorable joint spectrum).
// Splice loss and axis misalignment are not part of the objective.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfwm/dispersion.hpp"
#include "sfwm/phasematch.hpp"
#include "sfwm/spectra.hpp"

namespace sfwm::planner {

struct PoolCandidate {
  dispersion::FiberSegment segment;  // label and length come from here
  phasematch::PhaseMatchPoint point;
};

struct PlanConstraints {
  double target_total_length_m = 0.0;
  // Defaults to the shortest candidate length.
  std::optional<double> tolerance_m;
  // 0 means no limit beyond the pool size.
  std::size_t max_segments = 0;
};

struct SegmentPool {
  std::vector<PoolCandidate> candidates;
  PlanConstraints constraints;

  void validate() const;
  double tolerance() const;
  std::size_t max_segments() const;
  double total_length(std::span<const std::size_t> order) const;
  bool length_ok(double total_m) const;
};

struct PlanOptions {
  spectra::GridOptions grid;
  std::size_t enumeration_cap = 100000;
  // g2 values closer than this are ties.
  double tie_tolerance = 1e-9;
};

struct PlanEvaluation {
  double g2 = 0.0;
  spectra::Spectrum1D spectrum;  // signal marginal, nm axis
};

struct SplicePlan {
  std::vector<std::size_t> order;
  double predicted_g2 = 0.0;
  double total_length_m = 0.0;
  spectra::Spectrum1D predicted_spectrum;
  std::size_t evaluated = 0;  // number of plans scored
};

spectra::AssemblySpec make_assembly(std::span<const std::size_t> order, const SegmentPool& pool);

PlanEvaluation evaluate_plan(std::span<const std::size_t> order, const SegmentPool& pool,
                             const phasematch::PumpSpec& pump, const PlanOptions& options = {});

// Number of ordered subsets that satisfy the constraints.
std::size_t count_feasible(const SegmentPool& pool);

// Global argmax over every feasible ordered subset. Ties go to the shorter
// total length, then the lexicographically smaller index sequence.
// Throws PlanError when count_feasible exceeds the cap.
SplicePlan plan_exhaustive(const SegmentPool& pool, const phasematch::PumpSpec& pump,
                           const PlanOptions& options = {});

// Seeds from the run of candidates with the smallest lambda_s0 spread, then
// applies position swaps and member/non-member swaps while g2 improves.
SplicePlan plan_greedy(const SegmentPool& pool, const phasematch::PumpSpec& pump,
                       const PlanOptions& options = {});

}  // namespace sfwm::planner
