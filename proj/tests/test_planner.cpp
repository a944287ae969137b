#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "sfwm/correlation.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/planner.hpp"

using namespace sfwm;
using namespace sfwm::planner;

TEST_CASE("evaluate_plan reproduces tabulated configurations") {
  const auto pump = fixtures::pump(2.0);
  const auto pool = fixtures::pool({"S1", "S2", "S3", "S4"}, 1.2);
  const std::vector<std::size_t> single{1};
  CHECK(std::abs(evaluate_plan(single, pool, pump).g2 - 1.56) <= 0.05);
  const std::vector<std::size_t> straight{0, 1, 2, 3};
  const std::vector<std::size_t> shuffled{0, 3, 1, 2};
  CHECK(std::abs(evaluate_plan(straight, pool, pump).g2 - 1.42) <= 0.05);
  CHECK(std::abs(evaluate_plan(shuffled, pool, pump).g2 - 1.44) <= 0.05);
}

TEST_CASE("two-segment reversal leaves g2 unchanged") {
  const auto pump = fixtures::pump(2.0);
  const auto pool = fixtures::pool({"S1", "S3"}, 0.6);
  const std::vector<std::size_t> ab{0, 1};
  const std::vector<std::size_t> ba{1, 0};
  CHECK(std::abs(evaluate_plan(ab, pool, pump).g2 - evaluate_plan(ba, pool, pump).g2) < 1e-10);
}

TEST_CASE("plan validation") {
  const auto pump = fixtures::pump();
  const auto pool = fixtures::pool({"S1", "S2"}, 0.6);
  const std::vector<std::size_t> repeated{0, 0};
  const std::vector<std::size_t> out_of_range{0, 5};
  CHECK_THROWS(evaluate_plan(repeated, pool, pump));
  CHECK_THROWS(evaluate_plan(out_of_range, pool, pump));
  CHECK_THROWS(SegmentPool{}.validate());
  CHECK(pool.tolerance() == doctest::Approx(0.3));
}

TEST_CASE("feasible counts and the enumeration cap") {
  auto pool = fixtures::pool({"S1", "S2", "S3", "S4"}, 0.6);
  // Sizes 1..3 fit within 0.6 +- 0.3 m: 4 + 12 + 24.
  CHECK(count_feasible(pool) == 40);
  pool.constraints.max_segments = 2;
  CHECK(count_feasible(pool) == 16);
  PlanOptions opts;
  opts.enumeration_cap = 10;
  CHECK_THROWS_AS(plan_exhaustive(pool, fixtures::pump(), opts), PlanError);
}

TEST_CASE("identical pool reproduces the homogeneous value") {
  SegmentPool pool;
  for (int k = 0; k < 3; ++k) {
    pool.candidates.push_back({fixtures::structure("S2"), fixtures::published("S2")});
    pool.candidates.back().segment.label = "S2_" + std::to_string(k);
  }
  pool.constraints.target_total_length_m = 0.6;
  pool.constraints.tolerance_m = 0.0;
  const auto pump = fixtures::pump(2.0);
  const auto plan = plan_exhaustive(pool, pump);
  CHECK(plan.order.size() == 2);
  CHECK(plan.total_length_m == doctest::Approx(0.6));
  // Same physics as one 0.6 m piece; compare on the grid the plan was scored on.
  const auto pieces = make_assembly(plan.order, pool);
  const auto single = fixtures::assembly({"S2"}, 0.6);
  const auto grid = spectra::auto_grid(pieces, pump);
  CHECK(plan.predicted_g2 ==
        doctest::Approx(correlation::g2_quadrature(spectra::build_jsa(single, pump, grid)))
            .epsilon(1e-9));
  // Ties resolve to the lexicographically first order.
  CHECK(plan.order == std::vector<std::size_t>{0, 1});
}

TEST_CASE("single-candidate pool") {
  const auto pool = fixtures::pool({"S3"}, 0.3);
  const auto pump = fixtures::pump();
  CHECK(plan_greedy(pool, pump).order == std::vector<std::size_t>{0});
  CHECK(plan_exhaustive(pool, pump).order == std::vector<std::size_t>{0});
}

TEST_CASE("greedy picks neighbours in signal wavelength and never beats exhaustive") {
  const auto pump = fixtures::pump(2.0);
  auto pool = fixtures::pool({"S1", "S2", "S3", "S4"}, 0.6);
  pool.constraints.tolerance_m = 0.0;
  const auto greedy = plan_greedy(pool, pump);
  REQUIRE(greedy.order.size() == 2);
  const auto lo = std::min(greedy.order[0], greedy.order[1]);
  const auto hi = std::max(greedy.order[0], greedy.order[1]);
  CHECK(hi - lo == 1);
  const auto exhaustive = plan_exhaustive(pool, pump);
  CHECK(greedy.predicted_g2 <= exhaustive.predicted_g2 + 1e-12);
}

TEST_CASE("plans are deterministic") {
  const auto pump = fixtures::pump(2.0);
  const auto pool = fixtures::pool({"S1", "S2", "S4"}, 0.6);
  const auto a = plan_exhaustive(pool, pump);
  const auto b = plan_exhaustive(pool, pump);
  CHECK(a.order == b.order);
  CHECK(a.predicted_g2 == b.predicted_g2);
  CHECK(a.predicted_spectrum.values == b.predicted_spectrum.values);
}
