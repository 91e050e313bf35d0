#include <doctest.h>

#include <cmath>
#include <numeric>

#include "leakscope/allocator.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/rng.hpp"

using namespace leakscope;

TEST_CASE("optimal allocation follows sqrt weights") {
  AllocationWeights w;
  w.per_component = {1.0, 4.0};
  const AllocationPlan plan = optimal_allocation(w, 30);
  CHECK(plan.per_component == std::vector<Count>{10, 20});

  w.per_component = {1.0, 1.0, 1.0};
  CHECK(optimal_allocation(w, 30).per_component ==
        std::vector<Count>{10, 10, 10});

  w.per_component = {0.0, 4.0};
  CHECK(optimal_allocation(w, 20).per_component == std::vector<Count>{1, 19});
}

TEST_CASE("largest-remainder rounding conserves the total") {
  AllocationWeights w;
  w.per_component = {1.0, 2.0, 3.0, 5.0, 7.0};
  for (Count n : {17, 100, 999, 12345}) {
    const AllocationPlan plan = optimal_allocation(w, n);
    CHECK(std::accumulate(plan.per_component.begin(),
                          plan.per_component.end(), Count{0}) == n);
    for (Count c : plan.per_component) CHECK(c >= 1);
  }
}

TEST_CASE("budget too small") {
  AllocationWeights w;
  w.per_component = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(optimal_allocation(w, 2), BudgetTooSmall);
}

TEST_CASE("batch schedule") {
  const auto b1 = batch_schedule(50000, 0.1);
  CHECK(b1.size() == 10);
  for (Count b : b1) CHECK(b == 5000);

  const auto b2 = batch_schedule(100, 1.0);
  CHECK(b2 == std::vector<Count>{100});

  const auto b3 = batch_schedule(105, 0.1);
  CHECK(std::accumulate(b3.begin(), b3.end(), Count{0}) == 105);
  CHECK(b3.size() == 10);
  for (std::size_t i = 0; i + 1 < b3.size(); ++i) CHECK(b3[i] == 10);
  CHECK(b3.back() == 15);

  CHECK_THROWS_AS(batch_schedule(100, 0.0), AnalysisError);
}

TEST_CASE("allocation inequality and optimality") {
  Rng rng(424242);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform(0, 6));
    std::vector<double> v(m);
    for (auto& x : v) x = 0.05 + rng.u01() * 10.0;
    const Count n = 100 * static_cast<Count>(m) +
                    static_cast<Count>(rng.uniform(0, 5000));
    const double bound =
        [&] {
          double s = 0.0;
          for (double x : v) s += std::sqrt(x);
          return s * s / static_cast<double>(n);
        }();

    // pre-rounding equality
    const std::vector<double> real = allocate_budget_real(v, n);
    double at_real = 0.0;
    for (std::size_t i = 0; i < m; ++i) at_real += v[i] / real[i];
    CHECK(at_real >= bound - 1e-9);
    CHECK(at_real == doctest::Approx(bound).epsilon(1e-9));

    // integer allocation within 1% of the bound for n >= 100 m
    const std::vector<Count> alloc = allocate_budget(v, n, 1);
    double at_alloc = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      at_alloc += v[i] / static_cast<double>(alloc[i]);
    CHECK(at_alloc >= bound - 1e-9);
    CHECK(at_alloc <= bound * 1.01);

    // random feasible alternatives are never better
    for (int alt = 0; alt < 20; ++alt) {
      std::vector<Count> other(m, 1);
      Count rest = n - static_cast<Count>(m);
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const Count take = static_cast<Count>(rng.uniform(0, rest));
        other[i] += take;
        rest -= take;
      }
      other[m - 1] += rest;
      double at_other = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        at_other += v[i] / static_cast<double>(other[i]);
      CHECK(at_alloc <= at_other + 1e-9);
    }
  }
}

TEST_CASE("monotonicity of the pre-rounding share") {
  std::vector<double> v{1.0, 2.0, 3.0};
  const Count n = 1000;
  const double before = allocate_budget_real(v, n)[1];
  v[1] = 2.5;
  const double after = allocate_budget_real(v, n)[1];
  CHECK(after >= before);
}

TEST_CASE("compute_weights basics") {
  // point-mass component: both bracketed terms coincide, weight 0
  const ComponentResult point =
      ComponentResult::sampled(0.5, {{{0, 0}, 10}}, 10);
  const ComponentResult other = ComponentResult::sampled(
      0.5, {{{1, 0}, 5}, {{1, 1}, 5}}, 10);
  const JointDistribution fused = fuse({point, other});
  const AllocationWeights w =
      compute_weights({point, other}, fused, AllocationMode::MI);
  REQUIRE(w.per_component.size() == 2);
  CHECK(w.per_component[0] == doctest::Approx(0.0));

  // two identical components with equal theta get equal weights
  const ComponentResult a = ComponentResult::sampled(
      0.5, {{{0, 0}, 6}, {{0, 1}, 4}, {{1, 0}, 4}, {{1, 1}, 6}}, 20);
  const ComponentResult b = ComponentResult::sampled(
      0.5, {{{0, 0}, 6}, {{0, 1}, 4}, {{1, 0}, 4}, {{1, 1}, 6}}, 20);
  const JointDistribution fused2 = fuse({a, b});
  const AllocationWeights w2 =
      compute_weights({a, b}, fused2, AllocationMode::MI);
  CHECK(w2.per_component[0] == doctest::Approx(w2.per_component[1]));
}

TEST_CASE("compute_weights matches a direct kernel re-evaluation") {
  // Independent re-evaluation of the bracketed expression from raw counts.
  Rng rng(777);
  CellCounts counts_a, counts_b;
  const Count n = 400;
  for (Count k = 0; k < n; ++k)
    counts_a[{rng.uniform(0, 2), rng.uniform(0, 3)}] += 1;
  for (Count k = 0; k < n; ++k)
    counts_b[{rng.uniform(0, 2) + 3, rng.uniform(0, 3)}] += 1;
  const ComponentResult a = ComponentResult::sampled(0.5, counts_a, n);
  const ComponentResult b = ComponentResult::sampled(0.5, counts_b, n);
  const JointDistribution fused = fuse({a, b});
  const AllocationWeights w =
      compute_weights({a, b}, fused, AllocationMode::MI);

  auto direct = [&](const ComponentResult& c) {
    double m1 = 0.0, m2 = 0.0;
    for (const auto& [cell, k] : c.counts) {
      const double d = static_cast<double>(k) / static_cast<double>(n);
      const std::size_t ix = fused.domain().secret_index(cell.first);
      const std::size_t iy = fused.domain().observable_index(cell.second);
      const double g = 1.0 + std::log2(fused.px()[ix] * fused.py()[iy] /
                                       fused.pxy(ix, iy));
      m1 += d * g;
      m2 += d * g * g;
    }
    return c.weight * c.weight * (m2 - m1 * m1);
  };
  CHECK(w.per_component[0] == doctest::Approx(direct(a)).epsilon(1e-12));
  CHECK(w.per_component[1] == doctest::Approx(direct(b)).epsilon(1e-12));
}

TEST_CASE("known-prior weights flatten into per-input slots") {
  const ComponentResult c = ComponentResult::sampled_known_prior(
      {{0, 0.5}, {1, 0.5}}, {{0, 40}, {1, 40}},
      {{{0, 0}, 30}, {{0, 1}, 10}, {{1, 0}, 10}, {{1, 1}, 30}});
  const JointDistribution fused = fuse({c});
  const AllocationWeights w =
      compute_weights({c}, fused, AllocationMode::KnownPrior);
  REQUIRE(w.per_input.size() == 1);
  CHECK(w.per_input[0].size() == 2);
  const AllocationPlan plan = optimal_allocation(w, 100);
  CHECK(plan.per_input[0].at(0) + plan.per_input[0].at(1) == 100);
}

TEST_CASE("empty pilot is rejected") {
  const JointDistribution j(ValueDomain({0}, {0}), {1.0});
  CHECK_THROWS_AS(compute_weights({}, j, AllocationMode::MI), EmptyPilot);
}
