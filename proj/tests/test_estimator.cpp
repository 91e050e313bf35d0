#include <doctest.h>

#include <cmath>

#include "leakscope/errors.hpp"
#include "leakscope/estimator.hpp"
#include "leakscope/matrix_io.hpp"
#include "leakscope/measures.hpp"
#include "leakscope/rng.hpp"
#include "leakscope/stats.hpp"
#include "oracle.hpp"

using namespace leakscope;

namespace {

// Multinomial counts over the cells of a joint, drawn with our fixed RNG.
CellCounts draw_counts(const JointDistribution& j, Count n, Rng& rng) {
  std::vector<std::pair<Value, Value>> cells;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& [ix, iy] : j.support()) {
    acc += j.pxy(ix, iy);
    cells.emplace_back(j.domain().secrets()[ix], j.domain().observables()[iy]);
    cumulative.push_back(acc);
  }
  cumulative.back() = 1.0;
  CellCounts counts;
  for (Count k = 0; k < n; ++k) {
    const double u = rng.u01();
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    counts[cells[static_cast<std::size_t>(it - cumulative.begin())]] += 1;
  }
  return counts;
}

ComponentResult exact_of(const JointDistribution& j, double weight) {
  std::map<std::pair<Value, Value>, Rational> mass;
  for (const auto& [ix, iy] : j.support()) {
    // exact dyadic snap of the double probabilities
    mass[{j.domain().secrets()[ix], j.domain().observables()[iy]}] =
        Rational(j.pxy(ix, iy) * weight * 1e9) / Rational(1000000000);
  }
  // normalize exactly to the weight
  Rational total = 0;
  for (auto& [c, v] : mass) total += v;
  const Rational scale = Rational(weight * 1e9) / Rational(1000000000) / total;
  for (auto& [c, v] : mass) v *= scale;
  return ComponentResult::exact(weight, std::move(mass));
}

}  // namespace

TEST_CASE("empirical sub-distributions") {
  const ComponentResult sampled = ComponentResult::sampled(
      0.5, {{{0, 0}, 2}, {{1, 1}, 2}}, 4);
  const SubDistribution r = empirical_subdist(sampled);
  CHECK(r.weight == 0.5);
  CHECK(r.mass.at({0, 0}) == doctest::Approx(0.25));
  CHECK(r.mass.at({1, 1}) == doctest::Approx(0.25));

  const ComponentResult abs = ComponentResult::abstract_sampled(
      1.0, {{0, 2}}, {{0, 0.5}, {1, 0.5}}, 2);
  const SubDistribution ra = empirical_subdist(abs);
  CHECK(ra.mass.at({0, 0}) == doctest::Approx(0.5));
  CHECK(ra.mass.at({1, 0}) == doctest::Approx(0.5));

  const ComponentResult kp = ComponentResult::sampled_known_prior(
      {{0, 0.5}, {1, 0.5}}, {{0, 4}, {1, 4}},
      {{{0, 0}, 4}, {{1, 0}, 2}, {{1, 1}, 2}});
  const SubDistribution rk = empirical_subdist(kp);
  CHECK(rk.mass.at({0, 0}) == doctest::Approx(0.5));
  CHECK(rk.mass.at({1, 0}) == doctest::Approx(0.25));
  CHECK(rk.mass.at({1, 1}) == doctest::Approx(0.25));
}

TEST_CASE("corollary reduction: strictly positive single component") {
  // theta = 1, 2x2, n = 100: the general kernel must reduce to
  // (#X-1)(#Y-1)/(2n) = 0.005 exactly.
  const ComponentResult c = ComponentResult::sampled(
      1.0, {{{0, 0}, 30}, {{0, 1}, 20}, {{1, 0}, 25}, {{1, 1}, 25}}, 100);
  const EstimateReport rep = estimate_mi({c}, 0.05);
  const double bias = rep.raw_estimate - rep.corrected_estimate;
  CHECK(std::abs(bias - 0.005) <= 1e-12);
  CHECK(rep.corrected_estimate == doctest::Approx(rep.clamped_estimate));
}

TEST_CASE("corollary reduction holds for random positive 3x4 counts") {
  Rng rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    CellCounts counts;
    Count n = 0;
    for (Value x = 0; x < 3; ++x)
      for (Value y = 0; y < 4; ++y) {
        const Count k = 1 + static_cast<Count>(rng.uniform(0, 30));
        counts[{x, y}] = k;
        n += k;
      }
    const ComponentResult c = ComponentResult::sampled(1.0, counts, n);
    const EstimateReport r = estimate_mi({c}, 0.05);
    const double bias = r.raw_estimate - r.corrected_estimate;
    CHECK(std::abs(bias - corollary_bias(3, 4, n)) <= 1e-12);
  }
}

TEST_CASE("exact-only mixtures are degenerate") {
  auto f = oracle::three_component_fixture();
  const JointDistribution truth = f.true_joint();
  const EstimateReport rep = estimate_mi({exact_of(truth, 1.0)}, 0.05);
  CHECK(rep.variance == 0.0);
  CHECK(rep.raw_estimate == doctest::Approx(rep.corrected_estimate));
  CHECK(rep.raw_estimate ==
        doctest::Approx(mutual_information(truth)).epsilon(1e-6));
  CHECK(rep.ci_lower == doctest::Approx(rep.corrected_estimate));
  CHECK(rep.ci_upper == doctest::Approx(rep.corrected_estimate));

  const EstimateReport h = estimate_entropy({exact_of(truth, 1.0)}, 0.05);
  CHECK(h.variance == 0.0);
  CHECK(h.corrected_estimate ==
        doctest::Approx(shannon_entropy(truth.px())).epsilon(1e-6));
}

TEST_CASE("entropy bias for one strictly positive component is (#X-1)/2n") {
  const ComponentResult c = ComponentResult::sampled(
      1.0, {{{0, 0}, 40}, {{1, 0}, 30}, {{2, 0}, 20}, {{3, 0}, 10}}, 100);
  const EstimateReport rep = estimate_entropy({c}, 0.05);
  // corrected = raw + (#X-1)/(2n)
  CHECK(rep.corrected_estimate - rep.raw_estimate ==
        doctest::Approx(3.0 / 200.0).epsilon(1e-12));
}

TEST_CASE("known-prior estimator: deterministic rows have zero bias") {
  const ComponentResult c = ComponentResult::sampled_known_prior(
      {{0, 0.5}, {1, 0.5}}, {{0, 50}, {1, 50}},
      {{{0, 0}, 50}, {{1, 1}, 50}});
  const EstimateReport rep = estimate_mi_known_prior({c}, 0.05);
  CHECK(rep.raw_estimate == doctest::Approx(1.0));
  CHECK(rep.corrected_estimate == doctest::Approx(rep.raw_estimate));
  CHECK(rep.variance == doctest::Approx(0.0));
}

TEST_CASE("known-prior conditional entropy mirrors the MI estimate") {
  Rng rng(5);
  const JointDistribution truth =
      read_matrix_csv_file(std::string(LEAKSCOPE_FIXTURES) + "/channel10.csv");
  // per-secret sampling at 100 runs per row
  CellCounts counts;
  std::map<Value, Count> runs;
  std::map<Value, double> weights;
  for (std::size_t ix = 0; ix < truth.nx(); ++ix) {
    const Value x = truth.domain().secrets()[ix];
    weights[x] = truth.px()[ix];
    runs[x] = 100;
    std::vector<double> cumulative;
    double acc = 0.0;
    for (std::size_t iy = 0; iy < truth.ny(); ++iy) {
      acc += truth.pxy(ix, iy) / truth.px()[ix];
      cumulative.push_back(acc);
    }
    cumulative.back() = 1.0;
    for (int k = 0; k < 100; ++k) {
      const double u = rng.u01();
      const std::size_t iy = static_cast<std::size_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), u) -
          cumulative.begin());
      counts[{x, truth.domain().observables()[iy]}] += 1;
    }
  }
  const ComponentResult c =
      ComponentResult::sampled_known_prior(weights, runs, counts);
  const EstimateReport mi = estimate_mi_known_prior({c}, 0.05);
  const EstimateReport ce = estimate_cond_entropy_known_prior({c}, 0.05);
  const double hx = shannon_entropy(truth.px());
  CHECK(ce.corrected_estimate ==
        doctest::Approx(hx - mi.corrected_estimate).epsilon(1e-9));
  CHECK(ce.variance == doctest::Approx(mi.variance));
}

TEST_CASE("corollary_bias arithmetic") {
  CHECK(corollary_bias(10, 10, 50000) == doctest::Approx(8.1e-4));
  CHECK(corollary_bias(1, 7, 123) == 0.0);
  CHECK(corollary_bias(2, 2, 100) == doctest::Approx(0.005));
}

TEST_CASE("confidence intervals") {
  const auto [lo, hi] = confidence_interval(1.0, 0.0004, 0.05);
  CHECK(lo == doctest::Approx(0.9608).epsilon(1e-4));
  CHECK(hi == doctest::Approx(1.0392).epsilon(1e-4));
  const auto [lo2, hi2] = confidence_interval(0.01, 0.0004, 0.05);
  CHECK(lo2 == 0.0);
  CHECK(hi2 == doctest::Approx(0.0492).epsilon(1e-4));
  const auto [lo3, hi3] = confidence_interval(-0.5, 0.0, 0.3);
  CHECK(lo3 == 0.0);
  CHECK(hi3 == doctest::Approx(-0.5));
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.9599639845).epsilon(1e-9));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(z_score(0.05) == doctest::Approx(1.9599639845).epsilon(1e-9));
  CHECK(normal_quantile(0.025) ==
        doctest::Approx(-1.9599639845).epsilon(1e-9));
}

TEST_CASE("bias correction helps on the three-component example") {
  auto f = oracle::three_component_fixture();
  const JointDistribution truth = f.true_joint();
  const double true_mi = oracle::matrix_mutual_information(truth);

  // sub-joints to sample from
  ValueDomain d1({0, 1}, {0, 1});
  std::vector<double> c1(4, 0.0);
  for (const auto& [cell, v] : f.d1)
    c1[d1.secret_index(cell.first) * 2 + d1.observable_index(cell.second)] = v;
  const JointDistribution j1(d1, std::move(c1));
  ValueDomain d2({0, 1, 2, 3}, {2, 3});
  std::vector<double> c2(8, 0.0);
  for (const auto& [cell, v] : f.d2)
    c2[d2.secret_index(cell.first) * 2 + d2.observable_index(cell.second)] = v;
  const JointDistribution j2(d2, std::move(c2));

  std::map<std::pair<Value, Value>, Rational> exact_mass;
  for (const auto& [cell, v] : f.exact_t) exact_mass[cell] = v;
  const ComponentResult t = ComponentResult::exact(f.xi, exact_mass);

  const Count n = 5000;
  const int reps = 1000;
  double raw_sum = 0.0, corrected_sum = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = Rng::derive(17, 0, static_cast<std::uint64_t>(rep));
    const ComponentResult s1 =
        ComponentResult::sampled(f.theta1, draw_counts(j1, n, rng), n);
    const ComponentResult s2 =
        ComponentResult::sampled(f.theta2, draw_counts(j2, n, rng), n);
    const EstimateReport rep_est = estimate_mi({s1, s2, t}, 0.05);
    raw_sum += rep_est.raw_estimate;
    corrected_sum += rep_est.corrected_estimate;
  }
  const double raw_err = std::abs(raw_sum / reps - true_mi);
  const double corrected_err = std::abs(corrected_sum / reps - true_mi);
  CHECK(corrected_err < raw_err);
}

TEST_CASE("abstraction-then-sampling narrows the variance on identical rows") {
  // One component, all rows identical; compare the reported variances of the
  // plain and abstraction-then-sampling estimators at equal n.
  const std::map<Value, double> pi{{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}};
  Rng rng(31);
  int ats_narrower = 0;
  const int reps = 40;
  for (int rep = 0; rep < reps; ++rep) {
    const Count n = 800;
    // outputs 0/1 with probability 0.5 each, independent of the input
    std::map<Value, Count> out_counts{{0, 0}, {1, 0}};
    CellCounts cell_counts;
    for (Count k = 0; k < n; ++k)
      out_counts[rng.uniform(0, 1)] += 1;
    for (Count k = 0; k < n; ++k)
      cell_counts[{rng.uniform(0, 3), rng.uniform(0, 1)}] += 1;
    std::map<Value, Count> cleaned;
    for (auto& [y, k] : out_counts)
      if (k > 0) cleaned[y] = k;
    const ComponentResult abs =
        ComponentResult::abstract_sampled(1.0, cleaned, pi, n);
    CellCounts cleaned_cells;
    for (auto& [c, k] : cell_counts)
      if (k > 0) cleaned_cells[c] = k;
    const ComponentResult plain =
        ComponentResult::sampled(1.0, cleaned_cells, n);
    const double v_abs = estimate_mi({abs}, 0.05).variance;
    const double v_plain = estimate_mi({plain}, 0.05).variance;
    if (v_abs <= v_plain) ++ats_narrower;
  }
  CHECK(ats_narrower >= reps * 9 / 10);
}

TEST_CASE("estimator input validation") {
  CHECK_THROWS_AS(estimate_mi({}, 0.05), AnalysisError);
  const ComponentResult half = ComponentResult::sampled(0.5, {{{0, 0}, 1}}, 1);
  CHECK_THROWS_AS(estimate_mi({half}, 0.05), WeightSumMismatch);
  CHECK_THROWS_AS(ComponentResult::sampled(1.0, {{{0, 0}, 1}}, 0),
                  ZeroSampleSize);
  CHECK_THROWS_AS(
      ComponentResult::sampled_known_prior({{0, 1.0}}, {{0, 0}}, {}),
      ZeroImportanceMass);
}

TEST_CASE("conditional-entropy CI covers the truth with a known prior") {
  const JointDistribution truth =
      read_matrix_csv_file(std::string(LEAKSCOPE_FIXTURES) + "/channel10.csv");
  const double hx = shannon_entropy(truth.px());
  const double true_ce = hx - oracle::matrix_mutual_information(truth);
  int covered = 0;
  const int reps = 1000;
  // 400 runs per secret: the 4 |X| |Y| rule times ten, like the MI harness
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = Rng::derive(4242, 2, static_cast<std::uint64_t>(rep));
    CellCounts counts;
    std::map<Value, Count> runs;
    std::map<Value, double> weights;
    for (std::size_t ix = 0; ix < truth.nx(); ++ix) {
      const Value x = truth.domain().secrets()[ix];
      weights[x] = truth.px()[ix];
      runs[x] = 400;
      std::vector<double> cumulative;
      double acc = 0.0;
      for (std::size_t iy = 0; iy < truth.ny(); ++iy) {
        acc += truth.pxy(ix, iy) / truth.px()[ix];
        cumulative.push_back(acc);
      }
      cumulative.back() = 1.0;
      for (int k = 0; k < 400; ++k) {
        const double u = rng.u01();
        const std::size_t iy = static_cast<std::size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin());
        counts[{x, truth.domain().observables()[iy]}] += 1;
      }
    }
    const EstimateReport ce = estimate_cond_entropy_known_prior(
        {ComponentResult::sampled_known_prior(weights, runs, counts)}, 0.05);
    if (true_ce >= ce.ci_lower && true_ce <= ce.ci_upper) ++covered;
  }
  CHECK(covered >= reps * 9 / 10);
}

TEST_CASE("estimate report serializes to JSON") {
  const ComponentResult c = ComponentResult::sampled(
      1.0, {{{0, 0}, 30}, {{0, 1}, 20}, {{1, 0}, 25}, {{1, 1}, 25}}, 100);
  const EstimateReport rep = estimate_mi({c}, 0.05);
  const std::string j = rep.to_json();
  CHECK(j.find("\"correctedEstimate\"") != std::string::npos);
  CHECK(j.find("\"perComponentVariance\"") != std::string::npos);
  CHECK(j.find("\"sampleAdequate\"") != std::string::npos);
}

TEST_CASE("kind checks: known-prior results need the dedicated estimators") {
  const ComponentResult kp = ComponentResult::sampled_known_prior(
      {{0, 0.5}, {1, 0.5}}, {{0, 2}, {1, 2}}, {{{0, 0}, 2}, {{1, 1}, 2}});
  CHECK_THROWS_AS(estimate_mi({kp}, 0.05), AnalysisError);
  const ComponentResult plain =
      ComponentResult::sampled(1.0, {{{0, 0}, 2}, {{1, 1}, 2}}, 4);
  CHECK_THROWS_AS(estimate_mi_known_prior({plain}, 0.05), AnalysisError);
}

TEST_CASE("counts for an undeclared input raise MissingPrior") {
  CHECK_THROWS_AS(ComponentResult::sampled_known_prior(
                      {{0, 1.0}}, {{0, 2}}, {{{0, 0}, 2}, {{1, 0}, 2}}),
                  MissingPrior);
}

TEST_CASE("abstraction components carry no entropy bias or variance") {
  // The component prior is known exactly, so the secret-marginal estimate
  // takes no correction from it.
  const ComponentResult abs = ComponentResult::abstract_sampled(
      0.5, {{0, 8}, {1, 8}}, {{0, 0.5}, {1, 0.5}}, 16);
  const ComponentResult plain = ComponentResult::sampled(
      0.5, {{{0, 0}, 6}, {{0, 1}, 4}, {{1, 0}, 3}, {{1, 1}, 3}}, 16);
  const EstimateReport rep = estimate_entropy({abs, plain}, 0.05);
  REQUIRE(rep.per_component.size() == 2);
  CHECK(rep.per_component[0].bias == 0.0);
  CHECK(rep.per_component[0].variance == 0.0);
  CHECK(rep.per_component[1].variance > 0.0);
}
