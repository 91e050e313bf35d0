#include <doctest.h>

#include <cmath>

#include "leakscope/cfg.hpp"
#include "leakscope/decompose.hpp"
#include "leakscope/engine.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/estimator.hpp"
#include "leakscope/parser.hpp"
#include "leakscope/preprocess.hpp"
#include "leakscope/ranges.hpp"
#include "oracle.hpp"

using namespace leakscope;

namespace {

std::string fixture(const std::string& name) {
  return std::string(LEAKSCOPE_FIXTURES) + "/" + name;
}

PreparedProgram load(const std::string& name) {
  return preprocess(parse_file(fixture(name)));
}

// Engine outcomes and oracle tallies use the same (secret tuple, observable
// tuple) keys once the engine's encoded secret is widened back to a tuple.
oracle::Tally engine_tally(const Cfg& cfg, const EnumerationResult& res) {
  const SecretSpace secrets = SecretSpace::from(cfg);
  oracle::Tally out;
  Env env(cfg.program->decls.size(), 0);
  for (const auto& o : res.outcomes) {
    Env e = env;
    secrets.assign(o.secret, e);
    std::vector<std::int64_t> x;
    for (const auto& v : secrets.vars())
      x.push_back(e[static_cast<std::size_t>(v.slot)]);
    out[{x, o.observable}] += o.probability;
  }
  return out;
}

void check_bit_for_bit(const std::string& name) {
  const PreparedProgram prep = load(name);
  const Cfg cfg = build_cfg(prep);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  REQUIRE(res.exact_weight == 1);
  const oracle::Tally engine = engine_tally(cfg, res);
  const oracle::Tally truth = oracle::brute_force(prep);
  REQUIRE(engine.size() == truth.size());
  for (const auto& [cell, pr] : truth) {
    auto it = engine.find(cell);
    REQUIRE(it != engine.end());
    CHECK(it->second == pr);  // exact rational equality
  }
}

}  // namespace

TEST_CASE("identity channel enumerates exactly") {
  const PreparedProgram prep = preprocess(parse_source(
      "secret int1 s := [0,1];\nobservable int1 o := 0;\n"
      "o := s;\nreturn;\n"));
  const Cfg cfg = build_cfg(prep);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  REQUIRE(res.outcomes.size() == 2);
  for (const auto& o : res.outcomes) {
    CHECK(o.probability == Rational(1, 2));
    CHECK(o.secret == o.observable.at(0));
  }
}

TEST_CASE("random walk prefix saves seven components and no outcomes") {
  const PreparedProgram prep = load("random_walk.hyleak");
  const Cfg cfg0 = build_cfg(prep);
  const Decomposition d = decompose(prep, cfg0, estimate_ranges(cfg0));
  const Cfg cfg = build_cfg(d.program);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  CHECK(res.outcomes.empty());
  REQUIRE(res.components.size() == 7);
  // weights 50/600, 100/600 x5, 50/600 in location order
  CHECK(res.components.front().weight == Rational(50, 600));
  Rational sum = 0;
  for (const auto& c : res.components) sum += c.weight;
  CHECK(sum == 1);
  // each component's states cover its secret bucket with the uniform prior
  const auto& c0 = res.components.front();
  CHECK(c0.states.size() == 50);
  CHECK(c0.states.begin()->second.first == Rational(1, 600));
}

TEST_CASE("precise engine agrees with the brute-force oracle bit for bit") {
  check_bit_for_bit("dining3.hyleak");
  check_bit_for_bit("reservoir_n4.hyleak");
  check_bit_for_bit("shifting_window_n20.hyleak");
}

TEST_CASE("sampling is seed-deterministic") {
  const PreparedProgram prep = load("random_walk.hyleak");
  const Cfg cfg0 = build_cfg(prep);
  const Decomposition d = decompose(prep, cfg0, estimate_ranges(cfg0));
  const Cfg cfg = build_cfg(d.program);
  const SecretSpace secrets = SecretSpace::from(cfg);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  const SavedComponent& c = res.components.front();

  Rng a = Rng::derive(123, 0, 0);
  Rng b = Rng::derive(123, 0, 0);
  const auto counts_a = sample_component(cfg, secrets, c, 100, a, EngineLimits{});
  const auto counts_b = sample_component(cfg, secrets, c, 100, b, EngineLimits{});
  CHECK(counts_a == counts_b);

  Rng other = Rng::derive(123, 0, 1);
  const auto counts_c =
      sample_component(cfg, secrets, c, 100, other, EngineLimits{});
  CHECK(counts_a != counts_c);

  Count total = 0;
  for (const auto& [cell, k] : counts_a) total += k;
  CHECK(total == 100);
}

TEST_CASE("deterministic component puts all runs on one cell") {
  const PreparedProgram prep = preprocess(parse_source(
      "secret int1 s := 1;\nobservable int32 o := 0;\n"
      "simulate;\no := 7;\nreturn;\n"));
  const Cfg cfg = build_cfg(prep);
  const SecretSpace secrets = SecretSpace::from(cfg);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  REQUIRE(res.components.size() == 1);
  Rng rng(9);
  const auto counts = sample_component(cfg, secrets, res.components[0], 50,
                                       rng, EngineLimits{});
  REQUIRE(counts.size() == 1);
  CHECK(counts.begin()->second == 50);
  CHECK(counts.begin()->first.second == ObsTuple{7});
}

TEST_CASE("fair coin sampling stays within five sigma") {
  const PreparedProgram prep = preprocess(parse_source(
      "secret int1 s := [0,1];\nobservable int1 o := 0;\n"
      "simulate;\no := randombit(0.5);\nreturn;\n"));
  const Cfg cfg = build_cfg(prep);
  const SecretSpace secrets = SecretSpace::from(cfg);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  REQUIRE(res.components.size() == 1);
  const Count n = 1000000;
  Rng rng(2024);
  const auto counts = sample_component(cfg, secrets, res.components[0], n,
                                       rng, EngineLimits{});
  Count ones = 0;
  for (const auto& [cell, k] : counts)
    if (cell.second == ObsTuple{1}) ones += k;
  const double sigma = std::sqrt(0.25 * static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(ones) - 500000.0) < 5.0 * sigma);
}

TEST_CASE("abstraction sampling fixes the representative secret") {
  const PreparedProgram prep = load("random_walk.hyleak");
  const Cfg cfg0 = build_cfg(prep);
  const Decomposition d = decompose(prep, cfg0, estimate_ranges(cfg0));
  const Cfg cfg = build_cfg(d.program);
  const SecretSpace secrets = SecretSpace::from(cfg);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  const SavedComponent& c = res.components.front();

  Rng rng = Rng::derive(55, 0, 0);
  const auto out_counts =
      sample_component_abs(cfg, secrets, c, 2000, rng, EngineLimits{});
  Count total = 0;
  for (const auto& [y, k] : out_counts) total += k;
  CHECK(total == 2000);

  // output-constant component: one observed value
  const PreparedProgram cprog = preprocess(parse_source(
      "secret int2 s := [0,3];\nobservable int32 o := 0;\n"
      "simulate-abs;\no := 5;\nreturn;\n"));
  const Cfg ccfg = build_cfg(cprog);
  const EnumerationResult cres = enumerate_traces(ccfg, EngineLimits{});
  Rng crng(3);
  const auto ccounts = sample_component_abs(
      ccfg, SecretSpace::from(ccfg), cres.components.front(), 64, crng,
      EngineLimits{});
  REQUIRE(ccounts.size() == 1);
  CHECK(ccounts.begin()->first == ObsTuple{5});
  CHECK(ccounts.begin()->second == 64);
}

TEST_CASE("sample and sample_abs agree on input-independent components") {
  // Two-sample z-test on the output marginal of one walk component.
  const PreparedProgram prep = load("random_walk.hyleak");
  const Cfg cfg0 = build_cfg(prep);
  const Decomposition d = decompose(prep, cfg0, estimate_ranges(cfg0));
  const Cfg cfg = build_cfg(d.program);
  const SecretSpace secrets = SecretSpace::from(cfg);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  const SavedComponent& c = res.components[3];

  const Count n = 40000;
  Rng r1 = Rng::derive(77, 1, 0);
  Rng r2 = Rng::derive(77, 2, 0);
  const auto plain = sample_component(cfg, secrets, c, n, r1, EngineLimits{});
  const auto abs = sample_component_abs(cfg, secrets, c, n, r2, EngineLimits{});
  std::map<ObsTuple, Count> plain_marginal;
  for (const auto& [cell, k] : plain) plain_marginal[cell.second] += k;
  for (const auto& [y, k_abs] : abs) {
    const double p_abs = static_cast<double>(k_abs) / n;
    const auto it = plain_marginal.find(y);
    const double p_plain =
        it == plain_marginal.end() ? 0.0 : static_cast<double>(it->second) / n;
    const double p = 0.5 * (p_abs + p_plain);
    if (p * n < 10) continue;  // skip rare cells, the bound is asymptotic
    const double sigma = std::sqrt(2.0 * p * (1.0 - p) / n);
    CHECK(std::abs(p_abs - p_plain) < 5.0 * sigma);
  }
}

TEST_CASE("sample_abs rows are identical after prior scaling") {
  const ComponentResult abs = ComponentResult::abstract_sampled(
      1.0, {{0, 3}, {1, 1}}, {{0, 0.5}, {1, 0.5}}, 4);
  const SubDistribution sub = empirical_subdist(abs);
  // row x=0 and row x=1 are proportional to the same output distribution
  CHECK(sub.mass.at({0, 0}) == doctest::Approx(sub.mass.at({1, 0})));
  CHECK(sub.mass.at({0, 1}) == doctest::Approx(sub.mass.at({1, 1})));
}

TEST_CASE("trace budget guards precise analysis of unbounded loops") {
  const PreparedProgram prep = load("prob_terminating.hyleak");
  const Cfg cfg = build_cfg(prep);
  CHECK_THROWS_AS(enumerate_traces(cfg, EngineLimits{}), TraceBudgetExceeded);
}

TEST_CASE("step cap guards a diverging run") {
  const PreparedProgram prep = preprocess(parse_source(
      "secret int1 s := [0,1];\nobservable int1 o := 0;\n"
      "public int1 t := 0;\n"
      "while t != 1 {\n  o := o xor 1;\n}\nreturn;\n"));
  const Cfg cfg = build_cfg(prep);
  const SecretSpace secrets = SecretSpace::from(cfg);
  const SavedComponent whole =
      whole_program_component(cfg, AnalysisMethod::Sample);
  EngineLimits limits;
  limits.step_cap = 1000;
  Rng rng(1);
  CHECK_THROWS_AS(sample_component(cfg, secrets, whole, 1, rng, limits),
                  RuntimeDivergenceGuard);
}

TEST_CASE("runtime array indices are bounds-checked") {
  const PreparedProgram prep = preprocess(parse_source(
      "secret int1 s := [0,1];\nobservable int1 o := 0;\n"
      "public array[2] of int1 a;\npublic int32 j := 0;\n"
      "j := random(0, 5);\na[j] := 1;\no := a[0];\nreturn;\n"));
  const Cfg cfg = build_cfg(prep);
  CHECK_THROWS_WITH_AS(enumerate_traces(cfg, EngineLimits{}),
                       doctest::Contains("out of bounds"), AnalysisError);
}

TEST_CASE("integer division and modulo follow C semantics") {
  const PreparedProgram prep = preprocess(parse_source(
      "secret int2 s := [0,3];\nobservable int32 o := 0;\n"
      "o := (s * 7) / 2 % 5;\nreturn;\n"));
  const Cfg cfg = build_cfg(prep);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  // s=0..3 -> 7s/2 = 0,3,7,10 -> %5 = 0,3,2,0
  std::map<Value, std::int64_t> expected{{0, 0}, {1, 3}, {2, 2}, {3, 0}};
  for (const auto& o : res.outcomes)
    CHECK(o.observable.at(0) == expected.at(o.secret));
}

TEST_CASE("division by zero reports a runtime error") {
  const PreparedProgram prep = preprocess(parse_source(
      "secret int2 s := [0,3];\nobservable int32 o := 0;\n"
      "o := 4 / s;\nreturn;\n"));
  const Cfg cfg = build_cfg(prep);
  CHECK_THROWS_WITH_AS(enumerate_traces(cfg, EngineLimits{}),
                       doctest::Contains("division by zero"), AnalysisError);
}

TEST_CASE("randombit edge probabilities are deterministic") {
  const PreparedProgram prep = preprocess(parse_source(
      "secret int1 s := [0,1];\nobservable int2 o := 0;\n"
      "o := randombit(1) + randombit(0);\nreturn;\n"));
  const Cfg cfg = build_cfg(prep);
  const EnumerationResult res = enumerate_traces(cfg, EngineLimits{});
  for (const auto& o : res.outcomes) CHECK(o.observable.at(0) == 1);
}
