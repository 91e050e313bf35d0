#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <vector>

#include "leakscope/cfg.hpp"
#include "leakscope/component_result.hpp"
#include "leakscope/decompose.hpp"
#include "leakscope/rational.hpp"
#include "leakscope/rng.hpp"
#include "leakscope/value_domain.hpp"

namespace leakscope {

using Env = std::vector<std::int64_t>;
/// Observable variables' final values in declaration order.
using ObsTuple = std::vector<std::int64_t>;

/// Secret variables and their declared value ranges; defines the bijective
/// encoding of secret tuples into a single Value.
class SecretSpace {
 public:
  struct SecretVar {
    int slot;
    std::int64_t lo, hi;
  };

  static SecretSpace from(const Cfg& cfg);

  const std::vector<SecretVar>& vars() const { return vars_; }
  double count() const { return count_; }
  bool materializable(double cap = 1e6) const { return count_ <= cap; }

  Value encode(const Env& env) const;
  void assign(Value code, Env& env) const;
  /// Every secret code, ascending. Requires materializable().
  std::vector<Value> all_values() const;
  Rational prior_mass() const { return prior_mass_; }  // uniform: 1/count

  void draw(Rng& rng, Env& env) const;  // uniform draw of all secret vars

 private:
  std::vector<SecretVar> vars_;
  double count_ = 1.0;
  Rational prior_mass_ = 1;
  bool single_ = false;  // single secret: code is the raw value
};

struct TraceOutcome {
  Value secret;
  ObsTuple observable;
  Rational probability;
};

/// A component discovered at a simulate node: saved program states grouped
/// by their shared non-secret environment.
struct SavedComponent {
  AnalysisMethod method = AnalysisMethod::Sample;
  Rational weight = 0;
  int resume_node = -1;
  bool pre_init = false;  // whole-program component: draw inits per run
  /// per secret code: probability mass and the saved environment
  std::map<Value, std::pair<Rational, Env>> states;
};

struct EnumerationResult {
  std::vector<TraceOutcome> outcomes;   // merged by (secret, observable)
  std::vector<SavedComponent> components;
  Rational exact_weight = 0;            // mass that terminated precisely
};

struct EngineLimits {
  std::int64_t trace_cap = 8'000'000;   // processed-state budget (precise)
  std::int64_t step_cap = 1'000'000;    // per-run step budget (sampling)
  // Path-probability floor, expressed in bits: a path whose probability
  // drops below 2^-floor trips the trace budget. Probabilistic loops shrink
  // path probabilities geometrically, so this catches non-termination long
  // before the state budget does.
  int path_probability_floor_bits = 200;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Depth-first exploration of all execution paths with exact rational
/// probabilities and merging of identical program states. Stops paths at
/// return (exact outcome) and at simulate nodes (saved component states).
EnumerationResult enumerate_traces(const Cfg& cfg, const EngineLimits& limits);

/// Builds the single whole-program component used when the decomposition cut
/// is at the top of the body (or in forced statistical mode): variables are
/// initialized per run, secrets drawn from the declared prior.
SavedComponent whole_program_component(const Cfg& cfg, AnalysisMethod method);

ObsTuple observe(const Cfg& cfg, const Env& env);

/// Runs one concrete execution from a saved environment; returns the
/// observable tuple. Randomness comes from `rng` only.
ObsTuple execute_once(const Cfg& cfg, Env env, int start_node, Rng& rng,
                      const EngineLimits& limits);

/// n seeded runs of a Sample component; counts keyed by (secret code,
/// observable tuple). Sum of counts is exactly n.
std::map<std::pair<Value, ObsTuple>, Count> sample_component(
    const Cfg& cfg, const SecretSpace& secrets, const SavedComponent& c,
    Count n, Rng& rng, const EngineLimits& limits);

/// n seeded runs at the component's representative secret (its minimum);
/// counts keyed by observable tuple.
std::map<ObsTuple, Count> sample_component_abs(const Cfg& cfg,
                                               const SecretSpace& secrets,
                                               const SavedComponent& c, Count n,
                                               Rng& rng,
                                               const EngineLimits& limits);

/// Known-prior sampling: exactly runs[x] executions per secret x.
std::map<std::pair<Value, ObsTuple>, Count> sample_per_secret(
    const Cfg& cfg, const SecretSpace& secrets, const SavedComponent& c,
    const std::map<Value, Count>& runs, Rng& rng, const EngineLimits& limits);

}  // namespace leakscope
