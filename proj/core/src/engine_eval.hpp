#pragma once

// Internal expression-evaluation helpers shared by the precise and
// statistical engines.

#include <functional>
#include <utility>
#include <vector>

#include "leakscope/cfg.hpp"
#include "leakscope/engine.hpp"

namespace leakscope::detail {

/// Concrete evaluation; randomness drawn from rng. Passing rng=nullptr
/// asserts the expression is deterministic (used on fast paths).
std::int64_t eval_concrete(const Cfg& cfg, const Expr& e, const Env& env,
                           Rng* rng);

int runtime_array_slot(const Cfg& cfg, const std::string& array,
                       std::int64_t index, Pos pos);

bool expr_has_random(const Expr& e);

/// Exact value distribution of an expression over its random subexpressions.
using Dist = std::vector<std::pair<Rational, std::int64_t>>;
Dist eval_dist(const Cfg& cfg, const Expr& e, const Env& env);

Env initial_env_literals(const Cfg& cfg);

}  // namespace leakscope::detail
