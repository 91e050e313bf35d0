#pragma once

#include <map>
#include <vector>

#include "leakscope/component_result.hpp"
#include "leakscope/estimator.hpp"

namespace leakscope {

enum class AllocationMode { MI, Entropy, KnownPrior, ATS };

/// Intermediate per-component variances v_i whose square roots drive the
/// optimal split of the sample budget.
struct AllocationWeights {
  AllocationMode mode = AllocationMode::MI;
  std::vector<double> per_component;
  // KnownPrior mode: one weight per (component, input).
  std::vector<std::map<Value, double>> per_input;
};

struct AllocationPlan {
  std::vector<Count> per_component;
  std::vector<std::map<Value, Count>> per_input;
  Count total = 0;
};

/// v_i / v'_i / v_ix / v_i'* from a pilot round, evaluated on the empirical
/// sub-distributions and the fused joint of that round.
AllocationWeights compute_weights(const std::vector<ComponentResult>& pilot,
                                  const JointDistribution& fused,
                                  AllocationMode mode);

/// Proportional-to-sqrt(v) allocation of n, floored at `floor` samples per
/// slot and integerized by largest remainder so the total is exact.
AllocationPlan optimal_allocation(const AllocationWeights& w, Count n,
                                  Count floor = 1);

/// Raw slot allocation used by optimal_allocation; exposed for tests.
std::vector<Count> allocate_budget(const std::vector<double>& weights, Count n,
                                   Count floor);

/// Real-valued allocation before flooring/rounding.
std::vector<double> allocate_budget_real(const std::vector<double>& weights,
                                         Count n);

/// Batch budgets: ceil(1/fraction) batches of floor(total*fraction) with the
/// remainder folded into the last one.
std::vector<Count> batch_schedule(Count total, double fraction);

}  // namespace leakscope
