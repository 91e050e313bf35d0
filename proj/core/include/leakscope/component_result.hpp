#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "leakscope/rational.hpp"
#include "leakscope/value_domain.hpp"

namespace leakscope {

using Count = std::int64_t;
using CellCounts = std::map<std::pair<Value, Value>, Count>;

/// One component's analysis outcome, in the four shapes the estimator fuses.
struct ComponentResult {
  enum class Kind { Exact, Sampled, AbstractSampled, SampledKnownPrior };

  Kind kind = Kind::Exact;

  // Exact: weight = xi_j, exact sub-distribution mass.
  double weight = 0.0;
  std::map<std::pair<Value, Value>, Rational> exact_mass;

  // Sampled: weight = theta_i, counts K_ixy with sum = sample_size.
  CellCounts counts;
  Count sample_size = 0;

  // AbstractSampled: output counts K_i.y (sum = sample_size) plus the
  // component's input prior pi_i.
  std::map<Value, Count> output_counts;
  std::map<Value, double> input_prior;

  // SampledKnownPrior: per-input weights theta_ix, per-input run counts
  // (integerized n_i * lambda_i[x]) and per-input output counts.
  std::map<Value, double> per_input_weight;
  std::map<Value, Count> per_input_runs;

  static ComponentResult exact(double xi,
                               std::map<std::pair<Value, Value>, Rational> mass);
  static ComponentResult sampled(double theta, CellCounts counts, Count n);
  static ComponentResult abstract_sampled(double theta,
                                          std::map<Value, Count> output_counts,
                                          std::map<Value, double> input_prior,
                                          Count n);
  static ComponentResult sampled_known_prior(
      std::map<Value, double> per_input_weight,
      std::map<Value, Count> per_input_runs, CellCounts counts);

  /// Validates the count/weight invariants for the given kind.
  void check() const;
};

}  // namespace leakscope
