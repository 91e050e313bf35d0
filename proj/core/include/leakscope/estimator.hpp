#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "leakscope/component_result.hpp"
#include "leakscope/joint_distribution.hpp"

namespace leakscope {

/// Per-component bias/variance kernel sums, evaluated on empirical
/// quantities. Kept in the report so tests and the allocator can audit the
/// correction term by term.
struct EstimatorIntermediates {
  double phi_xy_sum = 0.0;   // joint bias kernel (phi or psi for ATS)
  double phi_x_sum = 0.0;    // input-marginal bias kernel (0 for ATS)
  double phi_y_sum = 0.0;    // output-marginal bias kernel
  double bias = 0.0;         // signed contribution subtracted from the raw MI
  double variance = 0.0;     // contribution to the estimate variance
  Count sample_size = 0;
};

struct EstimateReport {
  double raw_estimate = 0.0;
  double corrected_estimate = 0.0;
  double clamped_estimate = 0.0;
  double variance = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double alpha = 0.05;
  bool sample_adequate = true;
  std::vector<EstimatorIntermediates> per_component;

  std::string to_json() const;
};

enum class BiasMode {
  General,    // the per-component phi/psi kernel correction
  Corollary,  // (#X-1)(#Y-1)/2n, the comparison mode
};

/// Empirical sub-distribution of a sampled component
/// (theta_i K_ixy / n_i, and its abstraction/known-prior variants).
SubDistribution empirical_subdist(const ComponentResult& c);

/// Exact component converted to a floating sub-distribution at fusion time.
SubDistribution exact_subdist(const ComponentResult& c);

JointDistribution fuse(const std::vector<ComponentResult>& results);

/// Bias-corrected mutual information with variance and confidence interval.
/// Accepts Exact, Sampled and AbstractSampled components.
EstimateReport estimate_mi(const std::vector<ComponentResult>& results,
                           double alpha,
                           BiasMode mode = BiasMode::General);

/// Shannon entropy of the secret marginal, same fusion rules.
EstimateReport estimate_entropy(const std::vector<ComponentResult>& results,
                                double alpha);

/// Mutual information when the prior is known exactly: Exact plus
/// SampledKnownPrior components, importance-prior aware.
EstimateReport estimate_mi_known_prior(
    const std::vector<ComponentResult>& results, double alpha,
    BiasMode mode = BiasMode::General);

/// H(X) - corrected MI; variance identical to the known-prior MI variance.
EstimateReport estimate_cond_entropy_known_prior(
    const std::vector<ComponentResult>& results, double alpha);

/// (#X-1)(#Y-1)/(2n). Comparison mode only.
double corollary_bias(std::int64_t nx, std::int64_t ny, std::int64_t n);

/// [max(0, pe - z sqrt(v)), pe + z sqrt(v)] at significance alpha.
std::pair<double, double> confidence_interval(double pe, double v,
                                              double alpha);

}  // namespace leakscope
