#pragma once

namespace leakscope {

/// Inverse of the standard normal CDF (Wichura's PPND16, AS241).
/// Absolute error below 1e-15 for p in (0,1).
double normal_quantile(double p);

/// z-score for the two-sided (1-alpha) confidence level.
double z_score(double alpha);

}  // namespace leakscope
