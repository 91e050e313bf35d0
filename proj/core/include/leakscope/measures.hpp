#pragma once

#include <span>
#include <vector>

#include "leakscope/joint_distribution.hpp"

namespace leakscope {

// All measures are in bits (base-2 logs) with 0 log 0 := 0.

/// I(X;Y) = sum over the support of P_XY log2(P_XY / (P_X P_Y)).
double mutual_information(const JointDistribution& j);

/// H(p) = -sum p log2 p. Entries must be nonnegative and sum to 1 within 1e-9.
double shannon_entropy(std::span<const double> p);

/// H(X|Y), summed over positive-probability outputs.
double conditional_entropy(const JointDistribution& j);

double joint_entropy(const JointDistribution& j);

}  // namespace leakscope
