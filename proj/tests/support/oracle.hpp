#pragma once

// Test-only oracles, deliberately independent of the engine implementations:
// a brute-force tree-walking enumerator over all program randomness, and a
// direct high-precision mutual-information summation.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "leakscope/component_result.hpp"
#include "leakscope/joint_distribution.hpp"
#include "leakscope/preprocess.hpp"
#include "leakscope/rational.hpp"

namespace oracle {

using leakscope::Rational;

// (secret tuple, observable tuple) -> exact probability
using Tally =
    std::map<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>,
             Rational>;

/// Enumerates every secret assignment, every interval initialization and
/// every random draw of the prepared program by direct recursion over the
/// statement tree. No state merging, no CFG.
Tally brute_force(const leakscope::PreparedProgram& p);

/// I(X;Y) from a tally, long-double Kahan accumulation in sorted cell order.
double tally_mutual_information(const Tally& t);

double tally_entropy_x(const Tally& t);

/// Direct summation oracle over a joint matrix (long double, Kahan).
double matrix_mutual_information(const leakscope::JointDistribution& j);

/// Three-component mixed-analysis example: S1 sampled on
/// {0,1}x{0,1}, S2 input-independent over all four inputs with outputs {2,3},
/// T exact on {(2,0),(3,1)}. Weights 0.25 / 0.4 / 0.35.
struct ThreeComponentFixture {
  // True sub-distributions, normalized per component.
  std::map<std::pair<leakscope::Value, leakscope::Value>, double> d1, d2;
  std::map<std::pair<leakscope::Value, leakscope::Value>, Rational> exact_t;
  double theta1 = 0.25, theta2 = 0.4, xi = 0.35;
  leakscope::JointDistribution true_joint();
};
ThreeComponentFixture three_component_fixture();

}  // namespace oracle
