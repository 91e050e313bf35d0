#pragma once

#include <iosfwd>
#include <string>

#include "leakscope/joint_distribution.hpp"

namespace leakscope {

// CSV layout: first row "xy,<obs values...>", then one row per secret value
// with its probabilities. Used by test oracles and the comparison harness.

void write_matrix_csv(std::ostream& os, const JointDistribution& j);
void write_matrix_csv_file(const std::string& path, const JointDistribution& j);

JointDistribution read_matrix_csv(std::istream& is);
JointDistribution read_matrix_csv_file(const std::string& path);

}  // namespace leakscope
