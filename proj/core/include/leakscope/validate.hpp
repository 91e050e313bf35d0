#pragma once

#include <string>
#include <vector>

#include "leakscope/pipeline.hpp"

namespace leakscope {

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double expected = 0.0;
  double got = 0.0;
  std::string detail;
};

struct ValidationSummary {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
  std::string to_text() const;
};

/// Runs the benchmark fixture corpus in every applicable mode and compares
/// the results against frozen reference values.
ValidationSummary validate(const std::string& fixtures_dir,
                           const AnalysisConfig& base);

}  // namespace leakscope
