#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leakscope/engine.hpp"
#include "leakscope/estimator.hpp"
#include "leakscope/joint_distribution.hpp"

namespace leakscope {

enum class Mode { Precise, Statistical, Hybrid };

struct AnalysisConfig {
  Mode mode = Mode::Hybrid;
  Count total_samples = 50000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  double realloc_fraction = 0.1;
  std::int64_t trace_cap = 8'000'000;
  std::int64_t step_cap = 1'000'000;
  double timeout_seconds = 600.0;

  bool use_ats = true;          // allow abstraction-then-sampling components
  bool known_prior = true;      // statistical mode: per-secret sampling with
                                // the declared prior
  BiasMode bias_mode = BiasMode::General;

  bool emit_matrix = false;     // print the fused joint matrix as CSV
  std::string cfg_dot_path;     // write the control flow graph as DOT
  std::string json_path;        // write the JSON report
  std::string pp_path;          // write the annotated program
  std::string trace_csv_path;   // dump precise trace outcomes as CSV
};

const char* mode_name(Mode m);
Mode parse_mode(const std::string& name);

struct ComponentDiagnostic {
  std::size_t id = 0;
  std::string method;           // precise | sample | sample-abs | known-prior
  double weight = 0.0;
  Count samples = 0;
  double bias_contribution = 0.0;
  double variance_contribution = 0.0;
  std::vector<Count> batch_allocation;
};

struct RunReport {
  std::string file;
  std::string mode;
  std::uint64_t seed = 0;
  double prior_entropy = 0.0;
  double posterior_entropy = 0.0;
  double leakage_raw = 0.0;
  double leakage_corrected = 0.0;
  double leakage_clamped = 0.0;
  double variance = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double alpha = 0.05;
  bool sample_adequate = true;
  bool exact = false;           // fully precise analysis, no sampling error
  Count total_samples = 0;
  std::vector<ComponentDiagnostic> components;
  std::vector<std::string> warnings;
  std::optional<JointDistribution> matrix;

  std::string to_json() const;
  std::string to_text() const;
};

/// The whole pipeline: parse, preprocess, decompose, enumerate, sample with
/// adaptive re-allocation, fuse, and report.
RunReport run(const std::string& path, const AnalysisConfig& config);

RunReport run_source(const std::string& source, const std::string& name,
                     const AnalysisConfig& config);

}  // namespace leakscope
