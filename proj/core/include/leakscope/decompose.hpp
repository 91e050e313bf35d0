#pragma once

#include <string>

#include "leakscope/cfg.hpp"
#include "leakscope/ranges.hpp"

namespace leakscope {

enum class AnalysisMethod { Precise, Sample, SampleAbs };

/// Outcome of the decomposition procedure: where the statistical region
/// starts (a single statement-boundary cut in the top-level body) and which
/// sampling method its components use. The concrete component list (secret
/// sets, execution probabilities) is produced later by the precise prefix
/// enumeration.
struct ComponentPlan {
  bool has_cut = false;
  std::size_t cut_statement = 0;  // simulate inserted before body[cut_statement]
  AnalysisMethod method = AnalysisMethod::Precise;
  bool honored_existing = false;  // source already carried simulate statements
  double est_secret_values = 1.0;   // #X estimate at the cut
  double est_observable_values = 1.0;  // #Y estimate (program exit)
  double est_internal_values = 1.0;    // #Z estimate (program exit)
  std::string rationale;
};

struct Decomposition {
  PreparedProgram program;  // simulate / simulate-abs inserted
  ComponentPlan plan;
};

/// True when no observable assignment in body[from_statement..] depends on a
/// secret by data or control flow. Conservative: false on doubt.
bool check_input_independent(const PreparedProgram& p,
                             std::size_t from_statement);

/// Marks the program for hybrid analysis: finds the earliest viable boundary
/// whose suffix is probabilistic and cheaper to sample than to enumerate
/// (internal-value estimate exceeding the secret-value estimate), honoring
/// explicit simulate statements when present.
Decomposition decompose(const PreparedProgram& p, const Cfg& cfg,
                        const RangeAnnotation& ranges);

/// True if the statement subtree draws randomness (random/randombit).
bool block_probabilistic(const Block& b);
/// True if any non-secret declaration carries an interval initializer.
bool decls_probabilistic(const std::vector<VarDecl>& decls);

}  // namespace leakscope
