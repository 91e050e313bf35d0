#pragma once

#include <stdexcept>
#include <string>

namespace leakscope {

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// dist-core
struct WeightSumMismatch : AnalysisError { using AnalysisError::AnalysisError; };
struct NegativeMass : AnalysisError { using AnalysisError::AnalysisError; };
struct InvalidDistribution : AnalysisError { using AnalysisError::AnalysisError; };

// estimator
struct ZeroSampleSize : AnalysisError { using AnalysisError::AnalysisError; };
struct EmptySupport : AnalysisError { using AnalysisError::AnalysisError; };
struct MissingPrior : AnalysisError { using AnalysisError::AnalysisError; };
struct ZeroImportanceMass : AnalysisError { using AnalysisError::AnalysisError; };

// allocator
struct EmptyPilot : AnalysisError { using AnalysisError::AnalysisError; };
struct BudgetTooSmall : AnalysisError { using AnalysisError::AnalysisError; };

// frontend; messages follow "file:line:col: message"
struct LexError : AnalysisError { using AnalysisError::AnalysisError; };
struct ParseError : AnalysisError { using AnalysisError::AnalysisError; };
struct UnboundConst : AnalysisError { using AnalysisError::AnalysisError; };
struct NonConstantLoopBound : AnalysisError { using AnalysisError::AnalysisError; };

// engines
struct TraceBudgetExceeded : AnalysisError { using AnalysisError::AnalysisError; };
struct RuntimeDivergenceGuard : AnalysisError { using AnalysisError::AnalysisError; };

// pipeline
struct TimeoutExceeded : AnalysisError { using AnalysisError::AnalysisError; };
struct FixtureMissing : AnalysisError { using AnalysisError::AnalysisError; };

}  // namespace leakscope
