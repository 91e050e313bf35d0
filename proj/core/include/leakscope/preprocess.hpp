#pragma once

#include <map>
#include <string>
#include <vector>

#include "leakscope/ast.hpp"

namespace leakscope {

/// Preprocessed view of a program: constants substituted and folded, for
/// loops unrolled, arrays expanded to element variables, every declaration
/// normalized to a literal or interval initializer.
struct PreparedProgram {
  std::vector<VarDecl> decls;
  Block body;
  /// array name -> element variable names, for runtime-indexed accesses
  std::map<std::string, std::vector<std::string>> arrays;

  Program to_program() const;
};

PreparedProgram preprocess(const Program& p,
                           const std::string& file = "<input>");

/// Idempotence entry point: preprocessing a prepared program is a no-op.
PreparedProgram preprocess(const PreparedProgram& p,
                           const std::string& file = "<input>");

}  // namespace leakscope
