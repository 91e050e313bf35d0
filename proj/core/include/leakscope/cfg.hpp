#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "leakscope/preprocess.hpp"

namespace leakscope {

/// Control-flow graph in if-goto form: one node per simplified statement.
/// Shared by the range analysis, the decomposer and both engines.
struct CfgNode {
  enum class Kind { Assign, Branch, Return, Simulate, SimulateAbs };
  Kind kind = Kind::Return;
  Pos pos;

  // Assign: target slot, or a runtime-indexed array target
  int target_slot = -1;
  const std::string* array_target = nullptr;
  const Expr* target_index = nullptr;
  const Expr* value = nullptr;

  // Branch
  const Expr* cond = nullptr;

  int next = -1;       // fallthrough / branch-true successor
  int next_else = -1;  // branch-false successor

  std::vector<int> preds;
};

struct Cfg {
  std::vector<CfgNode> nodes;
  int entry = -1;  // -1 when the body is empty: the program returns at once
  int exit_node = -1;

  // Variable slots in declaration order.
  std::vector<std::string> slot_names;
  std::map<std::string, int> slot_of;
  const PreparedProgram* program = nullptr;

  // Entry node of each top-level statement (kTopLevelEnd for "past the end"),
  // in statement order. Used by the decomposer's boundary scan.
  std::vector<int> top_level_entry;
};

Cfg build_cfg(const PreparedProgram& p);

/// DOT rendering; simulate nodes are highlighted.
void write_cfg_dot(std::ostream& os, const Cfg& cfg);
std::string cfg_to_dot(const Cfg& cfg);

}  // namespace leakscope
