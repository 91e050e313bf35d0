#pragma once

#include <cstdint>
#include <vector>

#include "leakscope/cfg.hpp"

namespace leakscope {

/// Value interval with cardinality = hi - lo + 1; lo > hi means unreachable.
struct Interval {
  std::int64_t lo = 0;
  std::int64_t hi = -1;

  bool empty() const { return lo > hi; }
  double count() const {
    return empty() ? 0.0
                   : static_cast<double>(hi) - static_cast<double>(lo) + 1.0;
  }
};

/// Per-node interval state (as observed when arriving at the node) and the
/// TOT_OBS / TOT_INT value-count products over observable / internal
/// (public+private) variables.
struct NodeRanges {
  bool reachable = false;
  std::vector<Interval> in;
  double tot_obs = 1.0;
  double tot_int = 1.0;
  double tot_secret = 1.0;
};

struct RangeAnnotation {
  std::vector<NodeRanges> per_node;
  /// Join over the in-states of every return node: the variable ranges a
  /// completed execution may have seen.
  NodeRanges exit_state;

  const NodeRanges& at(int node) const {
    return per_node[static_cast<std::size_t>(node)];
  }
  const NodeRanges& at_exit(const Cfg&) const { return exit_state; }
};

/// Forward interval analysis over the CFG; heuristic upper bounds only.
RangeAnnotation estimate_ranges(const Cfg& cfg);

}  // namespace leakscope
