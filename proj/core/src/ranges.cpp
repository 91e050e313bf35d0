#include "leakscope/ranges.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "leakscope/errors.hpp"

namespace leakscope {

namespace {

constexpr std::int64_t kFullLo = std::numeric_limits<std::int32_t>::min();
constexpr std::int64_t kFullHi = std::numeric_limits<std::int32_t>::max();

Interval full() { return {kFullLo, kFullHi}; }
Interval bottom() { return {0, -1}; }
Interval point(std::int64_t v) { return {v, v}; }

Interval join(Interval a, Interval b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Interval clamp_full(Interval v) {
  return {std::max(v.lo, kFullLo), std::min(v.hi, kFullHi)};
}

using State = std::vector<Interval>;

bool state_equal(const State& a, const State& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].lo != b[i].lo || a[i].hi != b[i].hi) return false;
  return true;
}

struct Analyzer {
  const Cfg& cfg;

  Interval eval(const Expr& e, const State& st) const {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return point(e.value);
      case Expr::Kind::Var:
        return st[static_cast<std::size_t>(cfg.slot_of.at(e.name))];
      case Expr::Kind::ArrayRef: {
        auto it = cfg.program->arrays.find(e.name);
        if (it == cfg.program->arrays.end()) return full();
        Interval v = bottom();
        for (const auto& elem : it->second)
          v = join(v, st[static_cast<std::size_t>(cfg.slot_of.at(elem))]);
        return v;
      }
      case Expr::Kind::Unary: {
        Interval a = eval(*e.lhs, st);
        if (a.empty()) return a;
        if (e.un_op == UnOp::Neg) return {-a.hi, -a.lo};
        if (a.lo == a.hi) return point(a.lo == 0 ? 1 : 0);
        return {0, 1};
      }
      case Expr::Kind::Binary:
        return eval_bin(e, st);
      case Expr::Kind::Random: {
        Interval a = eval(*e.lhs, st), b = eval(*e.rhs, st);
        if (a.empty() || b.empty()) return bottom();
        return clamp_full({a.lo, std::max(a.lo, b.hi)});
      }
      case Expr::Kind::RandomBit:
        if (e.prob == 0) return point(0);
        if (e.prob == 1) return point(1);
        return {0, 1};
    }
    return full();
  }

  Interval eval_bin(const Expr& e, const State& st) const {
    Interval a = eval(*e.lhs, st), b = eval(*e.rhs, st);
    if (a.empty() || b.empty()) return bottom();
    switch (e.bin_op) {
      case BinOp::Add:
        return clamp_full({a.lo + b.lo, a.hi + b.hi});
      case BinOp::Sub:
        return clamp_full({a.lo - b.hi, a.hi - b.lo});
      case BinOp::Mul: {
        const std::int64_t c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo,
                                  a.hi * b.hi};
        return clamp_full({*std::min_element(c, c + 4),
                           *std::max_element(c, c + 4)});
      }
      case BinOp::Div: {
        if (b.lo <= 0 && b.hi >= 0) return full();
        const std::int64_t c[] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo,
                                  a.hi / b.hi};
        return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
      }
      case BinOp::Mod: {
        if (b.lo <= 0) return full();
        const std::int64_t m = b.hi - 1;
        return {a.lo >= 0 ? 0 : -m, m};
      }
      case BinOp::Xor: {
        if (a.lo < 0 || b.lo < 0) return full();
        std::int64_t bound = 1;
        while (bound <= a.hi || bound <= b.hi) bound <<= 1;
        return {0, bound - 1};
      }
      case BinOp::Eq:
      case BinOp::Ne:
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge:
      case BinOp::And:
      case BinOp::Or:
        return {0, 1};
    }
    return full();
  }

  // Narrows `st` under cond==want for var-vs-constant comparisons.
  void refine(const Expr& cond, bool want, State& st) const {
    if (cond.kind != Expr::Kind::Binary) return;
    const Expr *var = nullptr, *lit = nullptr;
    bool var_on_left = false;
    if (cond.lhs->kind == Expr::Kind::Var &&
        cond.rhs->kind == Expr::Kind::IntLit) {
      var = cond.lhs.get();
      lit = cond.rhs.get();
      var_on_left = true;
    } else if (cond.rhs->kind == Expr::Kind::Var &&
               cond.lhs->kind == Expr::Kind::IntLit) {
      var = cond.rhs.get();
      lit = cond.lhs.get();
    } else {
      return;
    }
    BinOp op = cond.bin_op;
    if (!var_on_left) {  // c OP v  ->  v OP' c
      switch (op) {
        case BinOp::Lt: op = BinOp::Gt; break;
        case BinOp::Le: op = BinOp::Ge; break;
        case BinOp::Gt: op = BinOp::Lt; break;
        case BinOp::Ge: op = BinOp::Le; break;
        default: break;
      }
    }
    if (!want) {  // negate
      switch (op) {
        case BinOp::Eq: op = BinOp::Ne; break;
        case BinOp::Ne: op = BinOp::Eq; break;
        case BinOp::Lt: op = BinOp::Ge; break;
        case BinOp::Le: op = BinOp::Gt; break;
        case BinOp::Gt: op = BinOp::Le; break;
        case BinOp::Ge: op = BinOp::Lt; break;
        default: return;
      }
    }
    const std::int64_t c = lit->value;
    Interval& v = st[static_cast<std::size_t>(cfg.slot_of.at(var->name))];
    if (v.empty()) return;
    switch (op) {
      case BinOp::Eq:
        if (c < v.lo || c > v.hi) v = bottom();
        else v = point(c);
        break;
      case BinOp::Ne:
        if (v.lo == v.hi && v.lo == c) v = bottom();
        break;
      case BinOp::Lt: v.hi = std::min(v.hi, c - 1); break;
      case BinOp::Le: v.hi = std::min(v.hi, c); break;
      case BinOp::Gt: v.lo = std::max(v.lo, c + 1); break;
      case BinOp::Ge: v.lo = std::max(v.lo, c); break;
      default: break;
    }
  }

  State transfer(const CfgNode& n, const State& in, bool branch_taken) const {
    State out = in;
    switch (n.kind) {
      case CfgNode::Kind::Assign: {
        Interval v = eval(*n.value, in);
        if (n.target_slot >= 0) {
          out[static_cast<std::size_t>(n.target_slot)] = v;
        } else {
          // runtime array index: weak update on every element
          auto it = cfg.program->arrays.find(*n.array_target);
          if (it != cfg.program->arrays.end())
            for (const auto& elem : it->second) {
              auto& slot = out[static_cast<std::size_t>(cfg.slot_of.at(elem))];
              slot = join(slot, v);
            }
        }
        return out;
      }
      case CfgNode::Kind::Branch:
        refine(*n.cond, branch_taken, out);
        return out;
      default:
        return out;
    }
  }
};

}  // namespace

RangeAnnotation estimate_ranges(const Cfg& cfg) {
  const auto& decls = cfg.program->decls;
  Analyzer an{cfg};

  State init(decls.size());
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const auto& d = decls[i];
    if (d.init.kind == Init::Kind::Literal)
      init[i] = point(d.init.literal->value);
    else
      init[i] = {d.init.lo->value, d.init.hi->value};
  }

  RangeAnnotation ann;
  ann.per_node.resize(cfg.nodes.size());
  std::vector<int> visits(cfg.nodes.size(), 0);
  // Joins of unrolled branches push many refinements through a node; only
  // genuinely looping programs should hit the widening threshold.
  constexpr int kWidenAfter = 64;

  auto& entry = ann.per_node[static_cast<std::size_t>(cfg.entry)];
  entry.reachable = true;
  entry.in = init;

  std::deque<int> work{cfg.entry};
  auto push_state = [&](int node, const State& st) {
    auto& tgt = ann.per_node[static_cast<std::size_t>(node)];
    if (!tgt.reachable) {
      tgt.reachable = true;
      tgt.in = st;
      work.push_back(node);
      return;
    }
    State joined(tgt.in.size());
    for (std::size_t i = 0; i < st.size(); ++i)
      joined[i] = join(tgt.in[i], st[i]);
    if (state_equal(joined, tgt.in)) return;
    if (++visits[static_cast<std::size_t>(node)] > kWidenAfter) {
      for (std::size_t i = 0; i < joined.size(); ++i)
        if (joined[i].lo != tgt.in[i].lo || joined[i].hi != tgt.in[i].hi)
          joined[i] = full();
    }
    tgt.in = std::move(joined);
    work.push_back(node);
  };

  while (!work.empty()) {
    const int id = work.front();
    work.pop_front();
    const CfgNode& n = cfg.nodes[static_cast<std::size_t>(id)];
    const State& in = ann.per_node[static_cast<std::size_t>(id)].in;
    switch (n.kind) {
      case CfgNode::Kind::Branch: {
        State t = an.transfer(n, in, true);
        bool dead_then = false, dead_else = false;
        for (const auto& v : t) dead_then |= v.empty();
        if (!dead_then) push_state(n.next, t);
        State f = an.transfer(n, in, false);
        for (const auto& v : f) dead_else |= v.empty();
        if (!dead_else) push_state(n.next_else, f);
        break;
      }
      case CfgNode::Kind::Return:
        break;
      default:
        if (n.next >= 0) push_state(n.next, an.transfer(n, in, true));
        break;
    }
  }

  // Exit summary: join over every return node's in-state.
  for (std::size_t id = 0; id < cfg.nodes.size(); ++id) {
    if (cfg.nodes[id].kind != CfgNode::Kind::Return) continue;
    const auto& node = ann.per_node[id];
    if (!node.reachable) continue;
    if (!ann.exit_state.reachable) {
      ann.exit_state.reachable = true;
      ann.exit_state.in = node.in;
    } else {
      for (std::size_t i = 0; i < node.in.size(); ++i)
        ann.exit_state.in[i] = join(ann.exit_state.in[i], node.in[i]);
    }
  }

  // TOT products over the in-states.
  constexpr double kSaturate = 1e18;
  auto products = [&](NodeRanges& node) {
    for (std::size_t i = 0; i < decls.size(); ++i) {
      const double c = std::max(1.0, node.in[i].count());
      switch (decls[i].cls) {
        case VarClass::Observable:
          node.tot_obs = std::min(kSaturate, node.tot_obs * c);
          break;
        case VarClass::Public:
        case VarClass::Private:
          node.tot_int = std::min(kSaturate, node.tot_int * c);
          break;
        case VarClass::Secret:
          node.tot_secret = std::min(kSaturate, node.tot_secret * c);
          break;
        default:
          break;
      }
    }
  };
  for (std::size_t id = 0; id < cfg.nodes.size(); ++id)
    if (ann.per_node[id].reachable) products(ann.per_node[id]);
  if (ann.exit_state.reachable) products(ann.exit_state);
  return ann;
}

}  // namespace leakscope
