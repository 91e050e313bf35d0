#include <algorithm>

#include "engine_eval.hpp"
#include "leakscope/engine.hpp"
#include "leakscope/errors.hpp"

namespace leakscope {

// ------------------------------------------------------------ secret space

SecretSpace SecretSpace::from(const Cfg& cfg) {
  SecretSpace out;
  const auto& decls = cfg.program->decls;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const auto& d = decls[i];
    if (d.cls != VarClass::Secret) continue;
    SecretVar v;
    v.slot = static_cast<int>(i);
    if (d.init.kind == Init::Kind::Literal) {
      v.lo = v.hi = d.init.literal->value;
    } else {
      v.lo = d.init.lo->value;
      v.hi = d.init.hi->value;
    }
    out.vars_.push_back(v);
    out.count_ *= static_cast<double>(v.hi - v.lo + 1);
    out.prior_mass_ /= Rational(v.hi - v.lo + 1);
  }
  if (out.vars_.empty())
    throw AnalysisError("program declares no secret variable");
  out.single_ = out.vars_.size() == 1;
  return out;
}

Value SecretSpace::encode(const Env& env) const {
  if (single_) return env[static_cast<std::size_t>(vars_[0].slot)];
  Value code = 0;
  for (const auto& v : vars_) {
    const std::int64_t span = v.hi - v.lo + 1;
    code = code * span + (env[static_cast<std::size_t>(v.slot)] - v.lo);
  }
  return code;
}

void SecretSpace::assign(Value code, Env& env) const {
  if (single_) {
    env[static_cast<std::size_t>(vars_[0].slot)] = code;
    return;
  }
  for (std::size_t i = vars_.size(); i-- > 0;) {
    const auto& v = vars_[i];
    const std::int64_t span = v.hi - v.lo + 1;
    env[static_cast<std::size_t>(v.slot)] = v.lo + code % span;
    code /= span;
  }
}

std::vector<Value> SecretSpace::all_values() const {
  if (!materializable())
    throw AnalysisError("secret domain too large to enumerate");
  std::vector<Value> out;
  if (single_) {
    for (Value v = vars_[0].lo; v <= vars_[0].hi; ++v) out.push_back(v);
    return out;
  }
  const auto total = static_cast<Value>(count_);
  out.reserve(static_cast<std::size_t>(total));
  for (Value c = 0; c < total; ++c) out.push_back(c);
  return out;
}

void SecretSpace::draw(Rng& rng, Env& env) const {
  for (const auto& v : vars_)
    env[static_cast<std::size_t>(v.slot)] = rng.uniform(v.lo, v.hi);
}

// -------------------------------------------------------------- evaluation

namespace detail {

std::int64_t apply_bin(BinOp op, std::int64_t a, std::int64_t b, Pos pos) {
  switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    case BinOp::Div:
      if (b == 0)
        throw AnalysisError("division by zero at line " +
                            std::to_string(pos.line));
      return a / b;
    case BinOp::Mod:
      if (b == 0)
        throw AnalysisError("modulo by zero at line " +
                            std::to_string(pos.line));
      return a % b;
    case BinOp::Xor: return a ^ b;
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    case BinOp::And: return (a != 0 && b != 0) ? 1 : 0;
    case BinOp::Or: return (a != 0 || b != 0) ? 1 : 0;
  }
  return 0;
}

int runtime_array_slot(const Cfg& cfg, const std::string& array,
                       std::int64_t index, Pos pos) {
  auto it = cfg.program->arrays.find(array);
  if (it == cfg.program->arrays.end())
    throw AnalysisError("'" + array + "' is not an array");
  if (index < 0 || index >= static_cast<std::int64_t>(it->second.size()))
    throw AnalysisError("array index " + std::to_string(index) +
                        " out of bounds for '" + array + "' at line " +
                        std::to_string(pos.line));
  return cfg.slot_of.at(it->second[static_cast<std::size_t>(index)]);
}

bool expr_has_random(const Expr& e) {
  if (e.kind == Expr::Kind::Random || e.kind == Expr::Kind::RandomBit)
    return true;
  if (e.index && expr_has_random(*e.index)) return true;
  if (e.lhs && expr_has_random(*e.lhs)) return true;
  if (e.rhs && expr_has_random(*e.rhs)) return true;
  return false;
}

std::int64_t eval_concrete(const Cfg& cfg, const Expr& e, const Env& env,
                           Rng* rng) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      return e.value;
    case Expr::Kind::Var:
      return env[static_cast<std::size_t>(cfg.slot_of.at(e.name))];
    case Expr::Kind::ArrayRef: {
      const std::int64_t idx = eval_concrete(cfg, *e.index, env, rng);
      return env[static_cast<std::size_t>(
          runtime_array_slot(cfg, e.name, idx, e.pos))];
    }
    case Expr::Kind::Unary: {
      const std::int64_t v = eval_concrete(cfg, *e.lhs, env, rng);
      return e.un_op == UnOp::Neg ? -v : (v == 0 ? 1 : 0);
    }
    case Expr::Kind::Binary: {
      if (e.bin_op == BinOp::And) {
        if (eval_concrete(cfg, *e.lhs, env, rng) == 0) return 0;
        return eval_concrete(cfg, *e.rhs, env, rng) != 0 ? 1 : 0;
      }
      if (e.bin_op == BinOp::Or) {
        if (eval_concrete(cfg, *e.lhs, env, rng) != 0) return 1;
        return eval_concrete(cfg, *e.rhs, env, rng) != 0 ? 1 : 0;
      }
      return apply_bin(e.bin_op, eval_concrete(cfg, *e.lhs, env, rng),
                       eval_concrete(cfg, *e.rhs, env, rng), e.pos);
    }
    case Expr::Kind::Random: {
      if (!rng)
        throw AnalysisError("random in a deterministic context at line " +
                            std::to_string(e.pos.line));
      const std::int64_t lo = eval_concrete(cfg, *e.lhs, env, rng);
      const std::int64_t hi = eval_concrete(cfg, *e.rhs, env, rng);
      if (lo > hi)
        throw AnalysisError("empty random range at line " +
                            std::to_string(e.pos.line));
      return rng->uniform(lo, hi);
    }
    case Expr::Kind::RandomBit:
      if (!rng)
        throw AnalysisError("randombit in a deterministic context at line " +
                            std::to_string(e.pos.line));
      return rng->bernoulli(e.prob) ? 1 : 0;
  }
  return 0;
}

namespace {

Dist dist_point(std::int64_t v) { return {{Rational(1), v}}; }

void dist_merge(Dist& d) {
  std::sort(d.begin(), d.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  Dist out;
  for (auto& [p, v] : d) {
    if (!out.empty() && out.back().second == v)
      out.back().first += p;
    else
      out.emplace_back(std::move(p), v);
  }
  d = std::move(out);
}

Dist eval_dist_pair(const Cfg& cfg, const Expr& lhs, const Expr& rhs,
                    const Env& env,
                    const std::function<Dist(std::int64_t, std::int64_t)>& f) {
  Dist out;
  for (const auto& [pl, vl] : eval_dist(cfg, lhs, env)) {
    for (const auto& [pr, vr] : eval_dist(cfg, rhs, env)) {
      for (auto& [pk, vk] : f(vl, vr)) out.emplace_back(pl * pr * pk, vk);
    }
  }
  dist_merge(out);
  return out;
}

}  // namespace

Dist eval_dist(const Cfg& cfg, const Expr& e, const Env& env) {
  if (!expr_has_random(e))
    return dist_point(eval_concrete(cfg, e, env, nullptr));
  switch (e.kind) {
    case Expr::Kind::ArrayRef: {
      Dist out;
      for (const auto& [pi, vi] : eval_dist(cfg, *e.index, env)) {
        const int slot = runtime_array_slot(cfg, e.name, vi, e.pos);
        out.emplace_back(pi, env[static_cast<std::size_t>(slot)]);
      }
      dist_merge(out);
      return out;
    }
    case Expr::Kind::Unary: {
      Dist out;
      for (const auto& [p, v] : eval_dist(cfg, *e.lhs, env))
        out.emplace_back(p, e.un_op == UnOp::Neg ? -v : (v == 0 ? 1 : 0));
      dist_merge(out);
      return out;
    }
    case Expr::Kind::Binary: {
      if (e.bin_op == BinOp::And || e.bin_op == BinOp::Or) {
        Dist out;
        for (const auto& [pl, vl] : eval_dist(cfg, *e.lhs, env)) {
          const bool decided = e.bin_op == BinOp::And ? vl == 0 : vl != 0;
          if (decided) {
            out.emplace_back(pl, e.bin_op == BinOp::And ? 0 : 1);
          } else {
            for (const auto& [pr, vr] : eval_dist(cfg, *e.rhs, env))
              out.emplace_back(pl * pr, vr != 0 ? 1 : 0);
          }
        }
        dist_merge(out);
        return out;
      }
      return eval_dist_pair(cfg, *e.lhs, *e.rhs, env,
                            [&](std::int64_t a, std::int64_t b) {
                              return dist_point(apply_bin(e.bin_op, a, b, e.pos));
                            });
    }
    case Expr::Kind::Random:
      return eval_dist_pair(cfg, *e.lhs, *e.rhs, env,
                            [&](std::int64_t lo, std::int64_t hi) {
                              if (lo > hi)
                                throw AnalysisError(
                                    "empty random range at line " +
                                    std::to_string(e.pos.line));
                              Dist d;
                              const Rational p(1, hi - lo + 1);
                              for (std::int64_t v = lo; v <= hi; ++v)
                                d.emplace_back(p, v);
                              return d;
                            });
    case Expr::Kind::RandomBit: {
      Dist d;
      if (e.prob < 1) d.emplace_back(Rational(1) - e.prob, 0);
      if (e.prob > 0) d.emplace_back(e.prob, 1);
      return d;
    }
    default:
      return dist_point(eval_concrete(cfg, e, env, nullptr));
  }
}

Env initial_env_literals(const Cfg& cfg) {
  const auto& decls = cfg.program->decls;
  Env env(decls.size(), 0);
  for (std::size_t i = 0; i < decls.size(); ++i)
    if (decls[i].init.kind == Init::Kind::Literal)
      env[i] = decls[i].init.literal->value;
  return env;
}

}  // namespace detail

// ------------------------------------------------------------- enumeration

ObsTuple observe(const Cfg& cfg, const Env& env) {
  ObsTuple out;
  const auto& decls = cfg.program->decls;
  for (std::size_t i = 0; i < decls.size(); ++i)
    if (decls[i].cls == VarClass::Observable) out.push_back(env[i]);
  return out;
}

namespace {

struct Deadline {
  const EngineLimits& limits;
  int countdown = 1;
  void tick() {
    if (--countdown > 0) return;
    countdown = 4096;
    if (limits.deadline && std::chrono::steady_clock::now() > *limits.deadline)
      throw TimeoutExceeded("analysis wall-clock limit exceeded");
  }
};

void collect_uses(const Expr& e, std::vector<bool>& use, const Cfg& cfg) {
  if (e.kind == Expr::Kind::Var) {
    use[static_cast<std::size_t>(cfg.slot_of.at(e.name))] = true;
  } else if (e.kind == Expr::Kind::ArrayRef) {
    // runtime index: any element may be read
    auto it = cfg.program->arrays.find(e.name);
    if (it != cfg.program->arrays.end())
      for (const auto& elem : it->second)
        use[static_cast<std::size_t>(cfg.slot_of.at(elem))] = true;
  }
  if (e.index) collect_uses(*e.index, use, cfg);
  if (e.lhs) collect_uses(*e.lhs, use, cfg);
  if (e.rhs) collect_uses(*e.rhs, use, cfg);
}

// Per-node live-variable sets (live when arriving at the node). Dead slots
// are zeroed on insertion so states differing only in dead values merge.
// Secrets and observables stay live everywhere (outcome attribution); a
// simulate node keeps everything live (its states are resumed later).
std::vector<std::vector<bool>> live_in_sets(const Cfg& cfg) {
  const std::size_t nvars = cfg.slot_names.size();
  const std::size_t nnodes = cfg.nodes.size();
  std::vector<bool> always(nvars, false);
  const auto& decls = cfg.program->decls;
  for (std::size_t i = 0; i < nvars; ++i)
    if (decls[i].cls == VarClass::Secret ||
        decls[i].cls == VarClass::Observable)
      always[i] = true;

  std::vector<std::vector<bool>> use(nnodes, std::vector<bool>(nvars, false));
  std::vector<int> def(nnodes, -1);
  for (std::size_t n = 0; n < nnodes; ++n) {
    const CfgNode& node = cfg.nodes[n];
    switch (node.kind) {
      case CfgNode::Kind::Assign:
        collect_uses(*node.value, use[n], cfg);
        if (node.target_index) collect_uses(*node.target_index, use[n], cfg);
        if (node.target_slot >= 0) def[n] = node.target_slot;
        break;
      case CfgNode::Kind::Branch:
        collect_uses(*node.cond, use[n], cfg);
        break;
      case CfgNode::Kind::Return:
        break;  // covered by the always-live set
      case CfgNode::Kind::Simulate:
      case CfgNode::Kind::SimulateAbs:
        use[n].assign(nvars, true);
        break;
    }
  }

  std::vector<std::vector<bool>> live(use);
  for (std::size_t n = 0; n < nnodes; ++n)
    for (std::size_t v = 0; v < nvars; ++v)
      if (always[v]) live[n][v] = true;

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t n = nnodes; n-- > 0;) {
      const CfgNode& node = cfg.nodes[n];
      auto pull = [&](int succ) {
        if (succ < 0) return;
        const auto& in = live[static_cast<std::size_t>(succ)];
        for (std::size_t v = 0; v < nvars; ++v) {
          if (!in[v] || live[n][v]) continue;
          if (static_cast<int>(v) == def[n] && !use[n][v]) continue;
          live[n][v] = true;
          changed = true;
        }
      };
      pull(node.next);
      pull(node.next_else);
    }
  }
  return live;
}

}  // namespace

EnumerationResult enumerate_traces(const Cfg& cfg, const EngineLimits& limits) {
  using namespace detail;
  const auto& decls = cfg.program->decls;

  const std::vector<std::vector<bool>> live = live_in_sets(cfg);
  auto canonical = [&](Env env, int at) {
    const auto& mask = live[static_cast<std::size_t>(at)];
    for (std::size_t v = 0; v < env.size(); ++v)
      if (!mask[v]) env[v] = 0;
    return env;
  };

  // Initial states: every secret value crossed with every interval draw of
  // the non-secret variables, weighted by the uniform init probabilities.
  // Nodes are numbered so that every successor of a DAG node has a smaller
  // id; popping the largest position first therefore processes states in
  // topological order, and sibling states merge before being expanded.
  using Key = std::pair<int, Env>;
  std::map<Key, Rational, std::greater<Key>> frontier;
  {
    std::vector<std::pair<Rational, Env>> inits;
    inits.emplace_back(Rational(1), initial_env_literals(cfg));
    for (std::size_t i = 0; i < decls.size(); ++i) {
      const auto& d = decls[i];
      if (d.init.kind != Init::Kind::Interval) continue;
      const std::int64_t lo = d.init.lo->value, hi = d.init.hi->value;
      const Rational p(1, hi - lo + 1);
      std::vector<std::pair<Rational, Env>> next;
      next.reserve(inits.size() * static_cast<std::size_t>(hi - lo + 1));
      for (const auto& [pr, env] : inits) {
        for (std::int64_t v = lo; v <= hi; ++v) {
          Env e = env;
          e[i] = v;
          next.emplace_back(pr * p, std::move(e));
        }
      }
      inits = std::move(next);
      if (static_cast<std::int64_t>(inits.size()) > limits.trace_cap)
        throw TraceBudgetExceeded("initial state space exceeds the trace cap");
    }
    for (auto& [pr, env] : inits)
      frontier[{cfg.entry, canonical(std::move(env), cfg.entry)}] += pr;
  }

  const SecretSpace secrets = SecretSpace::from(cfg);
  std::map<std::pair<Value, ObsTuple>, Rational> outcome_mass;

  struct GroupKey {
    int node;
    Env nonsecret;
    bool operator<(const GroupKey& o) const {
      if (node != o.node) return node < o.node;
      return nonsecret < o.nonsecret;
    }
  };
  std::map<GroupKey, SavedComponent> groups;

  std::vector<bool> secret_slot(decls.size(), false);
  for (const auto& v : secrets.vars())
    secret_slot[static_cast<std::size_t>(v.slot)] = true;
  auto nonsecret_projection = [&](const Env& env) {
    Env out;
    out.reserve(env.size());
    for (std::size_t i = 0; i < env.size(); ++i)
      if (!secret_slot[i]) out.push_back(env[i]);
    return out;
  };

  Deadline deadline{limits};
  std::int64_t processed = 0;
  while (!frontier.empty()) {
    auto it = frontier.begin();
    const int pos = it->first.first;
    Env env = it->first.second;
    Rational prob = std::move(it->second);
    frontier.erase(it);

    if (++processed > limits.trace_cap)
      throw TraceBudgetExceeded(
          "precise exploration exceeded the trace cap (" +
          std::to_string(limits.trace_cap) + " states)");
    {
      const auto num_bits =
          boost::multiprecision::msb(boost::multiprecision::numerator(prob));
      const auto den_bits =
          boost::multiprecision::msb(boost::multiprecision::denominator(prob));
      if (den_bits > num_bits &&
          den_bits - num_bits >
              static_cast<unsigned>(limits.path_probability_floor_bits))
        throw TraceBudgetExceeded(
            "path probability underflow: probabilistic non-termination "
            "suspected in precise mode");
    }
    deadline.tick();

    const CfgNode& node = cfg.nodes[static_cast<std::size_t>(pos)];
    switch (node.kind) {
      case CfgNode::Kind::Assign: {
        if (node.target_slot >= 0 && !expr_has_random(*node.value)) {
          env[static_cast<std::size_t>(node.target_slot)] =
              eval_concrete(cfg, *node.value, env, nullptr);
          frontier[{node.next, canonical(std::move(env), node.next)}] += prob;
          break;
        }
        const Dist value = eval_dist(cfg, *node.value, env);
        if (node.target_slot >= 0) {
          for (const auto& [pv, v] : value) {
            Env e = env;
            e[static_cast<std::size_t>(node.target_slot)] = v;
            frontier[{node.next, canonical(std::move(e), node.next)}] +=
                prob * pv;
          }
        } else {
          const Dist idx = eval_dist(cfg, *node.target_index, env);
          for (const auto& [pi, vi] : idx) {
            const int slot =
                runtime_array_slot(cfg, *node.array_target, vi, node.pos);
            for (const auto& [pv, v] : value) {
              Env e = env;
              e[static_cast<std::size_t>(slot)] = v;
              frontier[{node.next, canonical(std::move(e), node.next)}] +=
                  prob * pi * pv;
            }
          }
        }
        break;
      }
      case CfgNode::Kind::Branch: {
        for (const auto& [pc, vc] : eval_dist(cfg, *node.cond, env)) {
          const int target = vc != 0 ? node.next : node.next_else;
          frontier[{target, canonical(env, target)}] += prob * pc;
        }
        break;
      }
      case CfgNode::Kind::Return:
        outcome_mass[{secrets.encode(env), observe(cfg, env)}] += prob;
        break;
      case CfgNode::Kind::Simulate:
      case CfgNode::Kind::SimulateAbs: {
        GroupKey key{node.next, nonsecret_projection(env)};
        SavedComponent& g = groups[key];
        g.method = node.kind == CfgNode::Kind::Simulate
                       ? AnalysisMethod::Sample
                       : AnalysisMethod::SampleAbs;
        g.resume_node = node.next;
        g.weight += prob;
        auto& slot = g.states[secrets.encode(env)];
        slot.first += prob;
        slot.second = std::move(env);
        break;
      }
    }
  }

  EnumerationResult out;
  for (auto& [key, mass] : outcome_mass) {
    out.exact_weight += mass;
    out.outcomes.push_back({key.first, key.second, std::move(mass)});
  }
  for (auto& [key, g] : groups) out.components.push_back(std::move(g));
  return out;
}

SavedComponent whole_program_component(const Cfg& cfg, AnalysisMethod method) {
  SavedComponent c;
  c.method = method;
  c.weight = 1;
  c.resume_node = cfg.entry;
  c.pre_init = true;
  return c;
}

}  // namespace leakscope
