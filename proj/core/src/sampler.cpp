#include <algorithm>

#include "engine_eval.hpp"
#include "leakscope/engine.hpp"
#include "leakscope/errors.hpp"

namespace leakscope {

ObsTuple execute_once(const Cfg& cfg, Env env, int start_node, Rng& rng,
                      const EngineLimits& limits) {
  using namespace detail;
  std::int64_t steps = 0;
  int pos = start_node;
  for (;;) {
    if (++steps > limits.step_cap)
      throw RuntimeDivergenceGuard("single execution exceeded the step cap (" +
                                   std::to_string(limits.step_cap) + ")");
    const CfgNode& node = cfg.nodes[static_cast<std::size_t>(pos)];
    switch (node.kind) {
      case CfgNode::Kind::Assign: {
        const std::int64_t v = eval_concrete(cfg, *node.value, env, &rng);
        int slot = node.target_slot;
        if (slot < 0)
          slot = runtime_array_slot(
              cfg, *node.array_target,
              eval_concrete(cfg, *node.target_index, env, &rng), node.pos);
        env[static_cast<std::size_t>(slot)] = v;
        pos = node.next;
        break;
      }
      case CfgNode::Kind::Branch:
        pos = eval_concrete(cfg, *node.cond, env, &rng) != 0 ? node.next
                                                             : node.next_else;
        break;
      case CfgNode::Kind::Return:
        return observe(cfg, env);
      case CfgNode::Kind::Simulate:
      case CfgNode::Kind::SimulateAbs:
        // Simulate markers are transparent once a run is under way.
        pos = node.next;
        break;
    }
  }
}

namespace {

// Initialization order is fixed (declaration order, non-secret draws first,
// then the secret assignment) so a seed reproduces runs exactly.
Env fresh_env(const Cfg& cfg, Rng& rng) {
  const auto& decls = cfg.program->decls;
  Env env(decls.size(), 0);
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const auto& d = decls[i];
    if (d.cls == VarClass::Secret) continue;
    if (d.init.kind == Init::Kind::Literal)
      env[i] = d.init.literal->value;
    else
      env[i] = rng.uniform(d.init.lo->value, d.init.hi->value);
  }
  return env;
}

Env component_env_for(const Cfg& cfg, const SecretSpace& secrets,
                      const SavedComponent& c, Value secret, Rng& rng) {
  if (c.pre_init) {
    Env env = fresh_env(cfg, rng);
    secrets.assign(secret, env);
    return env;
  }
  return c.states.at(secret).second;
}

// Cumulative table over the component's secret-conditional prior.
struct SecretPicker {
  std::vector<Value> values;
  std::vector<double> cumulative;

  explicit SecretPicker(const SavedComponent& c) {
    double acc = 0.0;
    const double total = to_double(c.weight);
    for (const auto& [x, entry] : c.states) {
      acc += to_double(entry.first) / total;
      values.push_back(x);
      cumulative.push_back(acc);
    }
    if (!cumulative.empty()) cumulative.back() = 1.0;
  }

  Value pick(Rng& rng) const {
    const double u = rng.u01();
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t i = std::min(
        values.size() - 1, static_cast<std::size_t>(it - cumulative.begin()));
    return values[i];
  }
};

}  // namespace

std::map<std::pair<Value, ObsTuple>, Count> sample_component(
    const Cfg& cfg, const SecretSpace& secrets, const SavedComponent& c,
    Count n, Rng& rng, const EngineLimits& limits) {
  std::map<std::pair<Value, ObsTuple>, Count> counts;
  if (c.pre_init) {
    for (Count k = 0; k < n; ++k) {
      Env env = fresh_env(cfg, rng);
      secrets.draw(rng, env);
      const Value x = secrets.encode(env);
      ObsTuple y = execute_once(cfg, std::move(env), c.resume_node, rng, limits);
      ++counts[{x, std::move(y)}];
    }
    return counts;
  }
  const SecretPicker picker(c);
  for (Count k = 0; k < n; ++k) {
    const Value x = picker.pick(rng);
    Env env = c.states.at(x).second;
    ObsTuple y = execute_once(cfg, std::move(env), c.resume_node, rng, limits);
    ++counts[{x, std::move(y)}];
  }
  return counts;
}

std::map<ObsTuple, Count> sample_component_abs(const Cfg& cfg,
                                               const SecretSpace& secrets,
                                               const SavedComponent& c, Count n,
                                               Rng& rng,
                                               const EngineLimits& limits) {
  std::map<ObsTuple, Count> counts;
  // Representative input: the component's minimum secret value.
  Value rep;
  if (c.pre_init) {
    Env env(cfg.program->decls.size(), 0);
    for (const auto& v : secrets.vars())
      env[static_cast<std::size_t>(v.slot)] = v.lo;
    rep = secrets.encode(env);
  } else {
    rep = c.states.begin()->first;
  }
  for (Count k = 0; k < n; ++k) {
    Env env = component_env_for(cfg, secrets, c, rep, rng);
    ObsTuple y = execute_once(cfg, std::move(env), c.resume_node, rng, limits);
    ++counts[std::move(y)];
  }
  return counts;
}

std::map<std::pair<Value, ObsTuple>, Count> sample_per_secret(
    const Cfg& cfg, const SecretSpace& secrets, const SavedComponent& c,
    const std::map<Value, Count>& runs, Rng& rng, const EngineLimits& limits) {
  std::map<std::pair<Value, ObsTuple>, Count> counts;
  for (const auto& [x, n] : runs) {
    for (Count k = 0; k < n; ++k) {
      Env env = component_env_for(cfg, secrets, c, x, rng);
      ObsTuple y = execute_once(cfg, std::move(env), c.resume_node, rng, limits);
      ++counts[{x, std::move(y)}];
    }
  }
  return counts;
}

}  // namespace leakscope
