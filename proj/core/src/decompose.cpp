#include "leakscope/decompose.hpp"

#include <set>
#include <sstream>

namespace leakscope {

namespace {

bool expr_probabilistic(const Expr& e) {
  if (e.kind == Expr::Kind::Random || e.kind == Expr::Kind::RandomBit)
    return true;
  if (e.index && expr_probabilistic(*e.index)) return true;
  if (e.lhs && expr_probabilistic(*e.lhs)) return true;
  if (e.rhs && expr_probabilistic(*e.rhs)) return true;
  return false;
}

bool stmt_probabilistic(const Stmt& s) {
  if (s.value && expr_probabilistic(*s.value)) return true;
  if (s.index && expr_probabilistic(*s.index)) return true;
  if (s.cond && expr_probabilistic(*s.cond)) return true;
  if (block_probabilistic(s.then_block)) return true;
  for (const auto& [c, b] : s.elifs)
    if (expr_probabilistic(*c) || block_probabilistic(b)) return true;
  if (block_probabilistic(s.else_block)) return true;
  if (block_probabilistic(s.body)) return true;
  return false;
}

bool stmt_contains_while(const Stmt& s) {
  if (s.kind == Stmt::Kind::While) return true;
  for (const auto& inner : s.then_block)
    if (stmt_contains_while(*inner)) return true;
  for (const auto& [c, b] : s.elifs)
    for (const auto& inner : b)
      if (stmt_contains_while(*inner)) return true;
  for (const auto& inner : s.else_block)
    if (stmt_contains_while(*inner)) return true;
  for (const auto& inner : s.body)
    if (stmt_contains_while(*inner)) return true;
  return false;
}

bool stmt_has_simulate(const Stmt& s) {
  if (s.kind == Stmt::Kind::Simulate || s.kind == Stmt::Kind::SimulateAbs)
    return true;
  for (const auto& inner : s.then_block)
    if (stmt_has_simulate(*inner)) return true;
  for (const auto& [c, b] : s.elifs)
    for (const auto& inner : b)
      if (stmt_has_simulate(*inner)) return true;
  for (const auto& inner : s.else_block)
    if (stmt_has_simulate(*inner)) return true;
  for (const auto& inner : s.body)
    if (stmt_has_simulate(*inner)) return true;
  return false;
}

// ------------------------------------------------------------------- taint

struct TaintPass {
  const PreparedProgram& p;
  std::set<std::string> tainted;
  std::set<std::string> observables;
  bool changed = false;

  bool expr_tainted(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::Var:
        return tainted.count(e.name) != 0;
      case Expr::Kind::ArrayRef: {
        if (e.index && expr_tainted(*e.index)) return true;
        auto it = p.arrays.find(e.name);
        if (it == p.arrays.end()) return true;  // unknown: assume the worst
        for (const auto& elem : it->second)
          if (tainted.count(elem)) return true;
        return false;
      }
      default:
        if (e.index && expr_tainted(*e.index)) return true;
        if (e.lhs && expr_tainted(*e.lhs)) return true;
        if (e.rhs && expr_tainted(*e.rhs)) return true;
        return false;
    }
  }

  void taint(const std::string& name) {
    if (tainted.insert(name).second) changed = true;
  }

  void assign(const Stmt& s, bool control) {
    const bool value_taint = control || expr_tainted(*s.value) ||
                             (s.index && expr_tainted(*s.index));
    if (!value_taint) return;
    if (s.index) {
      auto it = p.arrays.find(s.target);
      if (it != p.arrays.end())
        for (const auto& elem : it->second) taint(elem);
      else
        taint(s.target);
    } else {
      taint(s.target);
    }
  }

  void block(const Block& b, bool control) {
    for (const auto& s : b) stmt(*s, control);
  }

  void stmt(const Stmt& s, bool control) {
    switch (s.kind) {
      case Stmt::Kind::Assign:
        assign(s, control);
        return;
      case Stmt::Kind::If: {
        bool c = control || expr_tainted(*s.cond);
        block(s.then_block, c);
        for (const auto& [cond, b] : s.elifs) {
          c = c || expr_tainted(*cond);
          block(b, c);
        }
        block(s.else_block, c);
        return;
      }
      case Stmt::Kind::While:
        block(s.body, control || expr_tainted(*s.cond));
        return;
      default:
        return;
    }
  }
};

}  // namespace

bool block_probabilistic(const Block& b) {
  for (const auto& s : b)
    if (stmt_probabilistic(*s)) return true;
  return false;
}

bool decls_probabilistic(const std::vector<VarDecl>& decls) {
  for (const auto& d : decls)
    if (d.cls != VarClass::Secret && d.init.kind == Init::Kind::Interval)
      return true;
  return false;
}

bool check_input_independent(const PreparedProgram& p,
                             std::size_t from_statement) {
  TaintPass pass{p, {}, {}};
  for (const auto& d : p.decls) {
    if (d.cls == VarClass::Secret) pass.tainted.insert(d.name);
    if (d.cls == VarClass::Observable) pass.observables.insert(d.name);
  }
  // Fixpoint over the suffix: while-loop bodies can feed taint back.
  do {
    pass.changed = false;
    for (std::size_t k = from_statement; k < p.body.size(); ++k)
      pass.stmt(*p.body[k], false);
  } while (pass.changed);
  for (const auto& obs : pass.observables)
    if (pass.tainted.count(obs)) return false;
  return true;
}

Decomposition decompose(const PreparedProgram& p, const Cfg& cfg,
                        const RangeAnnotation& ranges) {
  Decomposition out;
  out.program = preprocess(p);  // deep copy via the idempotent path

  bool has_explicit = false;
  for (const auto& s : p.body)
    if (stmt_has_simulate(*s)) has_explicit = true;
  if (has_explicit) {
    out.plan.honored_existing = true;
    out.plan.has_cut = true;
    out.plan.rationale = "explicit simulate statements in the source";
    return out;
  }

  const auto& exit_ranges = ranges.at_exit(cfg);
  const double nz = exit_ranges.reachable ? exit_ranges.tot_int : 1.0;
  const double ny = exit_ranges.reachable ? exit_ranges.tot_obs : 1.0;
  out.plan.est_internal_values = nz;
  out.plan.est_observable_values = ny;

  bool prefix_has_while = false;
  std::size_t chosen = p.body.size();
  for (std::size_t k = 1; k <= p.body.size(); ++k) {
    const Stmt& prev = *p.body[k - 1];
    if (stmt_contains_while(prev)) prefix_has_while = true;
    if (prefix_has_while) break;
    const bool candidate =
        prev.kind == Stmt::Kind::If ||
        (prev.kind == Stmt::Kind::Assign && stmt_probabilistic(prev));
    if (!candidate) continue;
    bool suffix_prob = false;
    for (std::size_t j = k; j < p.body.size(); ++j)
      if (stmt_probabilistic(*p.body[j])) suffix_prob = true;
    if (!suffix_prob) continue;
    const auto& at_cut = ranges.at(cfg.top_level_entry[k]);
    if (!at_cut.reachable) continue;
    const double nx = at_cut.tot_secret;
    if (nz <= nx) continue;  // precise analysis is the cheaper side
    chosen = k;
    out.plan.est_secret_values = nx;
    break;
  }

  const bool probabilistic =
      block_probabilistic(p.body) || decls_probabilistic(p.decls);

  if (chosen == p.body.size()) {
    // No interior boundary qualifies. Sample the whole program when precise
    // enumeration is hopeless (a while loop) or dominated by internal
    // randomness; otherwise analyze everything precisely.
    bool any_while = false;
    for (const auto& s : p.body)
      if (stmt_contains_while(*s)) any_while = true;
    const double nx0 =
        ranges.at(cfg.entry).reachable ? ranges.at(cfg.entry).tot_secret : 1.0;
    if (probabilistic && (any_while || nz > nx0)) {
      chosen = 0;
      out.plan.est_secret_values = nx0;
      out.plan.rationale =
          any_while ? "unbounded loop forces whole-program sampling"
                    : "internal randomness dominates the secret range";
    } else {
      out.plan.has_cut = false;
      out.plan.method = AnalysisMethod::Precise;
      out.plan.rationale = probabilistic
                               ? "internal randomness within the secret range"
                               : "deterministic program";
      return out;
    }
  } else {
    std::ostringstream note;
    note << "cut after statement " << chosen << ": internal-value estimate "
         << nz << " exceeds secret-value estimate "
         << out.plan.est_secret_values;
    out.plan.rationale = note.str();
  }

  out.plan.has_cut = true;
  out.plan.cut_statement = chosen;
  const bool independent = check_input_independent(p, chosen);
  out.plan.method =
      independent ? AnalysisMethod::SampleAbs : AnalysisMethod::Sample;

  auto sim = std::make_unique<Stmt>();
  sim->kind = independent ? Stmt::Kind::SimulateAbs : Stmt::Kind::Simulate;
  if (chosen < p.body.size()) sim->pos = p.body[chosen]->pos;
  out.program.body.insert(
      out.program.body.begin() + static_cast<std::ptrdiff_t>(chosen),
      std::move(sim));
  return out;
}

}  // namespace leakscope
