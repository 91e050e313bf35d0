#include "leakscope/preprocess.hpp"

#include <set>

#include "leakscope/errors.hpp"

namespace leakscope {

namespace {

using ConstEnv = std::map<std::string, std::int64_t>;

[[noreturn]] void fail_at(const std::string& file, Pos pos, const std::string& msg) {
  throw ParseError(file + ":" + std::to_string(pos.line) + ":" +
                   std::to_string(pos.col) + ": " + msg);
}

struct Folder {
  const std::string& file;
  const ConstEnv& consts;
  const ConstEnv* loop_vars = nullptr;

  // Substitutes constants and loop variables, folds constant subexpressions.
  ExprPtr fold(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return e.clone();
      case Expr::Kind::Var: {
        if (loop_vars) {
          auto it = loop_vars->find(e.name);
          if (it != loop_vars->end()) return make_int(it->second, e.pos);
        }
        auto it = consts.find(e.name);
        if (it != consts.end()) return make_int(it->second, e.pos);
        return e.clone();
      }
      case Expr::Kind::ArrayRef: {
        auto out = e.clone();
        out->index = fold(*e.index);
        return out;
      }
      case Expr::Kind::Unary: {
        ExprPtr v = fold(*e.lhs);
        if (v->kind == Expr::Kind::IntLit) {
          const std::int64_t x = v->value;
          return make_int(e.un_op == UnOp::Neg ? -x : (x == 0 ? 1 : 0), e.pos);
        }
        auto out = std::make_unique<Expr>();
        out->kind = Expr::Kind::Unary;
        out->un_op = e.un_op;
        out->pos = e.pos;
        out->lhs = std::move(v);
        return out;
      }
      case Expr::Kind::Binary: {
        ExprPtr l = fold(*e.lhs);
        ExprPtr r = fold(*e.rhs);
        if (l->kind == Expr::Kind::IntLit && r->kind == Expr::Kind::IntLit)
          return make_int(eval_bin(e.bin_op, l->value, r->value, e.pos), e.pos);
        auto out = std::make_unique<Expr>();
        out->kind = Expr::Kind::Binary;
        out->bin_op = e.bin_op;
        out->pos = e.pos;
        out->lhs = std::move(l);
        out->rhs = std::move(r);
        return out;
      }
      case Expr::Kind::Random: {
        auto out = std::make_unique<Expr>();
        out->kind = Expr::Kind::Random;
        out->pos = e.pos;
        out->lhs = fold(*e.lhs);
        out->rhs = fold(*e.rhs);
        return out;
      }
      case Expr::Kind::RandomBit:
        return e.clone();
    }
    return e.clone();
  }

  std::int64_t eval_bin(BinOp op, std::int64_t a, std::int64_t b, Pos pos) const {
    switch (op) {
      case BinOp::Add: return a + b;
      case BinOp::Sub: return a - b;
      case BinOp::Mul: return a * b;
      case BinOp::Div:
        if (b == 0) fail_at(file, pos, "division by zero in constant expression");
        return a / b;
      case BinOp::Mod:
        if (b == 0) fail_at(file, pos, "modulo by zero in constant expression");
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

  std::int64_t require_const(const Expr& e, const char* what) const {
    ExprPtr v = fold(e);
    if (v->kind != Expr::Kind::IntLit)
      fail_at(file, e.pos, std::string(what) + " must be a constant expression");
    return v->value;
  }
};

class Preprocessor {
 public:
  Preprocessor(const Program& p, std::string file)
      : src_(p), file_(std::move(file)) {}

  PreparedProgram run() {
    collect_consts();
    expand_declarations();
    ConstEnv loop_vars;
    out_.body = transform_block(src_.body, loop_vars);
    validate_identifiers();
    return std::move(out_);
  }

 private:
  void collect_consts() {
    for (const auto& d : src_.decls) {
      if (d.cls != VarClass::Const) continue;
      if (d.init.kind != Init::Kind::Literal)
        fail_at(file_, d.pos, "const initializers must be literals");
      Folder f{file_, consts_};
      ExprPtr v = f.fold(*d.init.literal);
      if (v->kind != Expr::Kind::IntLit)
        throw UnboundConst(file_ + ":" + std::to_string(d.pos.line) + ":" +
                           std::to_string(d.pos.col) + ": const '" + d.name +
                           "' does not fold to a value");
      consts_[d.name] = v->value;
    }
  }

  VarDecl element_decl(const VarDecl& d, const std::string& name) {
    VarDecl e;
    e.name = name;
    e.cls = d.cls;
    e.width = d.width;
    e.pos = d.pos;
    e.init = normalize_init(d);
    return e;
  }

  Init normalize_init(const VarDecl& d) {
    Folder f{file_, consts_};
    Init init;
    switch (d.init.kind) {
      case Init::Kind::None: {
        if (d.cls == VarClass::Secret) {
          // Uninitialized secrets default to the full width range.
          init.kind = Init::Kind::Interval;
          init.lo = make_int(0, d.pos);
          init.hi = make_int((std::int64_t{1} << d.width) - 1, d.pos);
        } else {
          init.kind = Init::Kind::Literal;
          init.literal = make_int(0, d.pos);
        }
        return init;
      }
      case Init::Kind::Literal:
        init.kind = Init::Kind::Literal;
        init.literal = make_int(f.require_const(*d.init.literal, "initializer"),
                                d.pos);
        return init;
      case Init::Kind::Interval: {
        const std::int64_t lo = f.require_const(*d.init.lo, "interval bound");
        const std::int64_t hi = f.require_const(*d.init.hi, "interval bound");
        if (lo > hi) fail_at(file_, d.pos, "empty interval initializer");
        if (lo == hi) {
          init.kind = Init::Kind::Literal;
          init.literal = make_int(lo, d.pos);
        } else {
          init.kind = Init::Kind::Interval;
          init.lo = make_int(lo, d.pos);
          init.hi = make_int(hi, d.pos);
        }
        return init;
      }
    }
    return init;
  }

  void expand_declarations() {
    Folder f{file_, consts_};
    for (const auto& d : src_.decls) {
      if (d.cls == VarClass::Const) continue;
      if (declared_.count(d.name))
        fail_at(file_, d.pos, "duplicate declaration of '" + d.name + "'");
      declared_.insert(d.name);
      if (d.array_length) {
        const std::int64_t len = f.require_const(**d.array_length, "array length");
        if (len < 1) fail_at(file_, d.pos, "array length must be positive");
        auto& elems = out_.arrays[d.name];
        for (std::int64_t i = 0; i < len; ++i) {
          std::string elem = d.name + "_" + std::to_string(i);
          if (declared_.count(elem))
            fail_at(file_, d.pos, "array expansion collides with '" + elem + "'");
          declared_.insert(elem);
          elems.push_back(elem);
          out_.decls.push_back(element_decl(d, elem));
        }
      } else {
        out_.decls.push_back(element_decl(d, d.name));
      }
    }
  }

  Block transform_block(const Block& b, ConstEnv& loop_vars) {
    Block out;
    for (const auto& s : b) transform_stmt(*s, loop_vars, out);
    return out;
  }

  void transform_stmt(const Stmt& s, ConstEnv& loop_vars, Block& out) {
    Folder f{file_, consts_, &loop_vars};
    switch (s.kind) {
      case Stmt::Kind::Assign: {
        auto n = std::make_unique<Stmt>();
        n->kind = Stmt::Kind::Assign;
        n->pos = s.pos;
        n->target = s.target;
        if (loop_vars.count(s.target))
          fail_at(file_, s.pos, "cannot assign to loop variable '" + s.target + "'");
        if (s.index) n->index = f.fold(*s.index);
        n->value = f.fold(*s.value);
        resolve_array(*n);
        out.push_back(std::move(n));
        return;
      }
      case Stmt::Kind::If: {
        auto n = std::make_unique<Stmt>();
        n->kind = Stmt::Kind::If;
        n->pos = s.pos;
        n->cond = fold_and_resolve(f, *s.cond);
        n->then_block = transform_block(s.then_block, loop_vars);
        for (const auto& [c, blk] : s.elifs)
          n->elifs.emplace_back(fold_and_resolve(f, *c),
                                transform_block(blk, loop_vars));
        n->else_block = transform_block(s.else_block, loop_vars);
        out.push_back(std::move(n));
        return;
      }
      case Stmt::Kind::While: {
        auto n = std::make_unique<Stmt>();
        n->kind = Stmt::Kind::While;
        n->pos = s.pos;
        n->cond = fold_and_resolve(f, *s.cond);
        n->body = transform_block(s.body, loop_vars);
        out.push_back(std::move(n));
        return;
      }
      case Stmt::Kind::For: {
        ExprPtr lo = f.fold(*s.lo);
        ExprPtr hi = f.fold(*s.hi);
        if (lo->kind != Expr::Kind::IntLit || hi->kind != Expr::Kind::IntLit)
          throw NonConstantLoopBound(
              file_ + ":" + std::to_string(s.pos.line) + ":" +
              std::to_string(s.pos.col) +
              ": for-loop bounds must be constant (use while for dynamic loops)");
        for (std::int64_t i = lo->value; i <= hi->value; ++i) {
          loop_vars[s.var] = i;
          for (const auto& inner : s.body) transform_stmt(*inner, loop_vars, out);
        }
        loop_vars.erase(s.var);
        return;
      }
      case Stmt::Kind::ForEach: {
        auto arr = src_arrays_lookup(s.target);
        if (!arr)
          fail_at(file_, s.pos, "'" + s.target + "' is not an array");
        for (const auto& elem : *arr) {
          for (const auto& inner : s.body) {
            StmtPtr renamed = rename_var(*inner, s.var, elem);
            transform_stmt(*renamed, loop_vars, out);
          }
        }
        return;
      }
      case Stmt::Kind::Return:
      case Stmt::Kind::Simulate:
      case Stmt::Kind::SimulateAbs: {
        out.push_back(s.clone());
        return;
      }
    }
  }

  const std::vector<std::string>* src_arrays_lookup(const std::string& name) {
    auto it = out_.arrays.find(name);
    return it == out_.arrays.end() ? nullptr : &it->second;
  }

  ExprPtr fold_and_resolve(const Folder& f, const Expr& e) {
    ExprPtr v = f.fold(e);
    resolve_array_expr(v);
    return v;
  }

  // Rewrites array accesses with constant indices into element variables.
  void resolve_array_expr(ExprPtr& e) {
    if (!e) return;
    if (e->kind == Expr::Kind::ArrayRef) {
      resolve_array_expr(e->index);
      auto arr = src_arrays_lookup(e->name);
      if (!arr)
        fail_at(file_, e->pos, "'" + e->name + "' is not an array");
      if (e->index->kind == Expr::Kind::IntLit) {
        const std::int64_t i = e->index->value;
        if (i < 0 || i >= static_cast<std::int64_t>(arr->size()))
          fail_at(file_, e->pos, "array index " + std::to_string(i) +
                                     " out of bounds for '" + e->name + "'");
        e = make_var((*arr)[static_cast<std::size_t>(i)], e->pos);
      }
      return;
    }
    resolve_array_expr(e->index);
    resolve_array_expr(e->lhs);
    resolve_array_expr(e->rhs);
  }

  void resolve_array(Stmt& assign) {
    resolve_array_expr(assign.value);
    if (!assign.index) return;
    resolve_array_expr(assign.index);
    auto arr = src_arrays_lookup(assign.target);
    if (!arr)
      fail_at(file_, assign.pos, "'" + assign.target + "' is not an array");
    if (assign.index->kind == Expr::Kind::IntLit) {
      const std::int64_t i = assign.index->value;
      if (i < 0 || i >= static_cast<std::int64_t>(arr->size()))
        fail_at(file_, assign.pos, "array index " + std::to_string(i) +
                                       " out of bounds for '" + assign.target + "'");
      assign.target = (*arr)[static_cast<std::size_t>(i)];
      assign.index.reset();
    }
  }

  static ExprPtr rename_in_expr(const Expr& e, const std::string& from,
                                const std::string& to) {
    ExprPtr out = e.clone();
    rename_expr_inplace(*out, from, to);
    return out;
  }

  static void rename_expr_inplace(Expr& e, const std::string& from,
                                  const std::string& to) {
    if ((e.kind == Expr::Kind::Var || e.kind == Expr::Kind::ArrayRef) &&
        e.name == from)
      e.name = to;
    if (e.index) rename_expr_inplace(*e.index, from, to);
    if (e.lhs) rename_expr_inplace(*e.lhs, from, to);
    if (e.rhs) rename_expr_inplace(*e.rhs, from, to);
  }

  static StmtPtr rename_var(const Stmt& s, const std::string& from,
                            const std::string& to) {
    StmtPtr out = s.clone();
    rename_stmt_inplace(*out, from, to);
    return out;
  }

  static void rename_stmt_inplace(Stmt& s, const std::string& from,
                                  const std::string& to) {
    if (s.target == from) s.target = to;
    if (s.index) rename_expr_inplace(*s.index, from, to);
    if (s.value) rename_expr_inplace(*s.value, from, to);
    if (s.cond) rename_expr_inplace(*s.cond, from, to);
    if (s.lo) rename_expr_inplace(*s.lo, from, to);
    if (s.hi) rename_expr_inplace(*s.hi, from, to);
    for (auto& inner : s.then_block) rename_stmt_inplace(*inner, from, to);
    for (auto& [c, blk] : s.elifs) {
      rename_expr_inplace(*c, from, to);
      for (auto& inner : blk) rename_stmt_inplace(*inner, from, to);
    }
    for (auto& inner : s.else_block) rename_stmt_inplace(*inner, from, to);
    for (auto& inner : s.body) rename_stmt_inplace(*inner, from, to);
  }

  void validate_identifiers() const {
    std::set<std::string> names;
    for (const auto& d : out_.decls) names.insert(d.name);
    for (const auto& kv : out_.arrays) names.insert(kv.first);
    for (const auto& s : out_.body) validate_stmt(*s, names);
  }

  void validate_stmt(const Stmt& s, const std::set<std::string>& names) const {
    if (!s.target.empty() && s.kind == Stmt::Kind::Assign &&
        !names.count(s.target))
      fail_at(file_, s.pos, "undeclared identifier '" + s.target + "'");
    auto check_expr = [&](const Expr& e, auto&& self) -> void {
      if ((e.kind == Expr::Kind::Var || e.kind == Expr::Kind::ArrayRef) &&
          !names.count(e.name))
        fail_at(file_, e.pos, "undeclared identifier '" + e.name + "'");
      if (e.index) self(*e.index, self);
      if (e.lhs) self(*e.lhs, self);
      if (e.rhs) self(*e.rhs, self);
    };
    if (s.index) check_expr(*s.index, check_expr);
    if (s.value) check_expr(*s.value, check_expr);
    if (s.cond) check_expr(*s.cond, check_expr);
    for (const auto& inner : s.then_block) validate_stmt(*inner, names);
    for (const auto& [c, blk] : s.elifs) {
      check_expr(*c, check_expr);
      for (const auto& inner : blk) validate_stmt(*inner, names);
    }
    for (const auto& inner : s.else_block) validate_stmt(*inner, names);
    for (const auto& inner : s.body) validate_stmt(*inner, names);
  }

  const Program& src_;
  std::string file_;
  ConstEnv consts_;
  std::set<std::string> declared_;
  PreparedProgram out_;
};

}  // namespace

namespace {

void collect_live_arrays(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::ArrayRef) out.insert(e.name);
  if (e.index) collect_live_arrays(*e.index, out);
  if (e.lhs) collect_live_arrays(*e.lhs, out);
  if (e.rhs) collect_live_arrays(*e.rhs, out);
}

void collect_live_arrays(const Stmt& s, std::set<std::string>& out) {
  if (s.kind == Stmt::Kind::Assign && s.index) out.insert(s.target);
  if (s.index) collect_live_arrays(*s.index, out);
  if (s.value) collect_live_arrays(*s.value, out);
  if (s.cond) collect_live_arrays(*s.cond, out);
  for (const auto& inner : s.then_block) collect_live_arrays(*inner, out);
  for (const auto& [c, blk] : s.elifs) {
    collect_live_arrays(*c, out);
    for (const auto& inner : blk) collect_live_arrays(*inner, out);
  }
  for (const auto& inner : s.else_block) collect_live_arrays(*inner, out);
  for (const auto& inner : s.body) collect_live_arrays(*inner, out);
}

}  // namespace

Program PreparedProgram::to_program() const {
  // Arrays still accessed with runtime indices must be printed as array
  // declarations (their elements are regenerated on the next preprocessing
  // pass); fully resolved arrays stay expanded.
  std::set<std::string> live;
  for (const auto& s : body) collect_live_arrays(*s, live);
  std::map<std::string, std::string> element_to_array;
  for (const auto& [arr, elems] : arrays)
    if (live.count(arr))
      for (const auto& e : elems) element_to_array[e] = arr;

  Program p;
  std::set<std::string> emitted_arrays;
  for (const auto& d : decls) {
    VarDecl c;
    c.cls = d.cls;
    c.width = d.width;
    c.pos = d.pos;
    c.init.kind = d.init.kind;
    if (d.init.literal) c.init.literal = d.init.literal->clone();
    if (d.init.lo) c.init.lo = d.init.lo->clone();
    if (d.init.hi) c.init.hi = d.init.hi->clone();
    auto it = element_to_array.find(d.name);
    if (it == element_to_array.end()) {
      c.name = d.name;
    } else {
      if (!emitted_arrays.insert(it->second).second) continue;
      c.name = it->second;
      c.array_length = make_int(
          static_cast<std::int64_t>(arrays.at(it->second).size()), d.pos);
    }
    p.decls.push_back(std::move(c));
  }
  p.body = clone_block(body);
  return p;
}

PreparedProgram preprocess(const Program& p, const std::string& file) {
  return Preprocessor(p, file).run();
}

PreparedProgram preprocess(const PreparedProgram& p, const std::string& file) {
  // to_program() re-emits array declarations for arrays that still carry
  // runtime-indexed accesses, so a plain re-preprocessing is equivalent.
  return Preprocessor(p.to_program(), file).run();
}

}  // namespace leakscope
