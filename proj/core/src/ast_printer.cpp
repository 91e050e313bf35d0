#include <sstream>

#include "leakscope/ast.hpp"

namespace leakscope {

ExprPtr make_int(std::int64_t v, Pos pos) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::IntLit;
  e->value = v;
  e->pos = pos;
  return e;
}

ExprPtr make_var(std::string name, Pos pos) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = std::move(name);
  e->pos = pos;
  return e;
}

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->pos = pos;
  e->value = value;
  e->name = name;
  e->un_op = un_op;
  e->bin_op = bin_op;
  e->prob = prob;
  if (index) e->index = index->clone();
  if (lhs) e->lhs = lhs->clone();
  if (rhs) e->rhs = rhs->clone();
  return e;
}

Block clone_block(const Block& b) {
  Block out;
  out.reserve(b.size());
  for (const auto& s : b) out.push_back(s->clone());
  return out;
}

StmtPtr Stmt::clone() const {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->pos = pos;
  s->target = target;
  if (index) s->index = index->clone();
  if (value) s->value = value->clone();
  if (cond) s->cond = cond->clone();
  s->then_block = clone_block(then_block);
  for (const auto& [c, b] : elifs)
    s->elifs.emplace_back(c->clone(), clone_block(b));
  s->else_block = clone_block(else_block);
  s->var = var;
  if (lo) s->lo = lo->clone();
  if (hi) s->hi = hi->clone();
  s->body = clone_block(body);
  return s;
}

namespace {

int precedence(const Expr& e) {
  if (e.kind != Expr::Kind::Binary) return 100;
  switch (e.bin_op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Xor: return 3;
    case BinOp::Eq:
    case BinOp::Ne: return 4;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 5;
    case BinOp::Add:
    case BinOp::Sub: return 6;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Mod: return 7;
  }
  return 100;
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Xor: return "xor";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

std::string prob_text(const Rational& r) {
  // Exact decimal when the denominator is a power of 10 times a power of 2/5,
  // otherwise num/den is not expressible; print as a long decimal fraction.
  std::ostringstream os;
  os << r;
  std::string s = os.str();
  auto slash = s.find('/');
  if (slash == std::string::npos) return s;
  // render as decimal with enough digits to round-trip exactly for the
  // probabilities the parser accepts (which come from decimal literals)
  const double v = to_double(Rational(r));
  std::ostringstream od;
  od.precision(17);
  od << v;
  return od.str();
}

void print_expr_into(const Expr& e, std::ostream& os) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      os << e.value;
      return;
    case Expr::Kind::Var:
      os << e.name;
      return;
    case Expr::Kind::ArrayRef:
      os << e.name << '[';
      print_expr_into(*e.index, os);
      os << ']';
      return;
    case Expr::Kind::Unary:
      os << (e.un_op == UnOp::Neg ? '-' : '!');
      if (precedence(*e.lhs) < 100) {
        os << '(';
        print_expr_into(*e.lhs, os);
        os << ')';
      } else {
        print_expr_into(*e.lhs, os);
      }
      return;
    case Expr::Kind::Binary: {
      const int p = precedence(e);
      auto side = [&](const Expr& c, bool tighten) {
        if (precedence(c) < p + (tighten ? 1 : 0)) {
          os << '(';
          print_expr_into(c, os);
          os << ')';
        } else {
          print_expr_into(c, os);
        }
      };
      side(*e.lhs, false);
      os << ' ' << op_text(e.bin_op) << ' ';
      side(*e.rhs, true);
      return;
    }
    case Expr::Kind::Random:
      os << "random(";
      print_expr_into(*e.lhs, os);
      os << ", ";
      print_expr_into(*e.rhs, os);
      os << ')';
      return;
    case Expr::Kind::RandomBit:
      os << "randombit(" << prob_text(e.prob) << ')';
      return;
  }
}

void print_block(const Block& b, std::ostream& os, int indent);

void print_stmt(const Stmt& s, std::ostream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::Assign:
      os << pad << s.target;
      if (s.index) {
        os << '[';
        print_expr_into(*s.index, os);
        os << ']';
      }
      os << " := ";
      print_expr_into(*s.value, os);
      os << ";\n";
      return;
    case Stmt::Kind::If: {
      os << pad << "if ";
      print_expr_into(*s.cond, os);
      os << " {\n";
      print_block(s.then_block, os, indent + 1);
      os << pad << "}";
      for (const auto& [c, b] : s.elifs) {
        os << " else if ";
        print_expr_into(*c, os);
        os << " {\n";
        print_block(b, os, indent + 1);
        os << pad << "}";
      }
      if (!s.else_block.empty()) {
        os << " else {\n";
        print_block(s.else_block, os, indent + 1);
        os << pad << "}";
      }
      os << "\n";
      return;
    }
    case Stmt::Kind::For:
      os << pad << "for " << s.var << " in [";
      print_expr_into(*s.lo, os);
      os << ", ";
      print_expr_into(*s.hi, os);
      os << "] {\n";
      print_block(s.body, os, indent + 1);
      os << pad << "}\n";
      return;
    case Stmt::Kind::ForEach:
      os << pad << "for " << s.var << " in " << s.target << " {\n";
      print_block(s.body, os, indent + 1);
      os << pad << "}\n";
      return;
    case Stmt::Kind::While:
      os << pad << "while ";
      print_expr_into(*s.cond, os);
      os << " {\n";
      print_block(s.body, os, indent + 1);
      os << pad << "}\n";
      return;
    case Stmt::Kind::Return:
      os << pad << "return;\n";
      return;
    case Stmt::Kind::Simulate:
      os << pad << "simulate;\n";
      return;
    case Stmt::Kind::SimulateAbs:
      os << pad << "simulate-abs;\n";
      return;
  }
}

void print_block(const Block& b, std::ostream& os, int indent) {
  for (const auto& s : b) print_stmt(*s, os, indent);
}

const char* class_text(VarClass c) {
  switch (c) {
    case VarClass::Const: return "const";
    case VarClass::Secret: return "secret";
    case VarClass::Observable: return "observable";
    case VarClass::Public: return "public";
    case VarClass::Private: return "private";
  }
  return "?";
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream os;
  print_expr_into(e, os);
  return os.str();
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  for (const auto& d : p.decls) {
    os << class_text(d.cls);
    if (d.cls == VarClass::Const) {
      os << ' ' << d.name << " := ";
      print_expr_into(*d.init.literal, os);
      os << ";\n";
      continue;
    }
    if (d.array_length) {
      os << " array[";
      print_expr_into(**d.array_length, os);
      os << "] of";
    }
    os << " int" << d.width << ' ' << d.name;
    switch (d.init.kind) {
      case Init::Kind::None:
        break;
      case Init::Kind::Literal:
        os << " := ";
        print_expr_into(*d.init.literal, os);
        break;
      case Init::Kind::Interval:
        os << " := [";
        print_expr_into(*d.init.lo, os);
        os << ", ";
        print_expr_into(*d.init.hi, os);
        os << ']';
        break;
    }
    os << ";\n";
  }
  print_block(p.body, os, 0);
  return os.str();
}

}  // namespace leakscope
