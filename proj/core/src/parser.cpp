#include "leakscope/parser.hpp"

#include <fstream>
#include <sstream>

#include "leakscope/errors.hpp"
#include "leakscope/lexer.hpp"

namespace leakscope {

namespace {

Rational decimal_to_rational(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(s));
  const std::string whole = s.substr(0, dot);
  const std::string frac = s.substr(dot + 1);
  Rational den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  Rational num = Rational(std::stoll(whole)) * den;
  if (!frac.empty()) num += Rational(std::stoll(frac));
  return num / den;
}

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, std::string file)
      : toks_(tokens), file_(std::move(file)) {}

  Program run() {
    Program p;
    while (is_decl_start()) p.decls.push_back(declaration());
    while (cur().kind != Tok::End) p.body.push_back(statement());
    if (p.decls.empty())
      fail("program has no declarations");
    return p;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& peek(std::size_t ahead = 1) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }
  Pos pos() const { return {cur().line, cur().col}; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(file_ + ":" + std::to_string(cur().line) + ":" +
                     std::to_string(cur().col) + ": " + msg);
  }

  Token expect(Tok kind, const char* what = nullptr) {
    if (cur().kind != kind)
      fail(std::string("expected ") + (what ? what : token_name(kind)) +
           ", found " + token_name(cur().kind));
    return toks_[i_++];
  }

  bool accept(Tok kind) {
    if (cur().kind != kind) return false;
    ++i_;
    return true;
  }

  bool is_decl_start() const {
    switch (cur().kind) {
      case Tok::KwConst:
      case Tok::KwSecret:
      case Tok::KwObservable:
      case Tok::KwPublic:
      case Tok::KwPrivate:
        return true;
      default:
        return false;
    }
  }

  // ------------------------------------------------------------ declarations

  VarDecl declaration() {
    VarDecl d;
    d.pos = pos();
    if (accept(Tok::KwConst)) {
      d.cls = VarClass::Const;
      d.name = expect(Tok::Ident).text;
      expect(Tok::Assign);
      d.init.kind = Init::Kind::Literal;
      d.init.literal = expression();
      expect(Tok::Semi);
      return d;
    }
    switch (cur().kind) {
      case Tok::KwSecret: d.cls = VarClass::Secret; break;
      case Tok::KwObservable: d.cls = VarClass::Observable; break;
      case Tok::KwPublic: d.cls = VarClass::Public; break;
      case Tok::KwPrivate: d.cls = VarClass::Private; break;
      default: fail("expected a declaration");
    }
    ++i_;
    if (accept(Tok::KwArray)) {
      expect(Tok::LBracket);
      d.array_length = expression();
      expect(Tok::RBracket);
      expect(Tok::KwOf);
    }
    d.width = width_tag();
    d.name = expect(Tok::Ident).text;
    if (accept(Tok::Assign)) {
      if (accept(Tok::LBracket)) {
        d.init.kind = Init::Kind::Interval;
        d.init.lo = expression();
        expect(Tok::Comma);
        d.init.hi = expression();
        expect(Tok::RBracket);
      } else {
        d.init.kind = Init::Kind::Literal;
        d.init.literal = expression();
      }
    }
    expect(Tok::Semi);
    return d;
  }

  int width_tag() {
    const Token t = expect(Tok::Ident, "a width tag (int1..int32)");
    if (t.text.rfind("int", 0) != 0)
      fail("expected a width tag (int1..int32), found '" + t.text + "'");
    int bits = 0;
    try {
      bits = std::stoi(t.text.substr(3));
    } catch (...) {
      fail("malformed width tag '" + t.text + "'");
    }
    if (bits < 1 || bits > 32)
      fail("width tag out of range (int1..int32): '" + t.text + "'");
    return bits;
  }

  // -------------------------------------------------------------- statements

  Block block() {
    expect(Tok::LBrace);
    Block b;
    while (cur().kind != Tok::RBrace) {
      if (cur().kind == Tok::End) fail("unterminated block, expected '}'");
      b.push_back(statement());
    }
    expect(Tok::RBrace);
    return b;
  }

  StmtPtr statement() {
    auto s = std::make_unique<Stmt>();
    s->pos = pos();
    switch (cur().kind) {
      case Tok::KwIf: return if_statement();
      case Tok::KwFor: return for_statement();
      case Tok::KwWhile: {
        ++i_;
        s->kind = Stmt::Kind::While;
        s->cond = expression();
        s->body = block();
        return s;
      }
      case Tok::KwReturn:
        ++i_;
        s->kind = Stmt::Kind::Return;
        expect(Tok::Semi);
        return s;
      case Tok::KwSimulate:
        ++i_;
        s->kind = Stmt::Kind::Simulate;
        expect(Tok::Semi);
        return s;
      case Tok::KwSimulateAbs:
        ++i_;
        s->kind = Stmt::Kind::SimulateAbs;
        expect(Tok::Semi);
        return s;
      case Tok::Ident: {
        s->kind = Stmt::Kind::Assign;
        s->target = expect(Tok::Ident).text;
        if (accept(Tok::LBracket)) {
          s->index = expression();
          expect(Tok::RBracket);
        }
        expect(Tok::Assign);
        s->value = expression();
        expect(Tok::Semi);
        return s;
      }
      default:
        fail(std::string("expected a statement, found ") +
             token_name(cur().kind));
    }
  }

  StmtPtr if_statement() {
    auto s = std::make_unique<Stmt>();
    s->pos = pos();
    expect(Tok::KwIf);
    s->kind = Stmt::Kind::If;
    s->cond = expression();
    s->then_block = block();
    for (;;) {
      if (cur().kind == Tok::KwElseif ||
          (cur().kind == Tok::KwElse && peek().kind == Tok::KwIf)) {
        if (cur().kind == Tok::KwElseif) {
          ++i_;
        } else {
          ++i_;
          ++i_;
        }
        ExprPtr c = expression();
        Block b = block();
        s->elifs.emplace_back(std::move(c), std::move(b));
        continue;
      }
      if (accept(Tok::KwElse)) s->else_block = block();
      break;
    }
    return s;
  }

  StmtPtr for_statement() {
    auto s = std::make_unique<Stmt>();
    s->pos = pos();
    expect(Tok::KwFor);
    s->var = expect(Tok::Ident).text;
    expect(Tok::KwIn);
    if (accept(Tok::LBracket)) {
      s->kind = Stmt::Kind::For;
      s->lo = expression();
      expect(Tok::Comma);
      s->hi = expression();
      expect(Tok::RBracket);
    } else {
      // foreach over an array
      s->kind = Stmt::Kind::ForEach;
      s->target = expect(Tok::Ident, "an array name").text;
    }
    s->body = block();
    return s;
  }

  // ------------------------------------------------------------- expressions

  ExprPtr expression() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (cur().kind == Tok::OrOr) {
      Pos p = pos();
      ++i_;
      e = binary(BinOp::Or, std::move(e), and_expr(), p);
    }
    return e;
  }

  ExprPtr and_expr() {
    ExprPtr e = xor_expr();
    while (cur().kind == Tok::AndAnd) {
      Pos p = pos();
      ++i_;
      e = binary(BinOp::And, std::move(e), xor_expr(), p);
    }
    return e;
  }

  ExprPtr xor_expr() {
    ExprPtr e = equality();
    while (cur().kind == Tok::KwXor || cur().kind == Tok::Caret) {
      Pos p = pos();
      ++i_;
      e = binary(BinOp::Xor, std::move(e), equality(), p);
    }
    return e;
  }

  ExprPtr equality() {
    ExprPtr e = relational();
    for (;;) {
      BinOp op;
      if (cur().kind == Tok::Eq) op = BinOp::Eq;
      else if (cur().kind == Tok::Ne) op = BinOp::Ne;
      else break;
      Pos p = pos();
      ++i_;
      e = binary(op, std::move(e), relational(), p);
    }
    return e;
  }

  ExprPtr relational() {
    ExprPtr e = additive();
    for (;;) {
      BinOp op;
      switch (cur().kind) {
        case Tok::Lt: op = BinOp::Lt; break;
        case Tok::Le: op = BinOp::Le; break;
        case Tok::Gt: op = BinOp::Gt; break;
        case Tok::Ge: op = BinOp::Ge; break;
        default: return e;
      }
      Pos p = pos();
      ++i_;
      e = binary(op, std::move(e), additive(), p);
    }
  }

  ExprPtr additive() {
    ExprPtr e = multiplicative();
    for (;;) {
      BinOp op;
      if (cur().kind == Tok::Plus) op = BinOp::Add;
      else if (cur().kind == Tok::Minus) op = BinOp::Sub;
      else break;
      Pos p = pos();
      ++i_;
      e = binary(op, std::move(e), multiplicative(), p);
    }
    return e;
  }

  ExprPtr multiplicative() {
    ExprPtr e = unary();
    for (;;) {
      BinOp op;
      switch (cur().kind) {
        case Tok::Star: op = BinOp::Mul; break;
        case Tok::Slash: op = BinOp::Div; break;
        case Tok::Percent: op = BinOp::Mod; break;
        default: return e;
      }
      Pos p = pos();
      ++i_;
      e = binary(op, std::move(e), unary(), p);
    }
  }

  ExprPtr unary() {
    if (cur().kind == Tok::Minus || cur().kind == Tok::Not) {
      auto e = std::make_unique<Expr>();
      e->pos = pos();
      e->kind = Expr::Kind::Unary;
      e->un_op = cur().kind == Tok::Minus ? UnOp::Neg : UnOp::Not;
      ++i_;
      e->lhs = unary();
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    auto e = std::make_unique<Expr>();
    e->pos = pos();
    switch (cur().kind) {
      case Tok::IntLit:
        e->kind = Expr::Kind::IntLit;
        e->value = cur().int_value;
        ++i_;
        return e;
      case Tok::LParen: {
        ++i_;
        ExprPtr inner = expression();
        expect(Tok::RParen);
        return inner;
      }
      case Tok::KwRandom: {
        ++i_;
        e->kind = Expr::Kind::Random;
        expect(Tok::LParen);
        e->lhs = expression();
        expect(Tok::Comma);
        e->rhs = expression();
        expect(Tok::RParen);
        return e;
      }
      case Tok::KwRandomBit: {
        ++i_;
        e->kind = Expr::Kind::RandomBit;
        expect(Tok::LParen);
        if (cur().kind == Tok::DecLit) {
          e->prob = decimal_to_rational(cur().text);
          ++i_;
        } else if (cur().kind == Tok::IntLit) {
          e->prob = Rational(cur().int_value);
          ++i_;
        } else {
          fail("randombit takes a constant probability literal");
        }
        if (e->prob < 0 || e->prob > 1)
          fail("randombit probability outside [0,1]");
        expect(Tok::RParen);
        return e;
      }
      case Tok::Ident: {
        e->name = cur().text;
        ++i_;
        if (accept(Tok::LBracket)) {
          e->kind = Expr::Kind::ArrayRef;
          e->index = expression();
          expect(Tok::RBracket);
        } else {
          e->kind = Expr::Kind::Var;
        }
        return e;
      }
      default:
        fail(std::string("expected an expression, found ") +
             token_name(cur().kind));
    }
  }

  static ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs, Pos p) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Binary;
    e->bin_op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    e->pos = p;
    return e;
  }

  const std::vector<Token>& toks_;
  std::string file_;
  std::size_t i_ = 0;
};

}  // namespace

Program parse(const std::vector<Token>& tokens, const std::string& file) {
  return Parser(tokens, file).run();
}

Program parse_source(std::string_view source, const std::string& file) {
  return parse(tokenize(source, file), file);
}

Program parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(path + ": cannot open file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_source(ss.str(), path);
}

}  // namespace leakscope
