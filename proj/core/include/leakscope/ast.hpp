#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "leakscope/rational.hpp"

namespace leakscope {

struct Pos {
  int line = 0;
  int col = 0;
};

enum class VarClass { Const, Secret, Observable, Public, Private };

enum class BinOp { Add, Sub, Mul, Div, Mod, Xor, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp { Neg, Not };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { IntLit, Var, ArrayRef, Unary, Binary, Random, RandomBit };
  Kind kind = Kind::IntLit;
  Pos pos;

  std::int64_t value = 0;       // IntLit
  std::string name;             // Var / ArrayRef
  ExprPtr index;                // ArrayRef
  UnOp un_op = UnOp::Neg;       // Unary (operand in lhs)
  BinOp bin_op = BinOp::Add;    // Binary
  ExprPtr lhs, rhs;             // Binary; Random bounds (lo=lhs, hi=rhs)
  Rational prob;                // RandomBit probability

  ExprPtr clone() const;
};

ExprPtr make_int(std::int64_t v, Pos pos = {});
ExprPtr make_var(std::string name, Pos pos = {});

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

Block clone_block(const Block& b);

struct Stmt {
  enum class Kind { Assign, If, For, ForEach, While, Return, Simulate, SimulateAbs };
  Kind kind = Kind::Assign;
  Pos pos;

  // Assign: target[index] := value
  std::string target;
  ExprPtr index;  // null for scalar targets
  ExprPtr value;

  // If
  ExprPtr cond;
  Block then_block;
  std::vector<std::pair<ExprPtr, Block>> elifs;
  Block else_block;

  // For: var in [lo, hi]; ForEach: var in array `target`
  std::string var;
  ExprPtr lo, hi;
  Block body;

  StmtPtr clone() const;
};

struct Init {
  enum class Kind { None, Literal, Interval };
  Kind kind = Kind::None;
  ExprPtr literal;
  ExprPtr lo, hi;
};

struct VarDecl {
  std::string name;
  VarClass cls = VarClass::Public;
  int width = 32;                     // int1..int32 tag
  Init init;
  std::optional<ExprPtr> array_length;
  Pos pos;
};

struct Program {
  std::vector<VarDecl> decls;
  Block body;
};

/// Source-text form of a preprocessed or parsed program. Used for the .pp
/// writeback and the parse/print round-trip property.
std::string print_program(const Program& p);
std::string print_expr(const Expr& e);

}  // namespace leakscope
