#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace leakscope {

enum class Tok {
  Ident, IntLit, DecLit,
  KwConst, KwSecret, KwObservable, KwPublic, KwPrivate,
  KwArray, KwOf, KwIf, KwElse, KwElseif, KwFor, KwWhile, KwIn, KwReturn,
  KwSimulate, KwSimulateAbs, KwRandom, KwRandomBit, KwXor,
  Assign,                                  // :=
  Plus, Minus, Star, Slash, Percent, Caret,
  Not, AndAnd, OrOr,
  Eq, Ne, Lt, Le, Gt, Ge,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Semi,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;        // identifier name or literal spelling
  std::int64_t int_value = 0;
  int line = 0;
  int col = 0;
};

const char* token_name(Tok t);

}  // namespace leakscope
