#include "leakscope/lexer.hpp"

#include <cctype>
#include <map>

#include "leakscope/errors.hpp"

namespace leakscope {

const char* token_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer";
    case Tok::DecLit: return "decimal";
    case Tok::KwConst: return "'const'";
    case Tok::KwSecret: return "'secret'";
    case Tok::KwObservable: return "'observable'";
    case Tok::KwPublic: return "'public'";
    case Tok::KwPrivate: return "'private'";
    case Tok::KwArray: return "'array'";
    case Tok::KwOf: return "'of'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwElseif: return "'elseif'";
    case Tok::KwFor: return "'for'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwIn: return "'in'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwSimulate: return "'simulate'";
    case Tok::KwSimulateAbs: return "'simulate-abs'";
    case Tok::KwRandom: return "'random'";
    case Tok::KwRandomBit: return "'randombit'";
    case Tok::KwXor: return "'xor'";
    case Tok::Assign: return "':='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::Caret: return "'^'";
    case Tok::Not: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Eq: return "'=='";
    case Tok::Ne: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::End: return "end of input";
  }
  return "?";
}

namespace {

const std::map<std::string, Tok>& keywords() {
  static const std::map<std::string, Tok> kw = {
      {"const", Tok::KwConst},     {"secret", Tok::KwSecret},
      {"observable", Tok::KwObservable}, {"public", Tok::KwPublic},
      {"private", Tok::KwPrivate}, {"array", Tok::KwArray},
      {"of", Tok::KwOf},           {"if", Tok::KwIf},
      {"else", Tok::KwElse},       {"elseif", Tok::KwElseif},
      {"for", Tok::KwFor},         {"while", Tok::KwWhile},
      {"in", Tok::KwIn},           {"return", Tok::KwReturn},
      {"simulate", Tok::KwSimulate}, {"random", Tok::KwRandom},
      {"randombit", Tok::KwRandomBit}, {"xor", Tok::KwXor},
  };
  return kw;
}

class Lexer {
 public:
  Lexer(std::string_view src, std::string file)
      : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw LexError(file_ + ":" + std::to_string(err_line_) + ":" +
                   std::to_string(err_col_) + ": " + msg);
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (peek() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '/') {
        while (peek() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        advance();
        advance();
        while (peek() && !(peek() == '*' && peek(1) == '/')) advance();
        if (!peek()) fail("unterminated block comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  Token next() {
    Token t;
    t.line = line_;
    t.col = col_;
    err_line_ = line_;
    err_col_ = col_;
    char c = peek();
    if (c == '\0') {
      t.kind = Tok::End;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return ident(t);
    if (std::isdigit(static_cast<unsigned char>(c))) return number(t);
    advance();
    switch (c) {
      case ':':
        if (peek() == '=') {
          advance();
          t.kind = Tok::Assign;
          return t;
        }
        fail("expected '=' after ':'");
      case '+': t.kind = Tok::Plus; return t;
      case '-': t.kind = Tok::Minus; return t;
      case '*': t.kind = Tok::Star; return t;
      case '/': t.kind = Tok::Slash; return t;
      case '%': t.kind = Tok::Percent; return t;
      case '^': t.kind = Tok::Caret; return t;
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case '{': t.kind = Tok::LBrace; return t;
      case '}': t.kind = Tok::RBrace; return t;
      case '[': t.kind = Tok::LBracket; return t;
      case ']': t.kind = Tok::RBracket; return t;
      case ',': t.kind = Tok::Comma; return t;
      case ';': t.kind = Tok::Semi; return t;
      case '!':
        if (peek() == '=') {
          advance();
          t.kind = Tok::Ne;
        } else {
          t.kind = Tok::Not;
        }
        return t;
      case '=':
        if (peek() == '=') {
          advance();
          t.kind = Tok::Eq;
          return t;
        }
        fail("expected '==' (assignment is ':=')");
      case '<':
        if (peek() == '=') {
          advance();
          t.kind = Tok::Le;
        } else {
          t.kind = Tok::Lt;
        }
        return t;
      case '>':
        if (peek() == '=') {
          advance();
          t.kind = Tok::Ge;
        } else {
          t.kind = Tok::Gt;
        }
        return t;
      case '&':
        if (peek() == '&') {
          advance();
          t.kind = Tok::AndAnd;
          return t;
        }
        fail("expected '&&'");
      case '|':
        if (peek() == '|') {
          advance();
          t.kind = Tok::OrOr;
          return t;
        }
        fail("expected '||'");
      default:
        fail(std::string("illegal character '") + c + "'");
    }
  }

  Token ident(Token t) {
    std::string s;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
      s.push_back(advance());
    // simulate-abs is one keyword; the '-' is part of it.
    if (s == "simulate" && peek() == '-' && peek(1) == 'a' && peek(2) == 'b' &&
        peek(3) == 's') {
      advance(); advance(); advance(); advance();
      t.kind = Tok::KwSimulateAbs;
      return t;
    }
    auto it = keywords().find(s);
    if (it != keywords().end()) {
      t.kind = it->second;
    } else {
      t.kind = Tok::Ident;
      t.text = std::move(s);
    }
    return t;
  }

  Token number(Token t) {
    std::string s;
    while (std::isdigit(static_cast<unsigned char>(peek())))
      s.push_back(advance());
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      s.push_back(advance());
      while (std::isdigit(static_cast<unsigned char>(peek())))
        s.push_back(advance());
      t.kind = Tok::DecLit;
      t.text = std::move(s);
      return t;
    }
    t.kind = Tok::IntLit;
    t.int_value = std::stoll(s);
    t.text = std::move(s);
    return t;
  }

  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int err_line_ = 1;
  int err_col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source, const std::string& file) {
  return Lexer(source, file).run();
}

}  // namespace leakscope
