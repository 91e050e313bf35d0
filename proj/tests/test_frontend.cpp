#include <doctest.h>

#include <fstream>
#include <sstream>

#include "leakscope/errors.hpp"
#include "leakscope/lexer.hpp"
#include "leakscope/parser.hpp"
#include "leakscope/preprocess.hpp"
#include "oracle.hpp"

using namespace leakscope;

namespace {

std::string fixture(const std::string& name) {
  return std::string(LEAKSCOPE_FIXTURES) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("tokenize a tiny statement") {
  const auto toks = tokenize("x := 1;");
  REQUIRE(toks.size() == 5);
  CHECK(toks[0].kind == Tok::Ident);
  CHECK(toks[0].text == "x");
  CHECK(toks[1].kind == Tok::Assign);
  CHECK(toks[2].kind == Tok::IntLit);
  CHECK(toks[2].int_value == 1);
  CHECK(toks[3].kind == Tok::Semi);
  CHECK(toks[4].kind == Tok::End);
}

TEST_CASE("tokenize rejects illegal characters with a position") {
  try {
    tokenize("x @ 1", "prog.hyleak");
    FAIL("expected LexError");
  } catch (const LexError& e) {
    CHECK(std::string(e.what()).find("prog.hyleak:1:3") != std::string::npos);
  }
}

TEST_CASE("comments and simulate-abs lex correctly") {
  const auto toks = tokenize("// comment\n# another\nsimulate-abs; /* x */");
  CHECK(toks[0].kind == Tok::KwSimulateAbs);
  CHECK(toks[1].kind == Tok::Semi);
  CHECK(toks[2].kind == Tok::End);
}

TEST_CASE("parse the random walk fixture") {
  const Program p = parse_file(fixture("random_walk.hyleak"));
  int secrets = 0, observables = 0, consts = 0;
  for (const auto& d : p.decls) {
    if (d.cls == VarClass::Secret) ++secrets;
    if (d.cls == VarClass::Observable) ++observables;
    if (d.cls == VarClass::Const) ++consts;
  }
  CHECK(secrets == 1);
  CHECK(observables == 1);
  CHECK(consts == 1);
  REQUIRE(!p.body.empty());
  CHECK(p.body.front()->kind == Stmt::Kind::If);
  CHECK(p.body.front()->elifs.size() == 5);
}

TEST_CASE("parse the probabilistically terminating fixture") {
  const Program p = parse_file(fixture("prob_terminating.hyleak"));
  bool has_while = false;
  for (const auto& s : p.body)
    if (s->kind == Stmt::Kind::While) has_while = true;
  CHECK(has_while);
}

TEST_CASE("reservoir fixture tokenizes and parses") {
  const Program p = parse_file(fixture("reservoir_n4.hyleak"));
  CHECK(p.decls.size() == 5);  // N, K, s, r, j
}

TEST_CASE("missing semicolon names the expected token") {
  try {
    parse_source("public int32 x := 0;\nx := 1\nreturn;");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("';'") != std::string::npos);
  }
}

TEST_CASE("preprocess unrolls the walk loop into 15 step blocks") {
  const Program p = parse_file(fixture("random_walk.hyleak"));
  const PreparedProgram prep = preprocess(p);
  int ran_assignments = 0;
  for (const auto& s : prep.body)
    if (s->kind == Stmt::Kind::Assign && s->target == "ran")
      ++ran_assignments;
  CHECK(ran_assignments == 15);
  // constants are substituted away
  for (const auto& d : prep.decls) CHECK(d.cls != VarClass::Const);
}

TEST_CASE("array expansion introduces element variables") {
  const Program p = parse_source(
      "secret int1 s := [0, 1];\n"
      "observable int32 o := 0;\n"
      "public array[2] of int32 a;\n"
      "a[0] := 1;\n"
      "a[1] := s;\n"
      "o := a[0] + a[1];\n"
      "return;\n");
  const PreparedProgram prep = preprocess(p);
  int elements = 0;
  for (const auto& d : prep.decls)
    if (d.name == "a_0" || d.name == "a_1") ++elements;
  CHECK(elements == 2);
  CHECK(prep.arrays.at("a").size() == 2);
  CHECK(prep.body[0]->target == "a_0");
  CHECK(prep.body[1]->target == "a_1");
}

TEST_CASE("secrets without initializers default to the full width range") {
  const Program p = parse_source(
      "secret int1 s;\nobservable int1 o := 0;\no := s;\nreturn;\n");
  const PreparedProgram prep = preprocess(p);
  REQUIRE(prep.decls[0].init.kind == Init::Kind::Interval);
  CHECK(prep.decls[0].init.lo->value == 0);
  CHECK(prep.decls[0].init.hi->value == 1);
}

TEST_CASE("preprocess leaves loop-free programs unchanged") {
  const std::string src =
      "secret int2 s := [0, 3];\n"
      "observable int32 o := 0;\n"
      "o := s + 1;\n"
      "return;\n";
  const Program p = parse_source(src);
  const PreparedProgram prep = preprocess(p);
  CHECK(print_program(p) == print_program(prep.to_program()));
}

TEST_CASE("preprocess is idempotent") {
  for (const char* name :
       {"random_walk.hyleak", "reservoir_n4.hyleak", "lying_crypto.hyleak",
        "smart_grid_s1.hyleak", "shifting_window_n20.hyleak",
        "prob_terminating.hyleak", "dining3.hyleak"}) {
    const Program p = parse_file(fixture(name));
    const PreparedProgram once = preprocess(p);
    const PreparedProgram twice = preprocess(once);
    CHECK(print_program(once.to_program()) ==
          print_program(twice.to_program()));
  }
}

TEST_CASE("parse-print round trip is stable") {
  for (const char* name :
       {"random_walk.hyleak", "reservoir_n4.hyleak", "lying_crypto.hyleak",
        "smart_grid_s1.hyleak", "shifting_window_n20.hyleak",
        "prob_terminating.hyleak", "dining3.hyleak"}) {
    const std::string src = slurp(fixture(name));
    const Program once = parse_source(src, name);
    const std::string printed = print_program(once);
    const Program again = parse_source(printed, name);
    CHECK(print_program(again) == printed);
  }
}

TEST_CASE("unbound constants are reported") {
  CHECK_THROWS_AS(preprocess(parse_source(
                      "const A := B + 1;\nsecret int1 s := [0,1];\n"
                      "observable int1 o := 0;\nreturn;\n")),
                  UnboundConst);
  CHECK_THROWS_AS(
      preprocess(parse_source("const A := A + 1;\nsecret int1 s := [0,1];\n"
                              "observable int1 o := 0;\nreturn;\n")),
      UnboundConst);
}

TEST_CASE("non-constant for bounds are rejected") {
  const Program p = parse_source(
      "secret int2 s := [0, 3];\n"
      "observable int32 o := 0;\n"
      "public int32 k := 0;\n"
      "k := s;\n"
      "for i in [0, k] {\n  o := o + i;\n}\n"
      "return;\n");
  CHECK_THROWS_AS(preprocess(p), NonConstantLoopBound);
}

TEST_CASE("undeclared identifiers are rejected") {
  CHECK_THROWS_AS(
      preprocess(parse_source("secret int1 s := [0,1];\n"
                              "observable int1 o := 0;\no := t;\nreturn;\n")),
      ParseError);
}

TEST_CASE("foreach unrolls over array elements") {
  const Program p = parse_source(
      "secret int1 s := [0,1];\n"
      "observable int32 o := 0;\n"
      "public array[3] of int1 c;\n"
      "for b in c {\n  b := randombit(0.5);\n}\n"
      "o := c[0] + c[1] + c[2];\n"
      "return;\n");
  const PreparedProgram prep = preprocess(p);
  int bit_assigns = 0;
  for (const auto& s : prep.body)
    if (s->kind == Stmt::Kind::Assign &&
        s->target.rfind("c_", 0) == 0)
      ++bit_assigns;
  CHECK(bit_assigns == 3);
}

TEST_CASE("preprocessing preserves the trace distribution") {
  // Re-preprocessing the printed preprocessed program must enumerate to the
  // exact same outcome distribution.
  for (const char* name : {"reservoir_n4.hyleak", "dining3.hyleak",
                           "smart_grid_s1.hyleak"}) {
    const Program original = parse_file(fixture(name));
    const PreparedProgram once = preprocess(original);
    const Program reparsed = parse_source(print_program(once.to_program()));
    const PreparedProgram twice = preprocess(reparsed);
    const oracle::Tally a = oracle::brute_force(once);
    const oracle::Tally b = oracle::brute_force(twice);
    CHECK(a == b);
  }
}

TEST_CASE("width tags outside int1..int32 are rejected") {
  CHECK_THROWS_AS(parse_source("secret int33 s := [0,1];\nreturn;\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_source("secret int0 s := [0,1];\nreturn;\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_source("secret word s := [0,1];\nreturn;\n"),
                  ParseError);
}

TEST_CASE("randombit probabilities must be constant literals in [0,1]") {
  CHECK_THROWS_AS(parse_source("secret int1 s := [0,1];\n"
                               "observable int1 o := 0;\n"
                               "o := randombit(2);\nreturn;\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_source("secret int1 s := [0,1];\n"
                               "observable int1 o := 0;\n"
                               "o := randombit(s);\nreturn;\n"),
                  ParseError);
}

TEST_CASE("single '=' is rejected with a hint") {
  try {
    tokenize("x = 1;");
    FAIL("expected LexError");
  } catch (const LexError& e) {
    CHECK(std::string(e.what()).find(":=") != std::string::npos);
  }
}

TEST_CASE("xor binds looser than comparisons") {
  // a xor b == c parses as a xor (b == c)
  const Program p = parse_source(
      "secret int1 s := [0,1];\nobservable int1 o := 0;\n"
      "public int1 a := 1;\n"
      "o := a xor s == 1;\nreturn;\n");
  REQUIRE(!p.body.empty());
  const Stmt& assign = *p.body.front();
  REQUIRE(assign.value->kind == Expr::Kind::Binary);
  CHECK(assign.value->bin_op == BinOp::Xor);
  CHECK(assign.value->rhs->bin_op == BinOp::Eq);
}
