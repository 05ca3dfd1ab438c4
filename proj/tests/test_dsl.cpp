#include <random>

#include "doctest.h"
#include "oeis/dsl.hpp"
#include "oeis/random_program.hpp"

using namespace oeis;

namespace {

constexpr const char* kA011000 = R"(loop(\(x,y).(((2 * loop(\(x,y).x * y, 2 + 2, x)) - x) div y) + x, x, 1))";

std::size_t parse_error_offset(const std::string& src, ConstMode mode = ConstMode::Strict) {
  try {
    parse_program(src, mode);
  } catch (const ParseError& e) {
    return e.offset;
  } catch (const LexError& e) {
    return e.offset;
  }
  FAIL("expected a parse failure for " << src);
  return 0;
}

}  // namespace

TEST_CASE("tokenizer classifies keywords, identifiers and lambda heads") {
  auto toks = tokenize(R"(loop(\(x,y).x div y, 2, 1))");
  REQUIRE(toks.size() >= 6);
  CHECK(toks[0].kind == TokenKind::Ident);
  CHECK(toks[0].text == "loop");
  CHECK(toks[2].kind == TokenKind::LambdaHead);
  bool saw_div = false;
  for (const auto& t : toks) saw_div |= t.kind == TokenKind::Div;
  CHECK(saw_div);
}

TEST_CASE("strict mode admits only 0, 1 and 2") {
  CHECK_NOTHROW(parse_program("0 + 1 + 2"));
  CHECK_THROWS_AS(parse_program("3"), LexError);
  CHECK_THROWS_AS(parse_program("x + 10"), LexError);
  CHECK_THROWS_AS(parse_program("01"), LexError);
  CHECK(parse_error_offset("x + 10") == 4);
  CHECK(print_program(parse_program("3 - 17", ConstMode::Extended)) == "3 - 17");
}

TEST_CASE("precedence and associativity") {
  Expr e = parse_program("1 + x * 2 - y");
  CHECK(e.kind() == NodeKind::Sub);
  CHECK(e.child(0).kind() == NodeKind::Add);
  CHECK(e.child(0).child(1).kind() == NodeKind::Mul);
  Expr m = parse_program("x mod 2 div y * 1");
  CHECK(m.kind() == NodeKind::Mul);
  CHECK(m.child(0).kind() == NodeKind::Div);
  CHECK(m.child(0).child(0).kind() == NodeKind::Mod);
}

TEST_CASE("printing uses minimal parentheses and is re-parseable") {
  CHECK(print_program(parse_program("(1 - 2) - x")) == "1 - 2 - x");
  CHECK(print_program(parse_program("1 - (2 - x)")) == "1 - (2 - x)");
  CHECK(print_program(parse_program("(x + 1) * 2")) == "(x + 1) * 2");
  CHECK(print_program(parse_program("x * (y div 2)")) == "x * (y div 2)");
  CHECK(print_program(parse_program(kA011000)) ==
        R"(loop(\(x,y).(2 * loop(\(x,y).x * y, 2 + 2, x) - x) div y + x, x, 1))");
  CHECK(print_program(Expr::constant(Integer(-3))) == "(0 - 3)");
}

TEST_CASE("A011000 program is structurally a loop over a nested loop") {
  Expr e = parse_program(kA011000);
  CHECK(e.kind() == NodeKind::Loop);
  CHECK(count_nodes(e, NodeKind::Loop) == 2);
  CHECK(e.child(1).kind() == NodeKind::X);
  CHECK(e.child(2).kind() == NodeKind::Const);
  CHECK(count_free(e, NodeKind::X) == 1);
  CHECK(count_free(e, NodeKind::Y) == 0);
  CHECK(e.is_binder_slot(0));
  CHECK_FALSE(e.is_binder_slot(1));
}

TEST_CASE("every construct parses with the expected arity") {
  CHECK(parse_program(R"(loop2(\(x,y).x + y, \(x,y).x, x, 0, 1))").kind() == NodeKind::Loop2);
  CHECK(parse_program(R"(compr(\(x,y).x mod 2, x))").kind() == NodeKind::Compr);
  CHECK(parse_program("cond(x - 1, 0, 1)").kind() == NodeKind::Cond);
  CHECK_THROWS_AS(parse_program("loop(x,1)"), ParseError);
  CHECK_THROWS_AS(parse_program("cond(x,1)"), ParseError);
  CHECK_THROWS_AS(parse_program(R"(loop(\(x,y).x, x, 1, 2))"), ParseError);
  CHECK_THROWS_AS(parse_program(R"(compr(x, \(x,y).x))"), ParseError);
  CHECK_THROWS_AS(parse_program("foo(1)"), ParseError);
  CHECK_THROWS_AS(parse_program(R"(\(x,y).x)"), ParseError);
  CHECK_THROWS_AS(parse_program(R"(loop(\(y,x).x, x, 1))"), ParseError);
}

TEST_CASE("parse errors carry the offending offset") {
  CHECK(parse_error_offset("loop(x,1)") == 5);
  CHECK(parse_error_offset("x +") == 3);
  CHECK(parse_error_offset("1 2") == 2);
  CHECK(parse_error_offset("x $ 1") == 2);
  CHECK(parse_error_offset("") == 0);
  CHECK(parse_error_offset("(x") == 2);
}

TEST_CASE("deeply nested input is rejected instead of overflowing the stack") {
  std::string deep(100000, '(');
  deep += "x";
  deep += std::string(100000, ')');
  CHECK_THROWS_AS(parse_program(deep), ParseError);
  std::string chain = "x";
  for (int i = 0; i < 100000; ++i) chain += " - x";
  CHECK_THROWS_AS(parse_program(chain), ParseError);
  std::string ok = "x";
  for (int i = 0; i < 200; ++i) ok += " + x";
  CHECK_NOTHROW(parse_program(ok));
}

TEST_CASE("whitespace and comments-free layout do not affect the tree") {
  CHECK(parse_program("loop(\\(x,y).x*y,x,1)") == parse_program(" loop ( \\( x , y ) . x * y , x , 1 ) "));
  CHECK(parse_program("x\n+\t1") == parse_program("x + 1"));
}

TEST_CASE("structural equality distinguishes kinds and payloads") {
  CHECK(parse_program("x + 1") != parse_program("1 + x"));
  CHECK(parse_program("x div 2") != parse_program("x mod 2"));
  CHECK(Expr::constant(Integer(1)) == parse_program("1"));
}

TEST_CASE("property: parse(print(e)) == e for random programs") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    Expr e = random_program(rng);
    std::string text = print_program(e);
    Expr back = parse_program(text);
    CHECK_MESSAGE(back == e, text);
    CHECK(print_program(back) == text);
  }
}

TEST_CASE("node metadata") {
  Expr e = parse_program("(x + 1) * loop(\\(x,y).x, 2, y)");
  CHECK(e.size() == 8);
  CHECK(e.depth() == 3);
  CHECK(count_nodes(e, NodeKind::Const) == 2);
  CHECK(count_free(e, NodeKind::Y) == 1);
}
