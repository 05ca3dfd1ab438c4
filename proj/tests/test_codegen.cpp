#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oeis/random_program.hpp"
#include "oeis/transpiler.hpp"

using namespace oeis;

namespace {

constexpr const char* kA011000 = R"(loop(\(x,y).(((2 * loop(\(x,y).x * y, 2 + 2, x)) - x) div y) + x, x, 1))";
constexpr const char* kPow2 = R"(loop(\(x,y).2 * x, x, 1))";

std::string golden(const char* name) {
  std::ifstream in(std::string(OEIS_TEST_DATA) + "/" + name);
  REQUIRE_MESSAGE(in, name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool structurally_valid(const std::string& text) { return check_lean_structure(text).empty(); }

}  // namespace

TEST_CASE("golden definitions") {
  DefinitionMeta meta{"A000079", 0, 10, true};
  CHECK(dsl_to_lean(parse_program(kPow2), "PowersOfTwo", CodegenMode::Simplified, meta).text ==
        golden("A000079_definition.lean"));
  CHECK(dsl_to_lean(parse_program(kA011000), "A011000", CodegenMode::Direct).text == golden("A011000_direct.lean"));
  CHECK(dsl_to_lean(parse_program(kA011000), "A011000").text == golden("A011000_simplified.lean"));
}

TEST_CASE("definition shape") {
  auto src = dsl_to_lean(parse_program("x * x + 1"), "Sq");
  CHECK(src.kind == LeanKind::Definition);
  CHECK(src.name == "Sq");
  CHECK(src.text == "def Sq (n : ℕ) : ℤ :=\n  let x : ℤ := n\n  x * x + 1\n");
  CHECK(dsl_to_lean(parse_program("7 div x", ConstMode::Extended), "D").text.find("Int.fdiv 7 x") != std::string::npos);
  CHECK(dsl_to_lean(parse_program("x mod 2"), "M").text.find("Int.fmod x 2") != std::string::npos);
  CHECK_THROWS_AS(dsl_to_lean(parse_program("x"), "1bad"), TranspileError);
  CHECK_THROWS_AS(dsl_to_lean(parse_program("x"), "has space"), TranspileError);
}

TEST_CASE("compr lowering states its fuel") {
  auto text = dsl_to_lean(parse_program(R"(compr(\(x,y).x mod 2, x))"), "E").text;
  CHECK(text.find("100000") != std::string::npos);
  CHECK(text.rfind("--", 0) == 0);
  CHECK(structurally_valid(text));
}

TEST_CASE("simplified mode optimizes and shares repeated subtrees") {
  Expr e = parse_program("(x * x + x * 2) * (x * x + x * 2) + cond(0, 1, 2)");
  CHECK(codegen_input(e, CodegenMode::Direct) == e);
  CHECK(codegen_input(e, CodegenMode::Simplified) == optimize(e));
  auto simplified = dsl_to_lean(e, "S").text;
  CHECK(simplified.find("let t1 := x * x + x * 2") != std::string::npos);
  CHECK(simplified.find("t1 * t1 + 1") != std::string::npos);
  auto direct = dsl_to_lean(e, "S", CodegenMode::Direct).text;
  CHECK(direct.find("let t1") == std::string::npos);
  CHECK(direct.find("if 0 ≤ 0 then 1 else 2") != std::string::npos);
}

TEST_CASE("negative constants render parenthesized") {
  auto text = dsl_to_lean(parse_program("x - 2 - 1"), "N").text;
  CHECK(text.find("x - 2 - 1") != std::string::npos);
  auto folded = dsl_to_lean(parse_program("(0 - 2) * x"), "N").text;
  CHECK(folded.find("(-2) * x") != std::string::npos);
}

TEST_CASE("theorem emission") {
  std::vector<TheoremSpec> specs;
  for (int i = 10; i >= 0; --i) specs.push_back({"PowersOfTwo", Integer(i), Integer(std::int64_t{1} << i)});
  auto block = emit_theorems(specs);
  CHECK(block.kind == LeanKind::TheoremBlock);
  CHECK(block.text == golden("A000079_theorems.lean"));

  std::vector<TheoremSpec> neg = {{"f", Integer(2), Integer(-3), "simp"}};
  CHECK(emit_theorems(neg).text == "theorem f_thm_2 : f 2 = (-3) := by simp\n");

  auto code = [](std::vector<TheoremSpec> s) {
    try {
      emit_theorems(s);
    } catch (const TranspileError& e) {
      return e.code;
    }
    FAIL("expected TranspileError");
    return TranspileErrorCode::InvalidMeta;
  };
  CHECK(code({}) == TranspileErrorCode::EmptySpecList);
  CHECK(code({{"f", Integer(0), Integer(1)}, {"g", Integer(1), Integer(2)}}) == TranspileErrorCode::MixedFunctionNames);
  CHECK(code({{"f", Integer(0), Integer(1)}, {"f", Integer(0), Integer(1)}}) == TranspileErrorCode::DuplicateIndex);
}

TEST_CASE("attribute header") {
  CHECK(emit_attribute_header({"A000079", 0, 10, true}).text ==
        "@[OEIS := A000079, offset := 0, maxIndex := 10, derive := true]\n");
  CHECK(emit_attribute_header({"A1234567", 1, 1, false}).text ==
        "@[OEIS := A1234567, offset := 1, maxIndex := 1, derive := false]\n");
  for (const char* bad : {"A12345", "B000079", "A12345678", "a000079", "A00007x", ""}) {
    CHECK_THROWS_AS(emit_attribute_header({bad, 0, 10, true}), TranspileError);
  }
  CHECK_THROWS_AS(emit_attribute_header({"A000079", 5, 1, true}), TranspileError);
  CHECK(is_oeis_tag("A000001"));
  CHECK_FALSE(is_oeis_tag("A0000001x"));
}

TEST_CASE("identifiers") {
  CHECK(is_identifier("PowersOfTwo"));
  CHECK(is_identifier("A000079"));
  CHECK(is_identifier("f_1"));
  CHECK_FALSE(is_identifier("_"));
  CHECK_FALSE(is_identifier(""));
  CHECK_FALSE(is_identifier("1f"));
  CHECK_FALSE(is_identifier("a-b"));
  CHECK_FALSE(is_identifier("def"));
  CHECK_FALSE(is_identifier("theorem"));
}

TEST_CASE("assembled file") {
  auto defn = dsl_to_lean(parse_program(kPow2), "PowersOfTwo", CodegenMode::Simplified, DefinitionMeta{"A000079", 0, 10, true});
  std::vector<TheoremSpec> specs = {{"PowersOfTwo", Integer(0), Integer(1)}, {"PowersOfTwo", Integer(1), Integer(2)}};
  auto file = assemble_file(defn, emit_theorems(specs));
  CHECK(file.kind == LeanKind::File);
  CHECK(file.text.rfind("import Mathlib\n\n", 0) == 0);
  CHECK(file.text.find(defn.text) != std::string::npos);
  CHECK(file.text.find("\ntheorem PowersOfTwo_thm_1 : PowersOfTwo 1 = 2 := by decide\n") != std::string::npos);
  CHECK(structurally_valid(file.text));
}

TEST_CASE("structural checker accepts generated code") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1500; ++i) {
    Expr e = random_program(rng);
    for (auto mode : {CodegenMode::Direct, CodegenMode::Simplified}) {
      auto text = dsl_to_lean(e, "G", mode, DefinitionMeta{"A000045", 0, 5, true}).text;
      auto diags = check_lean_structure(text);
      INFO(print_program(e));
      INFO(text);
      CHECK(diags.empty());
    }
  }
}

TEST_CASE("structural checker rejects malformed text") {
  auto rejects = [](const std::string& text) { return !check_lean_structure(text).empty(); };
  CHECK(rejects("def broken ("));
  CHECK(rejects(""));
  CHECK(rejects("import Mathlib\n"));
  CHECK(rejects("def f (n : ℕ) : ℤ :=\n  let x : ℤ := n\n  (x + 1\n"));
  CHECK(rejects("def f (n : ℕ) : ℤ :=\n  let x : ℤ := n\n  x + 1"));
  CHECK(rejects("def f (n : ℕ) : ℤ :=\n  let x : ℤ := n\n  x + q\n"));
  CHECK(rejects("def f (n : ℕ) : ℤ :=\n  1\ndef f (n : ℕ) : ℤ :=\n  2\n"));
  CHECK(rejects("def f (n : ℕ) : ℤ :=\n  1\n@[OEIS := A000001, offset := 0, maxIndex := 1, derive := true]\n"));
  CHECK(rejects("def f (n : ℕ) : ℤ :=\n  1\n\ntheorem f_thm_0 : f 0 = 1 := by decide\ntheorem f_thm_0 : f 0 = 1 := by decide\n"));
  CHECK(rejects("#eval IO.println \"hi\"\ndef f (n : ℕ) : ℤ :=\n  1\n"));
  CHECK_FALSE(rejects("def f (n : ℕ) : ℤ :=\n  1\n"));
  auto diags = check_lean_structure("def f (n : ℕ) : ℤ :=\n  let x : ℤ := n\n  x + q\n");
  REQUIRE_FALSE(diags.empty());
  CHECK(diags[0].line == 3);
}
