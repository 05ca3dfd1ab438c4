#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oeis/dsl.hpp"
#include "oeis/integer.hpp"

namespace oeis {

// ---------------------------------------------------------------------------
// Optimizer

struct OptimizeOptions {
  // Loops with a constant count in [0, max_unroll] are unrolled.
  int max_unroll = 4;
  // Unrolling is abandoned when the unrolled tree would exceed this size.
  std::size_t max_unrolled_size = 2048;
};

// Rewrites to a fixpoint: constant folding, algebraic identities, constant
// cond scrutinees, small-loop unrolling. For every env and every budget with
// max_value_bits >= 64, a Value of the input is the same Value of the output
// with no more ticks, and non-budget errors are preserved.
Expr optimize(const Expr& e, const OptimizeOptions& opts = {});

// ---------------------------------------------------------------------------
// Lean emission

enum class LeanKind { Definition, TheoremBlock, AttributeHeader, File };

struct LeanSource {
  std::string text;
  LeanKind kind = LeanKind::Definition;
  std::string name;
};

struct TheoremSpec {
  std::string func_name;
  Integer index;
  Integer value;
  std::string tactic = "decide";
};

struct DefinitionMeta {
  std::string tag;
  std::int64_t offset = 0;
  std::int64_t max_index = 0;
  bool derive = true;
};

enum class CodegenMode { Direct, Simplified };

struct CodegenOptions {
  std::uint64_t compr_fuel = 100000;
  // Minimum node count of a repeated subtree to be let-bound (simplified mode).
  std::size_t cse_min_size = 5;
};

enum class TranspileErrorCode { InvalidIdentifier, EmptySpecList, MixedFunctionNames, DuplicateIndex, InvalidTag, InvalidMeta };

class TranspileError : public std::runtime_error {
 public:
  TranspileError(TranspileErrorCode code, const std::string& what) : std::runtime_error(what), code(code) {}
  TranspileErrorCode code;
};

bool is_identifier(std::string_view s);
bool is_oeis_tag(std::string_view s);

// The expression the code generator actually lowers for the given mode.
Expr codegen_input(const Expr& e, CodegenMode mode);

LeanSource dsl_to_lean(const Expr& e, std::string_view name, CodegenMode mode = CodegenMode::Simplified,
                       const std::optional<DefinitionMeta>& meta = std::nullopt, const CodegenOptions& opts = {});

// One theorem line per spec, ascending by index.
LeanSource emit_theorems(std::span<const TheoremSpec> specs);

LeanSource emit_attribute_header(const DefinitionMeta& meta);

// import line, definition, blank line, theorem block.
LeanSource assemble_file(const LeanSource& definition, const std::optional<LeanSource>& theorems,
                         const std::vector<std::string>& imports = {"Mathlib"});

// ---------------------------------------------------------------------------
// Structural checker for the emitted-file grammar. Accepts exactly the shapes
// the generator produces; it is not a Lean elaborator.

struct LeanDiagnostic {
  std::size_t line = 0;  // 1-based; 0 for whole-file issues
  std::string message;
};

std::vector<LeanDiagnostic> check_lean_structure(std::string_view text);

}  // namespace oeis
