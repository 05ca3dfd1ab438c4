#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "oeis/transpiler.hpp"

namespace oeis {

bool is_identifier(std::string_view s) {
  static constexpr std::string_view kKeywords[] = {
      "abbrev", "at",        "attribute", "by",          "calc",     "class",    "def",     "deriving",
      "do",     "else",      "end",       "example",     "from",     "fun",      "have",    "if",
      "import", "in",        "inductive", "instance",    "let",      "match",    "mutual",  "namespace",
      "noncomputable", "open", "partial", "private",     "protected", "return",  "section", "set_option",
      "show",   "structure", "then",      "theorem",     "universe", "unsafe",   "variable", "where",
      "with",   "Prop",      "Sort",      "Type"};
  if (s.empty() || s == "_") return false;
  if (std::find(std::begin(kKeywords), std::end(kKeywords), s) != std::end(kKeywords)) return false;
  auto start = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) { return start(c) || (c >= '0' && c <= '9'); });
}

bool is_oeis_tag(std::string_view s) {
  if (s.size() != 7 && s.size() != 8) return false;
  if (s[0] != 'A') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Expr codegen_input(const Expr& e, CodegenMode mode) { return mode == CodegenMode::Simplified ? optimize(e) : e; }

namespace {

// Lean operator levels: application binds tightest, then * (70), then + - (65).
enum Level { kAdd = 1, kMul = 2, kApp = 3, kAtom = 4 };

struct Rendered {
  std::string text;
  Level level;
};

std::string paren_if(const Rendered& r, bool wrap) { return wrap ? "(" + r.text + ")" : r.text; }

class Generator {
 public:
  Generator(std::string name, CodegenMode mode, const CodegenOptions& opts)
      : name_(std::move(name)), mode_(mode), opts_(opts) {}

  std::string run(const Expr& e) {
    Scope top;
    std::string body = scope_body(e, top, "  ");
    std::ostringstream out;
    if (uses_compr_) {
      out << "-- compr is a fuel-bounded search over at most " << opts_.compr_fuel
          << " candidates; past that horizon it returns the last candidate tried\n";
    }
    for (const auto& h : helpers_) out << h << "\n";
    header_pos_ = out.str().size();
    out << "def " << name_ << " (n : ℕ) : ℤ :=\n";
    if (count_free(e, NodeKind::X) > 0) out << "  let x : ℤ := n\n";
    if (count_free(e, NodeKind::Y) > 0) out << "  let y : ℤ := 0\n";
    out << body;
    return out.str();
  }

  // Offset where the main definition starts (attribute header goes here).
  std::size_t header_pos() const { return header_pos_; }

 private:
  struct Scope {
    std::map<std::string, std::string> bound;  // printed subtree -> let name
  };

  // Renders `e` as the final expression of a scope, preceded by let-bindings
  // for repeated subtrees in simplified mode. Each line gets `indent`.
  std::string scope_body(const Expr& e, Scope& scope, const std::string& indent) {
    std::ostringstream out;
    if (mode_ == CodegenMode::Simplified) {
      auto shared = shared_subtrees(e);
      int next = 1;
      for (const Expr* s : shared) {
        std::string def = render(*s, scope).text;
        std::string let_name = "t" + std::to_string(next++);
        out << indent << "let " << let_name << " := " << def << "\n";
        scope.bound.emplace(print_program(*s), let_name);
      }
    }
    out << indent << render(e, scope).text << "\n";
    return out.str();
  }

  // Subtrees of size >= cse_min_size occurring at least twice in the scope
  // (not descending into lambda bodies). Returned smallest first so that each
  // binding can refer to the earlier ones.
  std::vector<const Expr*> shared_subtrees(const Expr& root) const {
    struct Info {
      const Expr* expr;
      std::size_t count = 0;
    };
    std::map<std::string, Info> seen;
    std::vector<const Expr*> stack{&root};
    while (!stack.empty()) {
      const Expr* e = stack.back();
      stack.pop_back();
      if (e->size() >= opts_.cse_min_size) {
        auto& info = seen[print_program(*e)];
        info.expr = e;
        ++info.count;
      }
      for (std::size_t i = 0; i < e->children().size(); ++i) {
        if (!e->is_binder_slot(i)) stack.push_back(&e->child(i));
      }
    }
    std::vector<std::pair<std::string, Info>> cands(seen.begin(), seen.end());
    std::stable_sort(cands.begin(), cands.end(),
                     [](const auto& a, const auto& b) { return a.second.expr->size() > b.second.expr->size(); });
    std::map<std::string, std::size_t> effective;
    for (const auto& [k, info] : cands) effective[k] = info.count;
    std::vector<const Expr*> chosen;
    for (const auto& [key, info] : cands) {
      std::size_t c = effective[key];
      if (c < 2) continue;
      chosen.push_back(info.expr);
      // The c copies collapse into one definition: occurrences inside them
      // drop from c*m to m.
      std::map<std::string, std::size_t> inner;
      std::vector<const Expr*> st;
      for (std::size_t i = 0; i < info.expr->children().size(); ++i) {
        if (!info.expr->is_binder_slot(i)) st.push_back(&info.expr->child(i));
      }
      while (!st.empty()) {
        const Expr* e = st.back();
        st.pop_back();
        if (e->size() >= opts_.cse_min_size) ++inner[print_program(*e)];
        for (std::size_t i = 0; i < e->children().size(); ++i) {
          if (!e->is_binder_slot(i)) st.push_back(&e->child(i));
        }
      }
      for (const auto& [k, m] : inner) {
        auto it = effective.find(k);
        if (it != effective.end()) it->second -= std::min(it->second, (c - 1) * m);
      }
    }
    std::reverse(chosen.begin(), chosen.end());
    return chosen;
  }

  Rendered render(const Expr& e, const Scope& scope) {
    if (!scope.bound.empty() && e.size() >= opts_.cse_min_size) {
      auto it = scope.bound.find(print_program(e));
      if (it != scope.bound.end()) return {it->second, kAtom};
    }
    switch (e.kind()) {
      case NodeKind::Const:
        if (e.value().sign() < 0) return {"(" + e.value().to_string() + ")", kAtom};
        return {e.value().to_string(), kAtom};
      case NodeKind::X: return {"x", kAtom};
      case NodeKind::Y: return {"y", kAtom};
      case NodeKind::Add:
      case NodeKind::Sub:
      case NodeKind::Mul: {
        Level lvl = e.kind() == NodeKind::Mul ? kMul : kAdd;
        Rendered a = render(e.child(0), scope);
        Rendered b = render(e.child(1), scope);
        const char* op = e.kind() == NodeKind::Add ? " + " : e.kind() == NodeKind::Sub ? " - " : " * ";
        return {paren_if(a, a.level < lvl) + op + paren_if(b, b.level <= lvl), lvl};
      }
      case NodeKind::Div:
      case NodeKind::Mod: {
        Rendered a = render(e.child(0), scope);
        Rendered b = render(e.child(1), scope);
        const char* fn = e.kind() == NodeKind::Div ? "Int.fdiv " : "Int.fmod ";
        return {fn + paren_if(a, a.level < kAtom) + " " + paren_if(b, b.level < kAtom), kApp};
      }
      case NodeKind::Cond: {
        Rendered s = render(e.child(0), scope);
        Rendered a = render(e.child(1), scope);
        Rendered b = render(e.child(2), scope);
        return {"(if " + s.text + " ≤ 0 then " + a.text + " else " + b.text + ")", kAtom};
      }
      case NodeKind::Loop: {
        std::string helper = loop_helper(e.child(0));
        Rendered n = render(e.child(1), scope);
        Rendered init = render(e.child(2), scope);
        return {helper + " (Int.toNat " + paren_if(n, n.level < kAtom) + ") " + paren_if(init, init.level < kAtom), kApp};
      }
      case NodeKind::Loop2: {
        std::string helper = loop2_helper(e.child(0), e.child(1));
        Rendered n = render(e.child(2), scope);
        Rendered u = render(e.child(3), scope);
        Rendered v = render(e.child(4), scope);
        return {"(" + helper + " (Int.toNat " + paren_if(n, n.level < kAtom) + ") " + paren_if(u, u.level < kAtom) + " " +
                    paren_if(v, v.level < kAtom) + ").1",
                kAtom};
      }
      case NodeKind::Compr: {
        std::string helper = compr_helper(e.child(0));
        Rendered k = render(e.child(1), scope);
        return {helper + " " + std::to_string(opts_.compr_fuel) + " (Int.toNat " + paren_if(k, k.level < kAtom) + ") 0",
                kApp};
      }
    }
    return {"0", kAtom};
  }

  std::string lambda_scope(const Expr& body, const std::string& indent, const std::string& x_src,
                           const std::string& y_src) {
    std::ostringstream out;
    if (count_free(body, NodeKind::X) > 0) out << indent << "let x : ℤ := " << x_src << "\n";
    if (count_free(body, NodeKind::Y) > 0) out << indent << "let y : ℤ := " << y_src << "\n";
    Scope s;
    out << scope_body(body, s, indent);
    return out.str();
  }

  template <typename Build>
  std::string intern(const std::string& key, const std::string& kind, Build build) {
    auto it = helper_names_.find(key);
    if (it != helper_names_.end()) return it->second;
    std::string name = name_ + "_" + kind + "_" + std::to_string(++helper_count_);
    std::string text = build(name);  // may create nested helpers first
    helpers_.push_back(std::move(text));
    helper_names_.emplace(key, name);
    return name;
  }

  // `def <name> (x y : ℤ) : ℤ := <body>`
  std::string body_function(const std::string& name, const Expr& body) {
    Scope s;
    std::string inner = scope_body(body, s, "  ");
    return "def " + name + " (x y : ℤ) : ℤ :=\n" + inner;
  }

  std::string loop_helper(const Expr& body) {
    return intern("loop:" + print_program(body), "loop", [&](const std::string& name) {
      std::string inner = lambda_scope(body, "    ", name + " k acc", "(k : ℤ) + 1");
      return "def " + name + " : ℕ → ℤ → ℤ\n  | 0, acc => acc\n  | k + 1, acc =>\n" + inner;
    });
  }

  std::string loop2_helper(const Expr& f, const Expr& g) {
    return intern("loop2:" + print_program(f) + "|" + print_program(g), "loop2", [&](const std::string& name) {
      std::string fn_f = name + "_f";
      std::string fn_g = name + "_g";
      helpers_.push_back(body_function(fn_f, f));
      helpers_.push_back(body_function(fn_g, g));
      return "def " + name + " : ℕ → ℤ → ℤ → ℤ × ℤ\n  | 0, u, v => (u, v)\n  | k + 1, u, v =>\n    let p := " + name +
             " k u v\n    (" + fn_f + " p.1 p.2, " + fn_g + " p.1 p.2)\n";
    });
  }

  std::string compr_helper(const Expr& pred) {
    uses_compr_ = true;
    return intern("compr:" + print_program(pred), "compr", [&](const std::string& name) {
      std::string fn_p = name + "_p";
      helpers_.push_back(body_function(fn_p, pred));
      return "def " + name + " : ℕ → ℕ → ℤ → ℤ\n  | 0, _, m => m\n  | fuel + 1, k, m =>\n    if " + fn_p +
             " m 0 ≤ 0 then\n      if k = 0 then m else " + name + " fuel (k - 1) (m + 1)\n    else " + name +
             " fuel k (m + 1)\n";
    });
  }

  std::string name_;
  CodegenMode mode_;
  CodegenOptions opts_;
  std::vector<std::string> helpers_;
  std::map<std::string, std::string> helper_names_;
  int helper_count_ = 0;
  bool uses_compr_ = false;
  std::size_t header_pos_ = 0;
};

void validate_meta(const DefinitionMeta& meta) {
  if (!is_oeis_tag(meta.tag)) throw TranspileError(TranspileErrorCode::InvalidTag, "invalid OEIS tag: " + meta.tag);
  if (meta.derive && meta.max_index < meta.offset) {
    throw TranspileError(TranspileErrorCode::InvalidMeta, "maxIndex must be >= offset when derive is set");
  }
}

}  // namespace

LeanSource dsl_to_lean(const Expr& e, std::string_view name, CodegenMode mode, const std::optional<DefinitionMeta>& meta,
                       const CodegenOptions& opts) {
  if (!is_identifier(name)) {
    throw TranspileError(TranspileErrorCode::InvalidIdentifier, "invalid Lean identifier: " + std::string(name));
  }
  std::optional<LeanSource> header;
  if (meta) header = emit_attribute_header(*meta);
  Generator gen{std::string(name), mode, opts};
  std::string text = gen.run(codegen_input(e, mode));
  if (header) text.insert(gen.header_pos(), header->text);
  return LeanSource{std::move(text), LeanKind::Definition, std::string(name)};
}

LeanSource emit_attribute_header(const DefinitionMeta& meta) {
  validate_meta(meta);
  std::ostringstream out;
  out << "@[OEIS := " << meta.tag << ", offset := " << meta.offset << ", maxIndex := " << meta.max_index
      << ", derive := " << (meta.derive ? "true" : "false") << "]\n";
  return LeanSource{out.str(), LeanKind::AttributeHeader, ""};
}

LeanSource emit_theorems(std::span<const TheoremSpec> specs) {
  if (specs.empty()) throw TranspileError(TranspileErrorCode::EmptySpecList, "no theorems to emit");
  const std::string& fn = specs.front().func_name;
  if (!is_identifier(fn)) throw TranspileError(TranspileErrorCode::InvalidIdentifier, "invalid Lean identifier: " + fn);
  std::vector<const TheoremSpec*> sorted;
  for (const auto& s : specs) {
    if (s.func_name != fn) {
      throw TranspileError(TranspileErrorCode::MixedFunctionNames, "theorems for both " + fn + " and " + s.func_name);
    }
    if (s.index.sign() < 0) throw TranspileError(TranspileErrorCode::InvalidMeta, "negative theorem index");
    sorted.push_back(&s);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->index < b->index; });
  std::string out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const TheoremSpec& s = *sorted[i];
    if (i > 0 && sorted[i - 1]->index == s.index) {
      throw TranspileError(TranspileErrorCode::DuplicateIndex, "duplicate theorem index " + s.index.to_string());
    }
    std::string value = s.value.sign() < 0 ? "(" + s.value.to_string() + ")" : s.value.to_string();
    std::string idx = s.index.to_string();
    out += "theorem " + fn + "_thm_" + idx + " : " + fn + " " + idx + " = " + value + " := by " + s.tactic + "\n";
  }
  return LeanSource{std::move(out), LeanKind::TheoremBlock, fn};
}

LeanSource assemble_file(const LeanSource& definition, const std::optional<LeanSource>& theorems,
                         const std::vector<std::string>& imports) {
  std::string out;
  for (const auto& m : imports) out += "import " + m + "\n";
  if (!imports.empty()) out += "\n";
  out += definition.text;
  if (theorems && !theorems->text.empty()) {
    out += "\n";
    out += theorems->text;
  }
  return LeanSource{std::move(out), LeanKind::File, definition.name};
}

}  // namespace oeis
