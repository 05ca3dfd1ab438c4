#include <regex>
#include <set>

#include "oeis/transpiler.hpp"

namespace oeis {

namespace {

const std::regex kImport(R"(^import [A-Za-z_][A-Za-z0-9_.]*$)");
const std::regex kAttribute(
    R"(^@\[OEIS := A[0-9]{6,7}, offset := -?[0-9]+, maxIndex := -?[0-9]+, derive := (true|false)\]$)");
const std::regex kDefMain(R"(^def ([A-Za-z_][A-Za-z0-9_]*) \((n : ℕ|x y : ℤ)\) : ℤ :=$)");
const std::regex kDefMatch(R"(^def ([A-Za-z_][A-Za-z0-9_]*) : (ℕ → ℤ → ℤ|ℕ → ℤ → ℤ → ℤ × ℤ|ℕ → ℕ → ℤ → ℤ)$)");
const std::regex kArm(R"(^  \| .+ =>( .+)?$)");
const std::regex kTheorem(
    R"(^theorem ([A-Za-z_][A-Za-z0-9_]*) : ([A-Za-z_][A-Za-z0-9_]*) ([0-9]+) = ([0-9]+|\(-[0-9]+\)) := by \S.*$)");
const std::regex kIdent(R"([A-Za-z_][A-Za-z0-9_.]*)");
const std::regex kLocal(R"(^(t[0-9]+|let|if|then|else|fuel|k|acc|m|u|v|p|p\.1|p\.2|x|y|n|_|Int\.toNat|Int\.fdiv|Int\.fmod)$)");

void check_balance(std::string_view text, std::vector<LeanDiagnostic>& diags) {
  std::vector<std::pair<char, std::size_t>> stack;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') ++i;
      --i;
      continue;
    }
    if (c == '(' || c == '[' || c == '{') stack.emplace_back(c, line);
    if (c == ')' || c == ']' || c == '}') {
      char want = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (stack.empty() || stack.back().first != want) {
        diags.push_back({line, std::string("unbalanced '") + c + "'"});
        return;
      }
      stack.pop_back();
    }
  }
  for (const auto& [c, l] : stack) diags.push_back({l, std::string("unclosed '") + c + "'"});
}

}  // namespace

std::vector<LeanDiagnostic> check_lean_structure(std::string_view text) {
  std::vector<LeanDiagnostic> diags;
  if (text.empty()) {
    diags.push_back({0, "empty source"});
    return diags;
  }
  if (text.back() != '\n') diags.push_back({0, "source is not newline-terminated"});
  check_balance(text, diags);

  std::set<std::string> defined;
  std::set<std::string> theorems;
  enum class Block { None, Plain, Match } block = Block::None;
  std::string current_def;
  bool seen_decl = false;
  bool pending_attribute = false;
  bool saw_main = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;

    if (line.empty()) {
      block = Block::None;
      continue;
    }
    if (line.rfind("--", 0) == 0) continue;
    std::smatch m;
    if (line[0] == ' ') {
      if (block == Block::None) {
        diags.push_back({line_no, "indented line outside a definition"});
        continue;
      }
      if (block == Block::Match && line.rfind("  |", 0) == 0 && !std::regex_match(line, kArm)) {
        diags.push_back({line_no, "malformed match arm"});
      }
      std::string body = line;
      if (auto arrow = body.find("=>"); body.rfind("  |", 0) == 0 && arrow != std::string::npos) {
        body = body.substr(arrow + 2);  // patterns bind names; only check the arm body
      }
      if (auto let = body.find("let "); let != std::string::npos) {
        std::smatch lm;
        static const std::regex kLet(R"(let ([A-Za-z_][A-Za-z0-9_]*)( : .)?.*:=)");
        if (!std::regex_search(body, lm, kLet)) diags.push_back({line_no, "malformed let binding"});
      }
      for (auto it = std::sregex_iterator(body.begin(), body.end(), kIdent); it != std::sregex_iterator(); ++it) {
        std::string id = it->str();
        if (std::regex_match(id, kLocal) || defined.count(id) != 0 || id == current_def) continue;
        diags.push_back({line_no, "unknown identifier '" + id + "'"});
      }
      continue;
    }

    block = Block::None;
    if (pending_attribute && line.rfind("def ", 0) != 0) {
      diags.push_back({line_no, "attribute header must be followed by a definition"});
      pending_attribute = false;
    }
    if (line.rfind("import ", 0) == 0) {
      if (!std::regex_match(line, kImport)) diags.push_back({line_no, "malformed import"});
      if (seen_decl) diags.push_back({line_no, "import after declarations"});
      continue;
    }
    seen_decl = true;
    if (line.rfind("@[", 0) == 0) {
      if (!std::regex_match(line, kAttribute)) diags.push_back({line_no, "malformed OEIS attribute header"});
      pending_attribute = true;
      continue;
    }
    if (line.rfind("def ", 0) == 0) {
      bool main_form = std::regex_match(line, m, kDefMain);
      if (!main_form && !std::regex_match(line, m, kDefMatch)) {
        diags.push_back({line_no, "unrecognized definition header"});
        continue;
      }
      current_def = m[1].str();
      if (!defined.insert(current_def).second) diags.push_back({line_no, "duplicate definition '" + current_def + "'"});
      block = main_form ? Block::Plain : Block::Match;
      if (pending_attribute && !(main_form && line.find("(n : ℕ)") != std::string::npos)) {
        diags.push_back({line_no, "attribute header must precede the main definition"});
      }
      saw_main = saw_main || (main_form && line.find("(n : ℕ)") != std::string::npos);
      pending_attribute = false;
      continue;
    }
    if (line.rfind("theorem ", 0) == 0) {
      if (!std::regex_match(line, m, kTheorem)) {
        diags.push_back({line_no, "unrecognized theorem shape"});
        continue;
      }
      if (!theorems.insert(m[1].str()).second) diags.push_back({line_no, "duplicate theorem '" + m[1].str() + "'"});
      if (defined.count(m[2].str()) == 0) {
        diags.push_back({line_no, "theorem about undefined function '" + m[2].str() + "'"});
      }
      continue;
    }
    diags.push_back({line_no, "unrecognized top-level line"});
  }
  if (pending_attribute) diags.push_back({line_no, "attribute header at end of file"});
  if (!saw_main && theorems.empty()) diags.push_back({0, "no definition found"});
  return diags;
}

}  // namespace oeis
