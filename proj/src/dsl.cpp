#include "oeis/dsl.hpp"

#include <algorithm>

namespace oeis {

LexError::LexError(std::size_t offset_, std::string found_)
    : std::runtime_error("lexical error at offset " + std::to_string(offset_) + ": unexpected '" + found_ + "'"),
      offset(offset_),
      found(std::move(found_)) {}

ParseError::ParseError(std::size_t offset_, std::string expected_, std::string found_)
    : std::runtime_error("parse error at offset " + std::to_string(offset_) + ": expected " + expected_ + ", found " +
                         found_),
      offset(offset_),
      expected(std::move(expected_)),
      found(std::move(found_)) {}

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Const: return "const";
    case NodeKind::X: return "x";
    case NodeKind::Y: return "y";
    case NodeKind::Add: return "+";
    case NodeKind::Sub: return "-";
    case NodeKind::Mul: return "*";
    case NodeKind::Div: return "div";
    case NodeKind::Mod: return "mod";
    case NodeKind::Cond: return "cond";
    case NodeKind::Loop: return "loop";
    case NodeKind::Loop2: return "loop2";
    case NodeKind::Compr: return "compr";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Expr

Expr Expr::make(NodeKind k, Integer v, std::vector<Expr> children) {
  std::size_t size = 1;
  std::size_t depth = 0;
  for (const auto& c : children) {
    size += c.size();
    depth = std::max(depth, c.depth());
  }
  return Expr(std::make_shared<const Node>(Node{k, std::move(v), std::move(children), size, depth + 1}));
}

Expr Expr::constant(Integer v) { return make(NodeKind::Const, std::move(v), {}); }
Expr Expr::x() { return make(NodeKind::X, 0, {}); }
Expr Expr::y() { return make(NodeKind::Y, 0, {}); }

Expr Expr::binary(NodeKind k, Expr lhs, Expr rhs) {
  if (k != NodeKind::Add && k != NodeKind::Sub && k != NodeKind::Mul && k != NodeKind::Div && k != NodeKind::Mod) {
    throw std::invalid_argument("Expr::binary: not a binary operator");
  }
  return make(k, 0, {std::move(lhs), std::move(rhs)});
}

Expr Expr::cond(Expr scrutinee, Expr nonpos, Expr pos) {
  return make(NodeKind::Cond, 0, {std::move(scrutinee), std::move(nonpos), std::move(pos)});
}

Expr Expr::loop(Expr body, Expr count, Expr init) {
  return make(NodeKind::Loop, 0, {std::move(body), std::move(count), std::move(init)});
}

Expr Expr::loop2(Expr f, Expr g, Expr count, Expr init_u, Expr init_v) {
  return make(NodeKind::Loop2, 0, {std::move(f), std::move(g), std::move(count), std::move(init_u), std::move(init_v)});
}

Expr Expr::compr(Expr predicate, Expr index) {
  return make(NodeKind::Compr, 0, {std::move(predicate), std::move(index)});
}

Expr Expr::with_children(std::vector<Expr> children) const {
  if (children.size() != node_->children.size()) throw std::invalid_argument("Expr::with_children: arity mismatch");
  return make(node_->kind, node_->value, std::move(children));
}

bool Expr::is_binder_slot(std::size_t i) const {
  switch (kind()) {
    case NodeKind::Loop:
    case NodeKind::Compr: return i == 0;
    case NodeKind::Loop2: return i <= 1;
    default: return false;
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  if (a.kind() == NodeKind::Const) return a.value() == b.value();
  const auto& ca = a.children();
  const auto& cb = b.children();
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (!(ca[i] == cb[i])) return false;
  }
  return true;
}

std::size_t count_nodes(const Expr& e, NodeKind k) {
  std::size_t n = e.kind() == k ? 1 : 0;
  for (const auto& c : e.children()) n += count_nodes(c, k);
  return n;
}

std::size_t count_free(const Expr& e, NodeKind var) {
  if (e.kind() == var) return 1;
  std::size_t n = 0;
  for (std::size_t i = 0; i < e.children().size(); ++i) {
    if (!e.is_binder_slot(i)) n += count_free(e.child(i), var);
  }
  return n;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string describe_char(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u >= 0x20 && u < 0x7f) return std::string(1, c);
  static constexpr char hex[] = "0123456789abcdef";
  return std::string("\\x") + hex[u >> 4] + hex[u & 15];
}

}  // namespace

std::vector<Token> tokenize(std::string_view src, ConstMode mode) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](TokenKind k, std::size_t begin, std::size_t end) {
    out.push_back(Token{k, Span{begin, end}, std::string(src.substr(begin, end - begin)), 0});
  };
  while (i < src.size()) {
    char c = src[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    if (c >= '0' && c <= '9') {
      while (i < src.size() && src[i] >= '0' && src[i] <= '9') ++i;
      std::string_view digits = src.substr(begin, i - begin);
      if (mode == ConstMode::Strict && !(digits == "0" || digits == "1" || digits == "2")) {
        throw LexError(begin, std::string(digits));
      }
      push(TokenKind::Const, begin, i);
      out.back().value = *Integer::from_string(digits);
      continue;
    }
    if (is_ident_start(c)) {
      while (i < src.size() && is_ident_char(src[i])) ++i;
      std::string_view word = src.substr(begin, i - begin);
      TokenKind k = TokenKind::Ident;
      if (word == "x") k = TokenKind::VarX;
      else if (word == "y") k = TokenKind::VarY;
      else if (word == "div") k = TokenKind::Div;
      else if (word == "mod") k = TokenKind::Mod;
      push(k, begin, i);
      continue;
    }
    TokenKind k;
    switch (c) {
      case '+': k = TokenKind::Plus; break;
      case '-': k = TokenKind::Minus; break;
      case '*': k = TokenKind::Star; break;
      case '(': k = TokenKind::LParen; break;
      case ')': k = TokenKind::RParen; break;
      case ',': k = TokenKind::Comma; break;
      case '\\': k = TokenKind::LambdaHead; break;
      case '.': k = TokenKind::Dot; break;
      default: throw LexError(begin, describe_char(c));
    }
    ++i;
    push(k, begin, i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

constexpr std::size_t kMaxNesting = 256;

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::size_t source_len) : toks_(std::move(tokens)), end_offset_(source_len) {}

  Expr program() {
    Expr e = expr();
    if (pos_ != toks_.size()) fail("end of input");
    return e;
  }

 private:
  const Token* peek() const { return pos_ < toks_.size() ? &toks_[pos_] : nullptr; }
  bool at(TokenKind k) const { return pos_ < toks_.size() && toks_[pos_].kind == k; }

  [[noreturn]] void fail(const std::string& expected) const {
    if (pos_ >= toks_.size()) throw ParseError(end_offset_, expected, "end of input");
    throw ParseError(toks_[pos_].span.begin, expected, "'" + toks_[pos_].text + "'");
  }

  void expect(TokenKind k, const char* what) {
    if (!at(k)) fail(what);
    ++pos_;
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxNesting) p_.fail("shallower nesting (limit " + std::to_string(kMaxNesting) + ")");
    }
    ~DepthGuard() { --p_.depth_; }
    Parser& p_;
  };

  void check_depth(const Expr& e) const {
    if (e.depth() > kMaxExprDepth) fail("a smaller expression (depth limit " + std::to_string(kMaxExprDepth) + ")");
  }

  Expr expr() {
    DepthGuard guard(*this);
    Expr lhs = mul();
    while (at(TokenKind::Plus) || at(TokenKind::Minus)) {
      NodeKind k = at(TokenKind::Plus) ? NodeKind::Add : NodeKind::Sub;
      ++pos_;
      lhs = Expr::binary(k, std::move(lhs), mul());
      check_depth(lhs);
    }
    return lhs;
  }

  Expr mul() {
    Expr lhs = atom();
    while (at(TokenKind::Star) || at(TokenKind::Div) || at(TokenKind::Mod)) {
      NodeKind k = at(TokenKind::Star) ? NodeKind::Mul : at(TokenKind::Div) ? NodeKind::Div : NodeKind::Mod;
      ++pos_;
      lhs = Expr::binary(k, std::move(lhs), atom());
      check_depth(lhs);
    }
    return lhs;
  }

  Expr atom() {
    const Token* t = peek();
    if (t == nullptr) fail("expression");
    switch (t->kind) {
      case TokenKind::Const: ++pos_; return Expr::constant(t->value);
      case TokenKind::VarX: ++pos_; return Expr::x();
      case TokenKind::VarY: ++pos_; return Expr::y();
      case TokenKind::LParen: {
        ++pos_;
        Expr e = expr();
        expect(TokenKind::RParen, "')'");
        return e;
      }
      case TokenKind::Ident: return call();
      default: fail("expression");
    }
  }

  Expr lambda() {
    expect(TokenKind::LambdaHead, "lambda head '\\(x,y).'");
    expect(TokenKind::LParen, "'(' after '\\'");
    expect(TokenKind::VarX, "binder 'x'");
    expect(TokenKind::Comma, "','");
    expect(TokenKind::VarY, "binder 'y'");
    expect(TokenKind::RParen, "')'");
    expect(TokenKind::Dot, "'.'");
    return expr();
  }

  Expr call() {
    const Token& name = toks_[pos_];
    int lambdas;
    int plain;
    if (name.text == "loop") {
      lambdas = 1, plain = 2;
    } else if (name.text == "loop2") {
      lambdas = 2, plain = 3;
    } else if (name.text == "compr") {
      lambdas = 1, plain = 1;
    } else if (name.text == "cond") {
      lambdas = 0, plain = 3;
    } else {
      fail("one of loop, loop2, compr, cond");
    }
    ++pos_;
    DepthGuard guard(*this);
    expect(TokenKind::LParen, "'('");
    std::vector<Expr> args;
    for (int i = 0; i < lambdas + plain; ++i) {
      if (i > 0) expect(TokenKind::Comma, ("',' (" + name.text + " takes " + std::to_string(lambdas + plain) +
                                           " arguments)").c_str());
      args.push_back(i < lambdas ? lambda() : expr());
    }
    expect(TokenKind::RParen, ("')' (" + name.text + " takes " + std::to_string(lambdas + plain) + " arguments)").c_str());
    if (name.text == "loop") return Expr::loop(args[0], args[1], args[2]);
    if (name.text == "loop2") return Expr::loop2(args[0], args[1], args[2], args[3], args[4]);
    if (name.text == "compr") return Expr::compr(args[0], args[1]);
    return Expr::cond(args[0], args[1], args[2]);
  }

  std::vector<Token> toks_;
  std::size_t end_offset_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
};

}  // namespace

Expr parse_program(std::string_view source, ConstMode mode) {
  return Parser(tokenize(source, mode), source.size()).program();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Mod: return 2;
    default: return 3;
  }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  print(e, out);
  if (parens) out += ')';
}

void print_lambda(const Expr& body, std::string& out) {
  out += "\\(x,y).";
  print(body, out);
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Const:
      if (e.value().sign() < 0) {
        out += "(0 - " + (-e.value()).to_string() + ")";
      } else {
        out += e.value().to_string();
      }
      return;
    case NodeKind::X: out += 'x'; return;
    case NodeKind::Y: out += 'y'; return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Mod: {
      int p = precedence(e);
      print_wrapped(e.child(0), precedence(e.child(0)) < p, out);
      out += ' ';
      out += node_kind_name(e.kind());
      out += ' ';
      print_wrapped(e.child(1), precedence(e.child(1)) <= p, out);
      return;
    }
    case NodeKind::Cond:
      out += "cond(";
      print(e.child(0), out);
      out += ", ";
      print(e.child(1), out);
      out += ", ";
      print(e.child(2), out);
      out += ')';
      return;
    case NodeKind::Loop:
      out += "loop(";
      print_lambda(e.child(0), out);
      out += ", ";
      print(e.child(1), out);
      out += ", ";
      print(e.child(2), out);
      out += ')';
      return;
    case NodeKind::Loop2:
      out += "loop2(";
      print_lambda(e.child(0), out);
      out += ", ";
      print_lambda(e.child(1), out);
      for (std::size_t i = 2; i < 5; ++i) {
        out += ", ";
        print(e.child(i), out);
      }
      out += ')';
      return;
    case NodeKind::Compr:
      out += "compr(";
      print_lambda(e.child(0), out);
      out += ", ";
      print(e.child(1), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string print_program(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

}  // namespace oeis
