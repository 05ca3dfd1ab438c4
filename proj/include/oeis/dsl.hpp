#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oeis/integer.hpp"

namespace oeis {

enum class ConstMode { Strict, Extended };

enum class TokenKind {
  Const,
  VarX,
  VarY,
  Plus,
  Minus,
  Star,
  Div,
  Mod,
  LParen,
  RParen,
  Comma,
  LambdaHead,
  Dot,
  Ident,
};

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Token {
  TokenKind kind;
  Span span;
  std::string text;  // source slice
  Integer value;     // Const payload
};

class LexError : public std::runtime_error {
 public:
  LexError(std::size_t offset, std::string found);
  std::size_t offset;
  std::string found;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string expected, std::string found);
  std::size_t offset;
  std::string expected;
  std::string found;
};

enum class NodeKind { Const, X, Y, Add, Sub, Mul, Div, Mod, Cond, Loop, Loop2, Compr };

std::string_view node_kind_name(NodeKind k);

// Immutable expression tree with structural sharing. Children order:
//   Add..Mod:  lhs, rhs
//   Cond:      scrutinee, if_nonpositive, otherwise
//   Loop:      body, count, init
//   Loop2:     body_f, body_g, count, init_u, init_v
//   Compr:     predicate, index
// Bodies of Loop/Loop2/Compr bind x and y.
class Expr {
 public:
  static Expr constant(Integer v);
  static Expr x();
  static Expr y();
  static Expr binary(NodeKind k, Expr lhs, Expr rhs);
  static Expr cond(Expr scrutinee, Expr nonpos, Expr pos);
  static Expr loop(Expr body, Expr count, Expr init);
  static Expr loop2(Expr f, Expr g, Expr count, Expr init_u, Expr init_v);
  static Expr compr(Expr predicate, Expr index);

  // Same kind and payload, new children.
  Expr with_children(std::vector<Expr> children) const;

  NodeKind kind() const { return node_->kind; }
  const Integer& value() const { return node_->value; }
  const std::vector<Expr>& children() const { return node_->children; }
  const Expr& child(std::size_t i) const { return node_->children[i]; }
  std::size_t size() const { return node_->size; }
  std::size_t depth() const { return node_->depth; }
  bool is_leaf() const { return node_->children.empty(); }
  // Whether child i is a lambda body (rebinding x and y).
  bool is_binder_slot(std::size_t i) const;
  const void* identity() const { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node {
    NodeKind kind;
    Integer value;
    std::vector<Expr> children;
    std::size_t size;
    std::size_t depth;
  };
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Expr make(NodeKind k, Integer v, std::vector<Expr> children);

  std::shared_ptr<const Node> node_;
};

// Parser output never exceeds this tree depth.
inline constexpr std::size_t kMaxExprDepth = 512;

std::vector<Token> tokenize(std::string_view source, ConstMode mode = ConstMode::Strict);
Expr parse_program(std::string_view source, ConstMode mode = ConstMode::Strict);
std::string print_program(const Expr& e);

// Number of nodes of the given kind anywhere in the tree.
std::size_t count_nodes(const Expr& e, NodeKind k);
// Whether x (resp. y) occurs free, i.e. outside any lambda body.
std::size_t count_free(const Expr& e, NodeKind var);

}  // namespace oeis
