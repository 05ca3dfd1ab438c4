#include "oeis/transpiler.hpp"

namespace oeis {

namespace {

// Folded constants stay well inside the evaluator's int64 fast path and below
// any budget with max_value_bits >= 64.
constexpr std::size_t kFoldBits = 62;

bool is_const(const Expr& e) { return e.kind() == NodeKind::Const; }
bool is_const(const Expr& e, std::int64_t v) { return is_const(e) && e.value() == Integer(v); }

bool may_error(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Div:
    case NodeKind::Mod:
    case NodeKind::Loop:
    case NodeKind::Loop2:
    case NodeKind::Compr: return true;
    default: break;
  }
  for (const auto& c : e.children()) {
    if (may_error(c)) return true;
  }
  return false;
}

// A leaf that evaluates without error and costs exactly one tick.
bool is_safe_leaf(const Expr& e) {
  return e.kind() == NodeKind::X || e.kind() == NodeKind::Y || (is_const(e) && e.value().bit_length() <= kFoldBits);
}

// f has exactly one free x and it is the first thing f evaluates, so
// substituting an expression for it keeps evaluation order and error kinds.
bool x_evaluated_first(const Expr& f) {
  switch (f.kind()) {
    case NodeKind::X: return true;
    case NodeKind::Const:
    case NodeKind::Y: return false;
    default: break;
  }
  std::size_t first;
  switch (f.kind()) {
    case NodeKind::Loop: first = 1; break;
    case NodeKind::Loop2: first = 2; break;
    case NodeKind::Compr: first = 1; break;
    default: first = 0; break;
  }
  if (!x_evaluated_first(f.child(first))) return false;
  for (std::size_t i = 0; i < f.children().size(); ++i) {
    if (i != first && !f.is_binder_slot(i) && count_free(f.child(i), NodeKind::X) != 0) return false;
  }
  return true;
}

Expr substitute_free(const Expr& e, const Expr& x_rep, const Expr& y_rep) {
  if (e.kind() == NodeKind::X) return x_rep;
  if (e.kind() == NodeKind::Y) return y_rep;
  if (e.is_leaf()) return e;
  std::vector<Expr> kids;
  kids.reserve(e.children().size());
  bool changed = false;
  for (std::size_t i = 0; i < e.children().size(); ++i) {
    if (e.is_binder_slot(i)) {
      kids.push_back(e.child(i));
    } else {
      kids.push_back(substitute_free(e.child(i), x_rep, y_rep));
      changed = changed || kids.back().identity() != e.child(i).identity();
    }
  }
  return changed ? e.with_children(std::move(kids)) : e;
}

std::optional<Integer> fold(NodeKind k, const Integer& a, const Integer& b) {
  if (a.bit_length() > kFoldBits || b.bit_length() > kFoldBits) return std::nullopt;
  Integer r;
  switch (k) {
    case NodeKind::Add: r = a + b; break;
    case NodeKind::Sub: r = a - b; break;
    case NodeKind::Mul: r = a * b; break;
    case NodeKind::Div:
      if (b.is_zero()) return std::nullopt;
      r = Integer::floor_div(a, b);
      break;
    case NodeKind::Mod:
      if (b.is_zero()) return std::nullopt;
      r = Integer::floor_mod(a, b);
      break;
    default: return std::nullopt;
  }
  if (r.bit_length() > kFoldBits) return std::nullopt;
  return r;
}

class Rewriter {
 public:
  explicit Rewriter(const OptimizeOptions& o) : opts_(o) {}

  Expr pass(const Expr& e) {
    if (e.is_leaf()) return e;
    std::vector<Expr> kids;
    kids.reserve(e.children().size());
    bool changed = false;
    for (const auto& c : e.children()) {
      kids.push_back(pass(c));
      changed = changed || kids.back().identity() != c.identity();
    }
    Expr node = changed ? e.with_children(std::move(kids)) : e;
    return local(node);
  }

 private:
  Expr local(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::Add:
      case NodeKind::Sub:
      case NodeKind::Mul:
      case NodeKind::Div:
      case NodeKind::Mod: return binary(e);
      case NodeKind::Cond:
        if (is_const(e.child(0))) return e.child(0).value().sign() <= 0 ? e.child(1) : e.child(2);
        return e;
      case NodeKind::Loop: return loop(e);
      default: return e;
    }
  }

  Expr binary(const Expr& e) {
    const Expr& a = e.child(0);
    const Expr& b = e.child(1);
    if (is_const(a) && is_const(b)) {
      if (auto r = fold(e.kind(), a.value(), b.value())) return Expr::constant(*r);
    }
    switch (e.kind()) {
      case NodeKind::Add:
        if (is_const(b, 0)) return a;
        if (is_const(a, 0)) return b;
        break;
      case NodeKind::Sub:
        if (is_const(b, 0)) return a;
        break;
      case NodeKind::Mul:
        if (is_const(b, 1)) return a;
        if (is_const(a, 1)) return b;
        if (is_const(b, 0) && !may_error(a)) return b;
        if (is_const(a, 0) && !may_error(b)) return a;
        break;
      default: break;
    }
    return e;
  }

  Expr loop(const Expr& e) {
    const Expr& count = e.child(1);
    if (!is_const(count)) return e;
    const Integer& c = count.value();
    if (c.sign() < 0) return e.child(2);
    if (c > Integer(opts_.max_unroll)) return e;
    const Expr& body = e.child(0);
    Expr acc = e.child(2);
    const std::int64_t n = *c.to_int64();
    for (std::int64_t i = 1; i <= n; ++i) {
      if (!is_safe_leaf(acc) && !x_evaluated_first(body)) return e;
      acc = substitute_free(body, acc, Expr::constant(i));
      if (acc.size() > opts_.max_unrolled_size || acc.depth() > kMaxExprDepth) return e;
    }
    return acc;
  }

  OptimizeOptions opts_;
};

}  // namespace

Expr optimize(const Expr& e, const OptimizeOptions& opts) {
  Rewriter rw(opts);
  Expr cur = e;
  for (;;) {
    Expr next = rw.pass(cur);
    if (next == cur) return next;
    cur = std::move(next);
  }
}

}  // namespace oeis
