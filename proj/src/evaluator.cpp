#include "oeis/evaluator.hpp"

#include <algorithm>
#include <numeric>

namespace oeis {

std::string_view eval_error_name(EvalError e) {
  switch (e) {
    case EvalError::DivByZero: return "DivByZero";
    case EvalError::NegativeComprIndex: return "NegativeComprIndex";
    case EvalError::BudgetExhausted: return "BudgetExhausted";
    case EvalError::Overflow: return "Overflow";
  }
  return "?";
}

namespace {

constexpr std::uint64_t kDeadlinePollMask = 4095;

class Machine {
 public:
  Machine(const Budget& b, std::optional<Deadline> d) : budget_(b), deadline_(d) {}

  EvalOutcome run(const Expr& e, const Env& env) {
    Integer v = eval(e, env);
    EvalOutcome out;
    out.ticks_used = std::min(ticks_, budget_.max_ticks);
    if (error_) {
      out.error = error_;
    } else {
      out.value = std::move(v);
    }
    return out;
  }

 private:
  bool failed() const { return error_.has_value(); }

  Integer fail(EvalError e) {
    if (!error_) error_ = e;
    return 0;
  }

  bool tick() {
    ++ticks_;
    if (ticks_ > budget_.max_ticks) {
      fail(EvalError::BudgetExhausted);
      return false;
    }
    if (deadline_ && (ticks_ & kDeadlinePollMask) == 0 && std::chrono::steady_clock::now() > *deadline_) {
      throw DeadlineExceeded();
    }
    return true;
  }

  Integer checked(Integer v) {
    if ((!v.is_small() || budget_.max_value_bits < 64) && v.bit_length() > budget_.max_value_bits) {
      return fail(EvalError::Overflow);
    }
    return v;
  }

  Integer eval(const Expr& e, const Env& env) {
    if (!tick()) return 0;
    switch (e.kind()) {
      case NodeKind::Const: return checked(e.value());
      case NodeKind::X: return env.x;
      case NodeKind::Y: return env.y;
      case NodeKind::Add:
      case NodeKind::Sub:
      case NodeKind::Mul:
      case NodeKind::Div:
      case NodeKind::Mod: {
        Integer a = eval(e.child(0), env);
        if (failed()) return 0;
        Integer b = eval(e.child(1), env);
        if (failed()) return 0;
        switch (e.kind()) {
          case NodeKind::Add: return checked(a + b);
          case NodeKind::Sub: return checked(a - b);
          case NodeKind::Mul:
            // Result of a multiplication has at least bits(a)+bits(b)-1 bits.
            if (a.bit_length() + b.bit_length() > budget_.max_value_bits + 1) return fail(EvalError::Overflow);
            return checked(a * b);
          case NodeKind::Div:
            if (b.is_zero()) return fail(EvalError::DivByZero);
            return checked(Integer::floor_div(a, b));
          default:
            if (b.is_zero()) return fail(EvalError::DivByZero);
            return checked(Integer::floor_mod(a, b));
        }
      }
      case NodeKind::Cond: {
        Integer s = eval(e.child(0), env);
        if (failed()) return 0;
        return eval(s.sign() <= 0 ? e.child(1) : e.child(2), env);
      }
      case NodeKind::Loop: {
        Integer n = eval(e.child(1), env);
        if (failed()) return 0;
        Integer v = eval(e.child(2), env);
        if (failed()) return 0;
        const Expr& body = e.child(0);
        Env inner{std::move(v), 1};
        for (Integer i = 1; i <= n; i = i + 1) {
          inner.y = i;
          Integer next = eval(body, inner);
          if (failed()) return 0;
          inner.x = std::move(next);
        }
        return inner.x;
      }
      case NodeKind::Loop2: {
        Integer n = eval(e.child(2), env);
        if (failed()) return 0;
        Integer u = eval(e.child(3), env);
        if (failed()) return 0;
        Integer v = eval(e.child(4), env);
        if (failed()) return 0;
        Env inner{std::move(u), std::move(v)};
        for (Integer i = 1; i <= n; i = i + 1) {
          Integer nu = eval(e.child(0), inner);
          if (failed()) return 0;
          Integer nv = eval(e.child(1), inner);
          if (failed()) return 0;
          inner.x = std::move(nu);
          inner.y = std::move(nv);
        }
        return inner.x;
      }
      case NodeKind::Compr: {
        Integer k = eval(e.child(1), env);
        if (failed()) return 0;
        if (k.sign() < 0) return fail(EvalError::NegativeComprIndex);
        const Expr& pred = e.child(0);
        Integer hits = 0;
        Env inner{0, 0};
        for (;; inner.x = inner.x + 1) {
          Integer p = eval(pred, inner);
          if (failed()) return 0;
          if (p.sign() <= 0) {
            if (hits == k) return inner.x;
            hits = hits + 1;
          }
        }
      }
    }
    return 0;
  }

  Budget budget_;
  std::optional<Deadline> deadline_;
  std::uint64_t ticks_ = 0;
  std::optional<EvalError> error_;
};

void validate(const Budget& b) {
  if (b.max_ticks == 0 || b.max_value_bits == 0) throw std::invalid_argument("budget fields must be positive");
}

}  // namespace

EvalOutcome evaluate(const Expr& e, const Env& env, const Budget& budget, std::optional<Deadline> deadline) {
  validate(budget);
  return Machine(budget, deadline).run(e, env);
}

std::vector<EvalOutcome> sequence_values(const Expr& e, std::span<const Integer> indices, const Budget& budget,
                                         std::optional<Deadline> deadline) {
  validate(budget);
  std::vector<EvalOutcome> out;
  out.reserve(indices.size());
  for (const auto& n : indices) out.push_back(Machine(budget, deadline).run(e, Env{n, 0}));
  return out;
}

MatchReport check_against(const Expr& e, std::span<const std::pair<Integer, std::optional<Integer>>> pairs,
                          const Budget& budget, std::optional<Deadline> deadline) {
  validate(budget);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pairs[a].first < pairs[b].first; });

  MatchReport report;
  for (std::size_t pos : order) {
    const auto& [n, expected] = pairs[pos];
    MatchRecord rec{n, Machine(budget, deadline).run(e, Env{n, 0}), expected, false};
    rec.match = rec.computed.ok() && (!expected || *rec.computed.value == *expected);
    bool stop = !rec.match;
    report.records.push_back(std::move(rec));
    if (stop) {
      report.all_match = false;
      report.first_mismatch = n;
      break;
    }
  }
  return report;
}

}  // namespace oeis
