#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "oeis/dsl.hpp"
#include "oeis/integer.hpp"

namespace oeis {

struct Env {
  Integer x;
  Integer y;
};

struct Budget {
  std::uint64_t max_ticks = 1'000'000;
  std::uint64_t max_value_bits = 4096;
};

enum class EvalError { DivByZero, NegativeComprIndex, BudgetExhausted, Overflow };

std::string_view eval_error_name(EvalError e);

struct EvalOutcome {
  std::optional<Integer> value;
  std::optional<EvalError> error;
  std::uint64_t ticks_used = 0;

  bool ok() const { return value.has_value(); }
  friend bool operator==(const EvalOutcome&, const EvalOutcome&) = default;
};

// Wall-clock cutoff, checked periodically during evaluation. Expiry aborts
// the evaluation by throwing DeadlineExceeded.
using Deadline = std::chrono::steady_clock::time_point;

class DeadlineExceeded : public std::runtime_error {
 public:
  DeadlineExceeded() : std::runtime_error("deadline exceeded") {}
};

// Budget must have both fields positive; throws std::invalid_argument otherwise.
EvalOutcome evaluate(const Expr& e, const Env& env, const Budget& budget = {},
                     std::optional<Deadline> deadline = std::nullopt);

// a(n) = evaluate(e, {x:=n, y:=0}); one fresh budget per index.
std::vector<EvalOutcome> sequence_values(const Expr& e, std::span<const Integer> indices, const Budget& budget = {},
                                         std::optional<Deadline> deadline = std::nullopt);

struct MatchRecord {
  Integer n;
  EvalOutcome computed;
  std::optional<Integer> expected;
  bool match = false;
};

struct MatchReport {
  std::vector<MatchRecord> records;
  bool all_match = true;
  std::optional<Integer> first_mismatch;
};

// Checks pairs in ascending index order, stopping at the first mismatch or
// evaluation error. Records without an expected value never mismatch unless
// evaluation fails.
MatchReport check_against(const Expr& e, std::span<const std::pair<Integer, std::optional<Integer>>> pairs,
                          const Budget& budget = {}, std::optional<Deadline> deadline = std::nullopt);

}  // namespace oeis
