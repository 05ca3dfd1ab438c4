#pragma once

#include <cstdint>
#include <random>

#include "oeis/dsl.hpp"

namespace oeis {

struct RandomProgramOptions {
  int max_depth = 6;
  // Loop counts and compr indices are drawn from trees of at most this depth,
  // which keeps most programs inside the default tick budget.
  int max_count_depth = 1;
  // Relative weights; leaves are forced at depth 0.
  int w_leaf = 6;
  int w_arith = 10;  // + - *
  int w_divmod = 3;
  int w_cond = 2;
  int w_loop = 2;
  int w_loop2 = 1;
  int w_compr = 1;
};

// Deterministic for a given engine state. Constants are 0/1/2 only, so the
// output always parses in strict mode after printing.
Expr random_program(std::mt19937_64& rng, const RandomProgramOptions& opts = {});

// Predicate bodies for compr: loop-free trees of at most `max_depth`.
Expr random_predicate(std::mt19937_64& rng, int max_depth);

}  // namespace oeis
