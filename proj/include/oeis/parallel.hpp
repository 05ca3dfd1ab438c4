#pragma once

#include <span>
#include <vector>

#include "oeis/evaluator.hpp"

namespace oeis::parallel {

// OpenMP counterparts of the serial evaluator entry points. Results are
// identical to the serial versions element for element; the serial functions
// in evaluator.hpp stay the reference implementation.

std::vector<EvalOutcome> sequence_values(const Expr& e, std::span<const Integer> indices, const Budget& budget = {});

// outcomes[p * inputs.size() + i] = evaluate(programs[p], {x:=inputs[i], y:=0}).
std::vector<EvalOutcome> evaluate_grid(std::span<const Expr> programs, std::span<const Integer> inputs,
                                       const Budget& budget = {});

// Serial reference for evaluate_grid.
std::vector<EvalOutcome> evaluate_grid_serial(std::span<const Expr> programs, std::span<const Integer> inputs,
                                              const Budget& budget = {});

int max_threads();

}  // namespace oeis::parallel
