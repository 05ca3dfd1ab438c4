#include "oeis/parallel.hpp"

#include <omp.h>

namespace oeis::parallel {

int max_threads() { return omp_get_max_threads(); }

namespace {

// evaluate() throws on a bad budget; that must happen outside a parallel region.
void validate(const Budget& b) {
  if (b.max_ticks == 0 || b.max_value_bits == 0) throw std::invalid_argument("budget fields must be positive");
}

}  // namespace

std::vector<EvalOutcome> sequence_values(const Expr& e, std::span<const Integer> indices, const Budget& budget) {
  validate(budget);
  std::vector<EvalOutcome> out(indices.size());
  const auto n = static_cast<std::ptrdiff_t>(indices.size());
  // Cost per index varies by orders of magnitude (loop counts grow with n).
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = evaluate(e, Env{indices[i], 0}, budget);
  }
  return out;
}

std::vector<EvalOutcome> evaluate_grid(std::span<const Expr> programs, std::span<const Integer> inputs,
                                       const Budget& budget) {
  validate(budget);
  const std::size_t width = inputs.size();
  std::vector<EvalOutcome> out(programs.size() * width);
  const auto cells = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t c = 0; c < cells; ++c) {
    const auto p = static_cast<std::size_t>(c) / width;
    const auto i = static_cast<std::size_t>(c) % width;
    out[c] = evaluate(programs[p], Env{inputs[i], 0}, budget);
  }
  return out;
}

std::vector<EvalOutcome> evaluate_grid_serial(std::span<const Expr> programs, std::span<const Integer> inputs,
                                              const Budget& budget) {
  std::vector<EvalOutcome> out;
  out.reserve(programs.size() * inputs.size());
  for (const auto& p : programs) {
    for (const auto& n : inputs) out.push_back(evaluate(p, Env{n, 0}, budget));
  }
  return out;
}

}  // namespace oeis::parallel
