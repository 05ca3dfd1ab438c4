// Serial vs OpenMP evaluation kernels on a seeded random program grid.

#include <chrono>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"

#include "oeis/evaluator.hpp"
#include "oeis/parallel.hpp"
#include "oeis/random_program.hpp"

namespace {

template <class F>
double seconds(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compare serial and OpenMP evaluation kernels"};
  std::size_t programs = 500, inputs = 32;
  std::uint64_t seed = 7, ticks = 100'000;
  int repeats = 3;
  app.add_option("--programs", programs, "Random programs in the grid")->check(CLI::PositiveNumber);
  app.add_option("--inputs", inputs, "Inputs x = 0..N-1 per program")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--ticks", ticks, "Tick budget per evaluation")->check(CLI::PositiveNumber);
  app.add_option("--repeats", repeats, "Timed repetitions (best is reported)")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  std::vector<oeis::Expr> progs;
  progs.reserve(programs);
  for (std::size_t i = 0; i < programs; ++i) progs.push_back(oeis::random_program(rng));
  std::vector<oeis::Integer> xs;
  for (std::size_t i = 0; i < inputs; ++i) xs.emplace_back(static_cast<std::int64_t>(i));
  oeis::Budget budget{ticks, 4096};

  std::vector<oeis::EvalOutcome> serial, parallel;
  double best_serial = 1e300, best_parallel = 1e300;
  for (int r = 0; r < repeats; ++r) {
    best_serial = std::min(best_serial, seconds([&] { serial = oeis::parallel::evaluate_grid_serial(progs, xs, budget); }));
    best_parallel = std::min(best_parallel, seconds([&] { parallel = oeis::parallel::evaluate_grid(progs, xs, budget); }));
  }
  bool identical = serial == parallel;

  std::uint64_t ticks_total = 0;
  for (const auto& o : serial) ticks_total += o.ticks_used;

  std::cout << std::fixed << std::setprecision(4);
  std::cout << "threads         " << oeis::parallel::max_threads() << "\n";
  std::cout << "evaluations     " << serial.size() << "\n";
  std::cout << "ticks           " << ticks_total << "\n";
  std::cout << "serial_s        " << best_serial << "\n";
  std::cout << "parallel_s      " << best_parallel << "\n";
  std::cout << "speedup         " << (best_parallel > 0 ? best_serial / best_parallel : 0.0) << "\n";
  std::cout << "identical       " << (identical ? "yes" : "NO") << "\n";
  return identical ? 0 : 1;
}
