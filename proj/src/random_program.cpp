#include "oeis/random_program.hpp"

#include <array>

namespace oeis {

namespace {

class Gen {
 public:
  Gen(std::mt19937_64& rng, const RandomProgramOptions& o) : rng_(rng), o_(o) {}

  Expr leaf() {
    switch (pick(5)) {
      case 0: return Expr::constant(Integer(0));
      case 1: return Expr::constant(Integer(1));
      case 2: return Expr::constant(Integer(2));
      case 3: return Expr::x();
      default: return Expr::y();
    }
  }

  Expr tree(int depth, bool allow_binders) {
    if (depth <= 0) return leaf();
    std::array<int, 7> w = {o_.w_leaf, o_.w_arith, o_.w_divmod, o_.w_cond, allow_binders ? o_.w_loop : 0,
                            allow_binders ? o_.w_loop2 : 0, allow_binders ? o_.w_compr : 0};
    std::discrete_distribution<int> d(w.begin(), w.end());
    int c = depth - 1;
    switch (d(rng_)) {
      case 0: return leaf();
      case 1: {
        static constexpr NodeKind ops[] = {NodeKind::Add, NodeKind::Sub, NodeKind::Mul};
        NodeKind k = ops[pick(3)];
        Expr a = tree(c, allow_binders);
        return Expr::binary(k, a, tree(c, allow_binders));
      }
      case 2: {
        NodeKind k = pick(2) ? NodeKind::Div : NodeKind::Mod;
        Expr a = tree(c, allow_binders);
        return Expr::binary(k, a, tree(c, allow_binders));
      }
      case 3: {
        Expr s = tree(c, allow_binders);
        Expr a = tree(c, allow_binders);
        return Expr::cond(s, a, tree(c, allow_binders));
      }
      case 4: {
        Expr body = tree(c, true);
        Expr n = count(c);
        return Expr::loop(body, n, tree(c, true));
      }
      case 5: {
        Expr f = tree(c, true);
        Expr g = tree(c, true);
        Expr n = count(c);
        Expr u = tree(c, true);
        return Expr::loop2(f, g, n, u, tree(c, true));
      }
      default: {
        Expr p = tree(std::min(c, 3), false);
        return Expr::compr(p, count(c));
      }
    }
  }

 private:
  Expr count(int depth) { return tree(std::min(depth, o_.max_count_depth), false); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::mt19937_64& rng_;
  const RandomProgramOptions& o_;
};

}  // namespace

Expr random_program(std::mt19937_64& rng, const RandomProgramOptions& opts) {
  Gen g(rng, opts);
  return g.tree(opts.max_depth, true);
}

Expr random_predicate(std::mt19937_64& rng, int max_depth) {
  RandomProgramOptions opts;
  opts.w_leaf = 4;
  Gen g(rng, opts);
  return g.tree(max_depth, false);
}

}  // namespace oeis
