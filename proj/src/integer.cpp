#include "oeis/integer.hpp"

#include <limits>

namespace oeis {

namespace {

bool fits_int64(const mpz_t z) { return mpz_fits_slong_p(z) != 0 && sizeof(long) == 8; }

}  // namespace

Integer Integer::from_big(std::unique_ptr<Big> big) {
  if (fits_int64(big->z)) return Integer(static_cast<std::int64_t>(mpz_get_si(big->z)));
  Integer r;
  r.big_ = big.release();
  return r;
}

void Integer::release() {
  if (big_->refs.fetch_sub(1, std::memory_order_acq_rel) == 1) delete big_;
  big_ = nullptr;
}

void Integer::load(mpz_t out) const {
  if (big_) {
    mpz_set(out, big_->z);
  } else {
    mpz_set_si(out, static_cast<long>(small_));
  }
}

std::optional<Integer> Integer::from_string(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (start == text.size()) return std::nullopt;
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
  }
  std::string digits(text.substr(text[0] == '+' ? 1 : 0));
  auto big = std::make_unique<Big>();
  if (mpz_set_str(big->z, digits.c_str(), 10) != 0) return std::nullopt;
  return from_big(std::move(big));
}

std::optional<std::int64_t> Integer::to_int64() const {
  if (is_small()) return small_;
  return std::nullopt;
}

std::string Integer::to_string() const {
  if (is_small()) return std::to_string(small_);
  std::string out(mpz_sizeinbase(big_->z, 10) + 2, '\0');
  mpz_get_str(out.data(), 10, big_->z);
  out.resize(std::char_traits<char>::length(out.c_str()));
  return out;
}

int Integer::big_sign() const { return mpz_sgn(big_->z); }

std::size_t Integer::bit_length() const {
  if (is_small()) {
    if (small_ == 0) return 0;
    std::uint64_t mag = small_ < 0 ? ~static_cast<std::uint64_t>(small_) + 1 : static_cast<std::uint64_t>(small_);
    return 64 - static_cast<std::size_t>(__builtin_clzll(mag));
  }
  return mpz_sizeinbase(big_->z, 2);
}

Integer Integer::slow_add(const Integer& a, const Integer& b) {
  auto big = std::make_unique<Big>();
  mpz_t x, y;
  mpz_init(x);
  mpz_init(y);
  a.load(x);
  b.load(y);
  mpz_add(big->z, x, y);
  mpz_clear(x);
  mpz_clear(y);
  return from_big(std::move(big));
}

Integer Integer::slow_sub(const Integer& a, const Integer& b) {
  auto big = std::make_unique<Big>();
  mpz_t x, y;
  mpz_init(x);
  mpz_init(y);
  a.load(x);
  b.load(y);
  mpz_sub(big->z, x, y);
  mpz_clear(x);
  mpz_clear(y);
  return from_big(std::move(big));
}

Integer Integer::slow_mul(const Integer& a, const Integer& b) {
  auto big = std::make_unique<Big>();
  mpz_t x, y;
  mpz_init(x);
  mpz_init(y);
  a.load(x);
  b.load(y);
  mpz_mul(big->z, x, y);
  mpz_clear(x);
  mpz_clear(y);
  return from_big(std::move(big));
}

Integer Integer::floor_div(const Integer& a, const Integer& b) {
  if (a.is_small() && b.is_small() &&
      !(a.small_ == std::numeric_limits<std::int64_t>::min() && b.small_ == -1)) {
    std::int64_t q = a.small_ / b.small_;
    if ((a.small_ % b.small_ != 0) && ((a.small_ < 0) != (b.small_ < 0))) --q;
    return Integer(q);
  }
  auto big = std::make_unique<Big>();
  mpz_t x, y;
  mpz_init(x);
  mpz_init(y);
  a.load(x);
  b.load(y);
  mpz_fdiv_q(big->z, x, y);
  mpz_clear(x);
  mpz_clear(y);
  return from_big(std::move(big));
}

Integer Integer::floor_mod(const Integer& a, const Integer& b) {
  if (a.is_small() && b.is_small()) {
    if (b.small_ == -1) return Integer(0);
    std::int64_t r = a.small_ % b.small_;
    if (r != 0 && ((r < 0) != (b.small_ < 0))) r += b.small_;
    return Integer(r);
  }
  auto big = std::make_unique<Big>();
  mpz_t x, y;
  mpz_init(x);
  mpz_init(y);
  a.load(x);
  b.load(y);
  mpz_fdiv_r(big->z, x, y);
  mpz_clear(x);
  mpz_clear(y);
  return from_big(std::move(big));
}

bool Integer::slow_equal(const Integer& a, const Integer& b) {
  if (a.is_small() != b.is_small()) return false;  // representations are canonical
  return mpz_cmp(a.big_->z, b.big_->z) == 0;
}

std::strong_ordering Integer::slow_compare(const Integer& a, const Integer& b) {
  int c;
  if (a.is_small()) {
    c = -mpz_cmp_si(b.big_->z, static_cast<long>(a.small_));
  } else if (b.is_small()) {
    c = mpz_cmp_si(a.big_->z, static_cast<long>(b.small_));
  } else {
    c = mpz_cmp(a.big_->z, b.big_->z);
  }
  return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

}  // namespace oeis
