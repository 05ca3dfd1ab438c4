#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <gmp.h>

namespace oeis {

// Arbitrary-precision integer with an inline int64 fast path. Values that fit
// in int64 never allocate; larger ones live in an immutable GMP limb buffer
// shared through an atomic intrusive count, so copies are cheap.
class Integer {
 public:
  Integer() = default;
  Integer(std::int64_t v) : small_(v) {}  // NOLINT(google-explicit-constructor)
  Integer(const Integer& o) : small_(o.small_), big_(o.big_) {
    if (big_) big_->refs.fetch_add(1, std::memory_order_relaxed);
  }
  Integer(Integer&& o) noexcept : small_(o.small_), big_(o.big_) { o.big_ = nullptr; }
  Integer& operator=(const Integer& o) {
    Integer tmp(o);
    swap(tmp);
    return *this;
  }
  Integer& operator=(Integer&& o) noexcept {
    Integer tmp(std::move(o));
    swap(tmp);
    return *this;
  }
  ~Integer() {
    if (big_) release();
  }
  void swap(Integer& o) noexcept {
    std::swap(small_, o.small_);
    std::swap(big_, o.big_);
  }

  static std::optional<Integer> from_string(std::string_view text);

  bool is_small() const { return big_ == nullptr; }
  std::optional<std::int64_t> to_int64() const;
  std::string to_string() const;

  int sign() const {
    if (is_small()) return (small_ > 0) - (small_ < 0);
    return big_sign();
  }
  bool is_zero() const { return is_small() && small_ == 0; }
  // Number of bits of |v|; 0 for zero.
  std::size_t bit_length() const;

  friend Integer operator+(const Integer& a, const Integer& b) {
    std::int64_t r;
    if (a.is_small() && b.is_small() && !__builtin_add_overflow(a.small_, b.small_, &r)) return Integer(r);
    return slow_add(a, b);
  }
  friend Integer operator-(const Integer& a, const Integer& b) {
    std::int64_t r;
    if (a.is_small() && b.is_small() && !__builtin_sub_overflow(a.small_, b.small_, &r)) return Integer(r);
    return slow_sub(a, b);
  }
  friend Integer operator*(const Integer& a, const Integer& b) {
    std::int64_t r;
    if (a.is_small() && b.is_small() && !__builtin_mul_overflow(a.small_, b.small_, &r)) return Integer(r);
    return slow_mul(a, b);
  }
  Integer operator-() const { return Integer(0) - *this; }

  // Floor division and remainder; divisor must be nonzero.
  static Integer floor_div(const Integer& a, const Integer& b);
  static Integer floor_mod(const Integer& a, const Integer& b);

  friend bool operator==(const Integer& a, const Integer& b) {
    if (a.is_small() && b.is_small()) return a.small_ == b.small_;
    return slow_equal(a, b);
  }
  friend std::strong_ordering operator<=>(const Integer& a, const Integer& b) {
    if (a.is_small() && b.is_small()) return a.small_ <=> b.small_;
    return slow_compare(a, b);
  }

 private:
  struct Big {
    mpz_t z;
    std::atomic<long> refs{1};
    Big() { mpz_init(z); }
    ~Big() { mpz_clear(z); }
    Big(const Big&) = delete;
    Big& operator=(const Big&) = delete;
  };

  int big_sign() const;
  static Integer slow_add(const Integer& a, const Integer& b);
  static Integer slow_sub(const Integer& a, const Integer& b);
  static Integer slow_mul(const Integer& a, const Integer& b);
  static bool slow_equal(const Integer& a, const Integer& b);
  static std::strong_ordering slow_compare(const Integer& a, const Integer& b);

  // Result of a GMP computation; demotes to small when it fits.
  // Takes ownership of a freshly computed value with refs == 1.
  static Integer from_big(std::unique_ptr<Big> big);
  void release();
  // Sets `out` to this value (reads the small or big representation).
  void load(mpz_t out) const;

  std::int64_t small_ = 0;
  Big* big_ = nullptr;
};

}  // namespace oeis
