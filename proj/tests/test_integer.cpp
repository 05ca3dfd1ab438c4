#include <random>

#include "doctest.h"
#include "oeis/integer.hpp"

using oeis::Integer;

namespace {

Integer big(const char* s) { return *Integer::from_string(s); }

__int128 floor_div128(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string to_string128(__int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string s;
  while (u) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  return neg ? "-" + s : s;
}

}  // namespace

TEST_CASE("decimal round trip") {
  for (const char* s : {"0", "1", "-1", "9223372036854775807", "-9223372036854775808", "9223372036854775808",
                        "-9223372036854775809", "123456789012345678901234567890"}) {
    CHECK(Integer::from_string(s)->to_string() == s);
  }
  CHECK_FALSE(Integer::from_string("").has_value());
  CHECK_FALSE(Integer::from_string("-").has_value());
  CHECK_FALSE(Integer::from_string("12a").has_value());
  CHECK_FALSE(Integer::from_string("1.5").has_value());
  CHECK_FALSE(Integer::from_string(" 1").has_value());
}

TEST_CASE("representation is canonical across the int64 boundary") {
  Integer max = INT64_MAX;
  Integer over = max + 1;
  CHECK_FALSE(over.is_small());
  CHECK((over - 1).is_small());
  CHECK(over - 1 == max);
  CHECK(big("-9223372036854775808").is_small());
  CHECK(big("00042") == Integer(42));
}

TEST_CASE("floor division and modulo follow the floor law") {
  CHECK(Integer::floor_div(7, 2) == 3);
  CHECK(Integer::floor_div(-7, 2) == -4);
  CHECK(Integer::floor_div(7, -2) == -4);
  CHECK(Integer::floor_div(-7, -2) == 3);
  CHECK(Integer::floor_mod(-7, 2) == 1);
  CHECK(Integer::floor_mod(7, -2) == -1);
  CHECK(Integer::floor_div(INT64_MIN, -1).to_string() == "9223372036854775808");
  CHECK(Integer::floor_mod(INT64_MIN, -1) == 0);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> d(-1'000'000'000'000LL, 1'000'000'000'000LL);
  for (int i = 0; i < 2000; ++i) {
    Integer a = d(rng), b = d(rng);
    if (b.is_zero()) continue;
    Integer q = Integer::floor_div(a, b), r = Integer::floor_mod(a, b);
    CHECK(q * b + r == a);
    if (b.sign() > 0) CHECK((r.sign() >= 0 && r < b));
    else CHECK((r.sign() <= 0 && r > b));
  }
}

TEST_CASE("small arithmetic agrees with 128-bit reference") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5000; ++i) {
    std::int64_t a = static_cast<std::int64_t>(rng()), b = static_cast<std::int64_t>(rng());
    if (i % 3 == 0) b >>= 40;
    Integer A = a, B = b;
    CHECK((A + B).to_string() == to_string128(static_cast<__int128>(a) + b));
    CHECK((A - B).to_string() == to_string128(static_cast<__int128>(a) - b));
    CHECK((A * B).to_string() == to_string128(static_cast<__int128>(a) * b));
    if (b != 0) CHECK(Integer::floor_div(A, B).to_string() == to_string128(floor_div128(a, b)));
  }
}

TEST_CASE("big arithmetic identities") {
  Integer a = big("340282366920938463463374607431768211457");  // 2^128 + 1
  Integer b = big("-18446744073709551617");                  // -(2^64 + 1)
  CHECK(Integer::floor_div(a * b, b) == a);
  CHECK(Integer::floor_mod(a * b, b) == 0);
  CHECK((a + b) - b == a);
  CHECK(a.bit_length() == 129);
  CHECK(b.bit_length() == 65);
  CHECK(b.sign() == -1);
  CHECK(-b == big("18446744073709551617"));
  CHECK(a > b);
  CHECK(Integer(0).bit_length() == 0);
  CHECK(Integer(-1).bit_length() == 1);
}
