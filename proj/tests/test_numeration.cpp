#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gmpxx.h>

#include <algorithm>
#include <random>
#include <vector>

#include "recsolve/numeration.hpp"

using namespace recsolve;

namespace {

NumerationSystem fib_sys() {
  return NumerationSystem{Recurrence{{1, 1}, {1, 2}, "fibonacci"}};
}

NumerationSystem bin_sys() {
  return NumerationSystem{Recurrence{{2}, {1}, "binary"}};
}

// Exact-weight stratum M: members of the <=M list absent from the <=(M-1)
// list.  Both lists are sorted, so a linear merge suffices.
std::vector<mpz_class> stratum(const std::vector<mpz_class>& le_m,
                               const std::vector<mpz_class>& le_m1) {
  std::vector<mpz_class> out;
  std::set_difference(le_m.begin(), le_m.end(), le_m1.begin(), le_m1.end(),
                      std::back_inserter(out));
  return out;
}

std::vector<mpz_class> to_mpz(const std::vector<long>& v) {
  std::vector<mpz_class> out;
  out.reserve(v.size());
  for (long x : v) out.emplace_back(x);
  return out;
}

// Frozen from an independent elementary enumeration (greedy digit
// extraction plus binary popcount, exhaustive over n <= 10^6).  Note 128
// belongs to the total-weight-4 stratum (128 = 89+34+5 with one binary
// digit), and 7 = 5+2 and 56 = 55+1 both land at total weight 5.
const std::vector<long> kExact2 = {1, 2, 8};
const std::vector<long> kExact3 = {3, 4, 5, 16, 34, 144};
const std::vector<long> kExact4 = {6,  9,  10, 13,  18,  21,  24, 32,
                                   36, 64, 68, 128, 256, 288, 1024};
const std::vector<long> kExact5 = {
    7,    11,   12,   14,  17,  20,  22,  26,  35,  37,
    40,   42,   48,   56,  65,  66,  76,  89,  96,  97,
    136,  145,  146,  152, 160, 257, 272, 322, 384, 385,
    521,  576,  610,  644, 1026, 1042, 1152, 1600, 2584, 2592};

}  // namespace

TEST_CASE("base conditions are validated exactly") {
  CHECK_NOTHROW(fib_sys());
  CHECK_NOTHROW(bin_sys());

  // Third-order base: G_0=1, G_1=2, G_2=4, then G_k = sum of previous three.
  NumerationSystem tri{Recurrence{{1, 1, 1}, {1, 2, 4}, "tribonacci"}};
  CHECK(tri.term(3) == 7);
  CHECK(tri.term(4) == 13);
  CHECK(tri.term(5) == 24);

  // Wrong seed values break the defining identities.
  CHECK_THROWS_AS((NumerationSystem{Recurrence{{1, 1}, {1, 3}, "bad"}}),
                  Error);
  CHECK_THROWS_AS((NumerationSystem{Recurrence{{1, 1}, {2, 3}, "bad"}}),
                  Error);
  try {
    NumerationSystem bad{Recurrence{{1, 1}, {1, 3}, "bad"}};
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code == Error::Code::config);
  }
  // Order-1 base with c_1 = 1 never grows: 1, 2, 2, 2, ...
  CHECK_THROWS_AS((NumerationSystem{Recurrence{{1}, {1}, "flat"}}), Error);
  // Negative coefficients are outside the admissible family.
  CHECK_THROWS_AS((NumerationSystem{Recurrence{{1, -1}, {1, 2}, "neg"}}),
                  Error);
}

TEST_CASE("greedy expansion reproduces known digit patterns") {
  NumerationSystem Z = fib_sys();
  NumerationSystem B = bin_sys();

  DigitExpansion e32 = greedy_expand(Z, 32);
  REQUIRE(e32.digits.size() == 7);
  CHECK(e32.digits[6] == 1);
  CHECK(e32.digits[4] == 1);
  CHECK(e32.digits[2] == 1);
  CHECK(e32.weight() == 3);
  CHECK(e32.value(Z) == 32);
  CHECK(e32.digits[0] == 0);
  CHECK(e32.digits[1] == 0);
  CHECK(e32.digits[3] == 0);
  CHECK(e32.digits[5] == 0);

  DigitExpansion e1024 = greedy_expand(B, 1024);
  REQUIRE(e1024.digits.size() == 11);
  CHECK(e1024.digits[10] == 1);
  CHECK(e1024.weight() == 1);
  CHECK(e1024.value(B) == 1024);

  DigitExpansion e2584 = greedy_expand(Z, 2584);
  CHECK(e2584.weight() == 1);
  CHECK(e2584.digits.size() == 17);  // 2584 is the index-16 term
  CHECK(greedy_expand(B, 2584).weight() == 4);

  DigitExpansion e1 = greedy_expand(Z, 1);
  CHECK(e1.digits == std::vector<long>{1});
  CHECK(e1.value(Z) == 1);

  CHECK_THROWS_AS(greedy_expand(Z, 0), Error);
  CHECK_THROWS_AS(greedy_expand(B, -5), Error);
}

TEST_CASE("hamming weights of landmark values") {
  NumerationSystem Z = fib_sys();
  NumerationSystem B = bin_sys();
  CHECK(hamming_weight(Z, 144) == 1);
  CHECK(hamming_weight(B, 144) == 2);
  CHECK(hamming_weight(Z, 1) + hamming_weight(B, 1) == 2);
  CHECK(hamming_weight(Z, 128) == 3);
  CHECK(hamming_weight(Z, 7) == 2);
  CHECK(hamming_weight(Z, 56) == 2);
  for (long m = 0; m <= 60; ++m) CHECK(hamming_weight(B, B.term(m)) == 1);
  for (long k = 0; k <= 40; ++k) CHECK(hamming_weight(Z, Z.term(k)) == 1);
}

TEST_CASE("regularity is the prefix-sum condition") {
  NumerationSystem Z = fib_sys();
  NumerationSystem B = bin_sys();

  // Adjacent nonzero Fibonacci digits sum to the next term: not regular.
  CHECK(!is_regular(Z, {0, 0, 0, 1, 1}));
  CHECK(!is_regular(Z, {1, 1}));
  // Single allowed digits are regular.
  CHECK(is_regular(Z, {1}));
  CHECK(is_regular(Z, {0, 1}));
  CHECK(is_regular(B, {1}));
  CHECK(is_regular(Z, {0, 0, 1, 0, 1, 0, 1}));  // the expansion of 32
  // Digit at or above the ratio bound fails the first prefix already.
  CHECK(!is_regular(B, {2}));
  CHECK(!is_regular(Z, {2}));
  // Negative digits are never regular.
  CHECK(!is_regular(Z, {-1, 0, 1}));
  // The empty expansion (zero) is vacuously regular.
  CHECK(is_regular(Z, {}));
  // Trailing zeros change nothing.
  CHECK(is_regular(Z, {0, 1, 0, 0}));
}

TEST_CASE("round trip on the first million integers") {
  NumerationSystem Z = fib_sys();
  NumerationSystem B = bin_sys();
  for (long n = 1; n <= 1000000; ++n) {
    mpz_class nz(n);
    DigitExpansion ez = greedy_expand(Z, nz);
    if (ez.value(Z) != nz) {
      CAPTURE(n);
      REQUIRE(ez.value(Z) == nz);
    }
    if (!is_regular(Z, ez.digits)) {
      CAPTURE(n);
      REQUIRE(is_regular(Z, ez.digits));
    }
    DigitExpansion eb = greedy_expand(B, nz);
    if (eb.value(B) != nz) {
      CAPTURE(n);
      REQUIRE(eb.value(B) == nz);
    }
    if (!is_regular(B, eb.digits)) {
      CAPTURE(n);
      REQUIRE(is_regular(B, eb.digits));
    }
  }
}

TEST_CASE("round trip on generic bases") {
  NumerationSystem tri{Recurrence{{1, 1, 1}, {1, 2, 4}, "tribonacci"}};
  // Digits can reach 3 here: G_0=1, G_1=4, G_2=13, G_3=43, ...
  NumerationSystem wide{Recurrence{{3, 1}, {1, 4}, "wide"}};
  for (long n = 1; n <= 20000; ++n) {
    mpz_class nz(n);
    DigitExpansion a = greedy_expand(tri, nz);
    REQUIRE(a.value(tri) == nz);
    REQUIRE(is_regular(tri, a.digits));
    DigitExpansion b = greedy_expand(wide, nz);
    REQUIRE(b.value(wide) == nz);
    REQUIRE(is_regular(wide, b.digits));
  }
  // The wide base really does use digits above 1.
  bool saw_big = false;
  for (long n = 1; n <= 100 && !saw_big; ++n) {
    for (long d : greedy_expand(wide, mpz_class(n)).digits)
      if (d >= 2) saw_big = true;
  }
  CHECK(saw_big);
}

TEST_CASE("random round trips at large magnitudes") {
  NumerationSystem Z = fib_sys();
  NumerationSystem B = bin_sys();
  std::mt19937_64 rng(20260816u);
  std::uniform_int_distribution<long> dist(1, 1000000000L);
  for (int i = 0; i < 3000; ++i) {
    mpz_class n(dist(rng));
    DigitExpansion e = greedy_expand(Z, n);
    REQUIRE(e.value(Z) == n);
    REQUIRE(is_regular(Z, e.digits));
    REQUIRE(e.weight() == hamming_weight(Z, n));
    REQUIRE(greedy_expand(B, n).weight() == hamming_weight(B, n));
  }
}

TEST_CASE("exhaustive low-weight lists at desk scale") {
  NumerationSystem Z = fib_sys();
  NumerationSystem B = bin_sys();
  const mpz_class bound = 1000000;

  std::vector<mpz_class> le2 =
      enumerate_low_weight(Z, B, 2, BruteStrategy{bound});
  std::vector<mpz_class> le3 =
      enumerate_low_weight(Z, B, 3, BruteStrategy{bound});
  std::vector<mpz_class> le4 =
      enumerate_low_weight(Z, B, 4, BruteStrategy{bound});
  std::vector<mpz_class> le5 =
      enumerate_low_weight(Z, B, 5, BruteStrategy{bound});

  CHECK(le2 == to_mpz(kExact2));  // total weight below 2 is impossible
  CHECK(stratum(le3, le2) == to_mpz(kExact3));
  CHECK(stratum(le4, le3) == to_mpz(kExact4));
  std::vector<mpz_class> s5 = stratum(le5, le4);
  CHECK(s5 == to_mpz(kExact5));
  REQUIRE(s5.size() == 40);
  CHECK(s5[s5.size() - 2] == 2584);
  CHECK(s5.back() == 2592);

  // The <=M lists are nested and sorted.
  CHECK(std::includes(le5.begin(), le5.end(), le4.begin(), le4.end()));
  CHECK(std::includes(le4.begin(), le4.end(), le3.begin(), le3.end()));
  CHECK(std::is_sorted(le5.begin(), le5.end()));

  // Range-split parallel enumeration merges deterministically.
  std::vector<mpz_class> seq =
      enumerate_low_weight(Z, B, 4, BruteStrategy{mpz_class(100000), 1});
  std::vector<mpz_class> par =
      enumerate_low_weight(Z, B, 4, BruteStrategy{mpz_class(100000), 3});
  CHECK(seq == par);

  CHECK_THROWS_AS(enumerate_low_weight(Z, B, 1, BruteStrategy{bound}), Error);
}

TEST_CASE("single-term sweep matches the exhaustive search") {
  NumerationSystem Z = fib_sys();
  NumerationSystem B = bin_sys();

  // All single right-side terms up to 2^253, filtered by total weight and
  // by the top index of the left-side expansion.
  std::vector<mpz_class> sweep4 =
      enumerate_low_weight(Z, B, 4, DigitSearchStrategy{364, 253});
  std::vector<mpz_class> sweep3 =
      enumerate_low_weight(Z, B, 3, DigitSearchStrategy{364, 253});
  std::vector<mpz_class> sweep5 =
      enumerate_low_weight(Z, B, 5, DigitSearchStrategy{364, 253});

  // Powers of two whose expansion has exactly three nonzero digits.
  std::vector<mpz_class> weight3 = stratum(sweep4, sweep3);
  CHECK(weight3 == to_mpz({32, 64, 128, 256, 1024}));
  // ... and none with exactly four.
  CHECK(stratum(sweep5, sweep4).empty());

  // Wherever the sweep and brute force both apply they agree.
  std::vector<mpz_class> brute4 =
      enumerate_low_weight(Z, B, 4, BruteStrategy{mpz_class(1000000)});
  std::vector<mpz_class> sweep4_small =
      enumerate_low_weight(Z, B, 4, DigitSearchStrategy{40, 19});
  std::vector<mpz_class> brute4_pow2;
  for (const mpz_class& n : brute4) {
    mpz_class m = n;
    while (m % 2 == 0) m /= 2;
    if (m == 1 && n > 1) brute4_pow2.push_back(n);
  }
  CHECK(sweep4_small == brute4_pow2);

  // The top-index cap genuinely filters.
  std::vector<mpz_class> capped =
      enumerate_low_weight(Z, B, 4, DigitSearchStrategy{8, 19});
  CHECK(capped == to_mpz({2, 4, 8, 16, 32, 64}));
}
