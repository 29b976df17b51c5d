#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gmpxx.h>

#include "recsolve/recurrence.hpp"

using namespace recsolve;

namespace {

// Independent oracle: bisect for the largest real root of an exactly
// evaluable polynomial using only mpq sign evaluations.
mpq_class bisect_root(const QPoly& f, mpq_class lo, mpq_class hi, int steps) {
  int slo = sgn(f.eval_q(lo));
  REQUIRE(slo != 0);
  for (int i = 0; i < steps; ++i) {
    mpq_class mid = (lo + hi) / 2;
    int sm = sgn(f.eval_q(mid));
    if (sm == 0) return mid;
    if (sm == slo) lo = mid;
    else hi = mid;
  }
  return (lo + hi) / 2;
}

Recurrence fib() {
  // Convention: F_0 = 1, F_1 = 2, F_n = F_{n-1} + F_{n-2}.
  return Recurrence{{1, 1}, {1, 2}, "fibonacci"};
}

Recurrence pell() { return Recurrence{{2, 1}, {1, 2}, "pell"}; }

Recurrence pow2() { return Recurrence{{2}, {1}, "powers-of-two"}; }

Recurrence tribonacci() { return Recurrence{{1, 1, 1}, {1, 1, 2}, "tribonacci"}; }

}  // namespace

TEST_CASE("term iteration matches hand-computed values") {
  // Fibonacci with shifted start: 1, 2, 3, 5, 8, 13, 21, ...
  CHECK(fib().term(0) == 1);
  CHECK(fib().term(1) == 2);
  CHECK(fib().term(4) == 8);
  CHECK(fib().term(6) == 21);
  // Pell-type with start 1, 2: 1, 2, 5, 12, 29, 70, ...
  CHECK(pell().term(4) == 29);
  CHECK(pell().term(5) == 70);
  // Order 1: powers of two.
  CHECK(pow2().term(10) == 1024);
  CHECK(pow2().term(0) == 1);
  auto all = fib().terms_upto(10);
  REQUIRE(all.size() == 11);
  CHECK(all[10] == 144);
  for (size_t i = 2; i < all.size(); ++i)
    CHECK(all[i] == all[i - 1] + all[i - 2]);
}

TEST_CASE("characteristic polynomial") {
  QPoly f = fib().char_poly();
  CHECK(f.degree() == 2);
  CHECK(f.coeff(2) == 1);
  CHECK(f.coeff(1) == -1);
  CHECK(f.coeff(0) == -1);
  QPoly t = tribonacci().char_poly();
  CHECK(t.degree() == 3);
  CHECK(t.eval_q(mpq_class(2)) == 1);  // 8 - 4 - 2 - 1
}

TEST_CASE("admissibility screening") {
  CHECK(check_admissible(fib()).simple);
  CHECK(check_admissible(fib()).non_degenerate);
  // x^2 - 1 = (x-1)(x+1): simple but degenerate with ratio -1.
  Recurrence deg{{0, 1}, {1, 3}, "x2minus1"};
  auto a = check_admissible(deg);
  CHECK(a.simple);
  CHECK(!a.non_degenerate);
  REQUIRE(a.degeneracy_order.has_value());
  CHECK(*a.degeneracy_order == 2);
  CHECK(a.degeneracy_ratio == "-1");
  // (x-2)^2 = x^2 - 4x + 4: not simple.
  Recurrence dbl{{4, -4}, {1, 1}, "double-root"};
  CHECK(!check_admissible(dbl).simple);
  // x^2 + 1 roots +-i: ratio -1 (degenerate, order 2) -- also caught.
  Recurrence gauss{{0, -1}, {1, 1}, "gauss"};
  CHECK(!check_admissible(gauss).non_degenerate);
}

TEST_CASE("spectral analysis of the order-2 golden recurrence") {
  Spectral sp = spectral_analyze(fib());
  CHECK(sp.order == 2);
  CHECK(sp.alpha_gt_one);
  // alpha = (1+sqrt5)/2 with minimal polynomial x^2 - x - 1.
  CHECK(sp.alpha_min_poly.degree() == 2);
  CHECK(sp.alpha_min_poly.coeff(1) == -1);
  CHECK(sp.alpha_min_poly.coeff(0) == -1);
  Interval a = sp.alpha_r.at(128);
  CHECK(a.contains_q(mpq_class(0)) == false);
  CHECK(a.lo_d() > 1.618033);
  CHECK(a.hi_d() < 1.618034);
  // Second root has modulus 1/alpha ~ 0.618.
  Interval m2 = sp.alpha2_mod.at(128);
  CHECK(m2.lo_d() > 0.618033);
  CHECK(m2.hi_d() < 0.618034);
  // With start values 1, 2 the Binet expansion is
  //   U_n = u alpha^n + u2 beta^n,  u = (alpha+2)/(2alpha-1) = (5+3sqrt5)/10.
  Interval u = sp.u_abs.at(160);
  double want_u = (5.0 + 3.0 * 2.2360679774997896) / 10.0;  // 1.17082...
  CHECK(u.lo_d() > want_u - 1e-9);
  CHECK(u.hi_d() < want_u + 1e-9);
  // Tail constant C1 = |u2| = |(5-3sqrt5)/10| ~ 0.17082.
  Interval c1 = sp.c1_tail.at(160);
  CHECK(c1.lo_d() > want_u - 1.0 - 1e-9);
  CHECK(c1.hi_d() < want_u - 1.0 + 1e-9);
}

TEST_CASE("spectral analysis agrees with independent bisection oracle") {
  // Tribonacci dominant root: oracle by exact-sign bisection.
  Recurrence rec = tribonacci();
  mpq_class root =
      bisect_root(rec.char_poly(), mpq_class(18, 10), mpq_class(19, 10), 80);
  Spectral sp = spectral_analyze(rec);
  Interval a = sp.alpha_r.at(192);
  // Oracle accurate to 2^-80; enclosure must contain a tight bracket of it.
  CHECK(a.lo_d() <= mpq_class(root).get_d() + 1e-20);
  CHECK(a.hi_d() >= mpq_class(root).get_d() - 1e-20);
  CHECK(a.lo_d() > 1.83928675521416);
  CHECK(a.hi_d() < 1.83928675521417);
  CHECK(sp.alpha_min_poly.degree() == 3);
  // Minimal polynomial is the full characteristic x^3 - x^2 - x - 1.
  CHECK(sp.alpha_min_poly == rec.char_poly());
}

TEST_CASE("spectral rejects inadmissible inputs") {
  Recurrence deg{{0, 1}, {1, 3}, "x2minus1"};
  CHECK_THROWS_AS(spectral_analyze(deg), Error);
  Recurrence dbl{{4, -4}, {1, 1}, "double-root"};
  CHECK_THROWS_AS(spectral_analyze(dbl), Error);
  // Dominant root must exceed 1: x - 1 fails (alpha = 1).
  Recurrence ones{{1}, {1}, "constant"};
  CHECK_THROWS_AS(spectral_analyze(ones), Error);
}

TEST_CASE("order-1 conventions") {
  Spectral sp = spectral_analyze(pow2());
  CHECK(sp.order == 1);
  Interval a = sp.alpha_r.at(64);
  CHECK(a.contains_q(mpq_class(2)));
  // Second-root modulus defaults to 1/2 and the tail constant is exactly 0.
  CHECK(sp.alpha2_mod.at(64).contains_q(mpq_class(1, 2)));
  CHECK(sp.c1_tail.at(64).contains_q(mpq_class(0)));
  CHECK(sp.c1_tail.at(64).hi_d() == 0.0);
  CHECK(sp.u_abs.at(64).contains_q(mpq_class(1)));
}

TEST_CASE("dominant-term approximation bound holds along the sequence") {
  // |U_n - u alpha^n| <= C1 |alpha2|^n for all n up to 200.
  for (Recurrence rec : {fib(), pell(), tribonacci()}) {
    Spectral sp = spectral_analyze(rec);
    auto terms = rec.terms_upto(200);
    mpfr_prec_t p = 1024;
    Interval alpha = sp.alpha_r.at(p);
    Interval u = sp.u.embed_real(p);
    Interval c1 = sp.c1_tail.at(p);
    Interval m2 = sp.alpha2_mod.at(p);
    for (long n = 0; n <= 200; n += 7) {
      Interval lhs = (Interval::exact_z(terms[n], p) - u * alpha.pow_si(n)).abs();
      Interval rhs = c1 * m2.pow_si(n);
      // lhs <= rhs must be *plausible*; with wide enclosures we require the
      // certified form lhs_lo <= rhs_hi and additionally a margin check at
      // high precision: lhs certainly <= rhs * (1 + 2^-40).
      Interval slack = rhs * (Interval::exact_si(1, p) +
                              Interval::exact_si(1, p).mul_2si(-40)) +
                       Interval::exact_si(1, p).mul_2si(-40);
      CHECK(lhs.certainly_le(slack));
    }
  }
}
