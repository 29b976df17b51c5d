#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gmpxx.h>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "recsolve/chain.hpp"
#include "recsolve/reduction.hpp"

using namespace recsolve;

namespace {

Recurrence fib_rec() { return Recurrence{{1, 1}, {1, 2}, "fibonacci"}; }
Recurrence pow2_rec() { return Recurrence{{2}, {1}, "binary"}; }

const ProblemInstance& flagship() {
  static ProblemInstance inst =
      make_instance(SideSpec(fib_rec(), {1, 1, 1, 1}),
                    SideSpec(pow2_rec(), {1}), 101, true);
  return inst;
}

CReal alpha_cr() { return flagship().spec_left.alpha_r; }

CReal u_cr() {
  return CReal([u = flagship().spec_left.u](mpfr_prec_t p) {
    return u.embed_real(p);
  });
}

// tau = log(alpha) / log(2), the slope of the lattice the solver walks.
CReal tau_cr() {
  return CReal([a = alpha_cr()](mpfr_prec_t p) {
    return a.at(p).log() / Interval::exact_si(2, p).log();
  });
}

// mu_r = log(u (1 + alpha^-r)) / log 2; r = 0 gives the two-term shift mu.
CReal mu_shift_cr(long r) {
  return CReal([a = alpha_cr(), u = u_cr(), r](mpfr_prec_t p) {
    Interval g = u.at(p);
    if (r > 0)
      g = g * (Interval::exact_si(1, p) + a.at(p).pow_si(-r));
    return g.log() / Interval::exact_si(2, p).log();
  });
}

// Scale of the first linear form: 4 alpha^2 / log 2.
CReal scale_cr() {
  return CReal([a = alpha_cr()](mpfr_prec_t p) {
    Interval al = a.at(p);
    return Interval::exact_si(4, p) * al * al /
           Interval::exact_si(2, p).log();
  });
}

CReal sqrt_cr(long n) {
  return CReal([n](mpfr_prec_t p) {
    return Interval::exact_si(n, p).sqrt();
  });
}

CReal golden_cr() {
  return CReal([](mpfr_prec_t p) {
    return (Interval::exact_si(1, p) + Interval::exact_si(5, p).sqrt()) /
           Interval::exact_si(2, p);
  });
}

mpz_class flagship_M() {
  mpz_class t;
  mpz_ui_pow_ui(t.get_mpz_t(), 10, 63);
  return 31 * t;
}

ContinuedFraction& shared_tau_cf() {
  static ContinuedFraction cf(tau_cr());
  return cf;
}

long ceil_lo(const Interval& x) {
  mpq_class lo = x.lo_q();
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), lo.get_num().get_mpz_t(),
             lo.get_den().get_mpz_t());
  return c.get_si();
}

mpq_class qpow(mpq_class b, unsigned long e) {
  mpq_class r(1);
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '\t') {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("continued fraction of the golden ratio") {
  ContinuedFraction cf(golden_cr());
  cf.ensure_count(40);
  CHECK(cf.verified_count() >= 40);
  CHECK(!cf.terminated());
  for (size_t j = 0; j < 40; ++j) CHECK(cf.a(j) == 1);

  // Convergents are ratios of consecutive Fibonacci numbers and satisfy the
  // standard recurrence and determinant identities exactly.
  CHECK(cf.q(0) == 1);
  CHECK(cf.q(1) == 1);
  CHECK(cf.p(0) == 1);
  CHECK(cf.p(1) == 2);
  for (size_t j = 2; j < 40; ++j) {
    CHECK(cf.q(j) == cf.a(j) * cf.q(j - 1) + cf.q(j - 2));
    CHECK(cf.p(j) == cf.a(j) * cf.p(j - 1) + cf.p(j - 2));
  }
  for (size_t j = 1; j < 40; ++j) {
    mpz_class det = cf.p(j) * cf.q(j - 1) - cf.p(j - 1) * cf.q(j);
    CHECK(det == ((j % 2 == 1) ? 1 : -1));
  }
  CHECK(cf.q(19) == 6765);
  CHECK(cf.q(20) == 10946);
  CHECK(cf.first_q_above(10000) == 20);
}

TEST_CASE("continued fraction of rationals terminates exactly") {
  ContinuedFraction pi_like(mpq_class(355, 113));
  CHECK(pi_like.terminated());
  CHECK(pi_like.verified_count() == 3);
  CHECK(pi_like.a(0) == 3);
  CHECK(pi_like.a(1) == 7);
  CHECK(pi_like.a(2) == 16);
  CHECK(pi_like.p(2) == 355);
  CHECK(pi_like.q(2) == 113);
  try {
    pi_like.a(3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code == Error::Code::invalid_domain);
  }
  CHECK(pi_like.first_q_above(50) == 2);
  CHECK_THROWS_AS(pi_like.first_q_above(113), Error);

  ContinuedFraction neg(mpq_class(-7, 2));
  CHECK(neg.terminated());
  CHECK(neg.a(0) == -4);
  CHECK(neg.a(1) == 2);
  CHECK(neg.p(1) == -7);
  CHECK(neg.q(1) == 2);

  ContinuedFraction five(mpq_class(5));
  CHECK(five.terminated());
  CHECK(five.verified_count() == 1);
  CHECK(five.q(0) == 1);
  CHECK(five.first_q_above(0) == 0);

  // A rational smuggled in as a generic real cannot be certified through its
  // final quotient: the last complete quotient is an exact integer, whose
  // floor no open enclosure can pin down (3 is indistinguishable from
  // 3 - epsilon, which would continue the expansion differently).  The
  // expansion must hit the precision ceiling rather than invent a quotient.
  ContinuedFraction masked(CReal::constant(mpq_class(7, 3)), 4096);
  CHECK(masked.a(0) == 2);
  try {
    masked.a(1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code == Error::Code::precision);
  }
}

TEST_CASE("convergent denominators of the flagship log ratio") {
  ContinuedFraction& cf = shared_tau_cf();
  const mpz_class M = flagship_M();
  // The threshold 3.1e64 is first crossed at index 128; the published
  // statement q_134 > 3.1e64 holds a fortiori.  Both denominators around the
  // crossing are frozen exactly (cross-checked against an independent
  // 400-digit expansion).
  CHECK(cf.first_q_above(M) == 128);
  CHECK(cf.q(127) <= M);
  CHECK(cf.q(128) > M);
  CHECK(cf.q(134) > M);
  CHECK(cf.q(127) ==
        mpz_class("9231141522849705263311462978857694250020630131871484776338"
                  "675344"));
  CHECK(cf.q(133) ==
        mpz_class("4311161454339662535881152189383846957263690296452676355555"
                  "088264358"));
  CHECK(cf.a(18) == 134);
  mpz_class amax = 0;
  for (size_t j = 1; j <= 134; ++j) amax = std::max(amax, cf.a(j));
  CHECK(amax == 134);
  // Exact unimodularity along the verified prefix.
  for (size_t j = 1; j <= 134; ++j) {
    mpz_class det = cf.p(j) * cf.q(j - 1) - cf.p(j - 1) * cf.q(j);
    CHECK((det == 1 || det == -1));
  }
  for (size_t j = 2; j <= 134; ++j)
    CHECK(cf.q(j) == cf.a(j) * cf.q(j - 1) + cf.q(j - 2));
}

TEST_CASE("first linear-form reduction at the flagship scale") {
  ContinuedFraction& cf = shared_tau_cf();
  ReductionProblem prob{tau_cr(), mu_shift_cr(0), scale_cr(), alpha_cr(),
                        flagship_M()};
  ReductionOutcome out = bd_reduce(cf, prob);
  CHECK(out.method == ReductionMethod::BakerDavenport);
  CHECK(out.q_used > 6 * prob.M);
  REQUIRE(out.epsilon.has_value());
  CHECK(out.epsilon->at(512).is_positive());
  CHECK(out.new_k_bound >= 300);
  CHECK(out.new_k_bound <= 350);
  CHECK(!out.trace.empty());
  CHECK(out.trace.back() == out.q_used);

  // Recompute the certified bound and confirm the promised slack: the
  // reported bound is never more than one below the ceiling of the lower
  // enclosure endpoint.
  mpfr_prec_t p = 768;
  Interval t = (prob.A.at(p) * Interval::exact_z(out.q_used, p) /
                out.epsilon->at(p))
                   .log() /
               prob.B.at(p).log();
  CHECK(out.new_k_bound >= ceil_lo(t) - 1);
  CHECK(Interval::exact_si(out.new_k_bound + 1, p).certainly_lt(t) == false);
}

TEST_CASE("shifted linear forms reduce across the gap range") {
  ContinuedFraction& cf = shared_tau_cf();
  const mpz_class M = flagship_M();
  for (long r : {1L, 3L, 5L, 10L, 100L, 333L}) {
    CAPTURE(r);
    ReductionProblem prob{tau_cr(), mu_shift_cr(r), scale_cr(), alpha_cr(), M};
    ReductionOutcome out = bd_reduce(cf, prob);
    CHECK(out.method == ReductionMethod::BakerDavenport);
    CHECK(out.new_k_bound >= 100);
    CHECK(out.new_k_bound <= 360);
    CHECK(out.q_used > 6 * M);
  }
}

TEST_CASE("dependent shifts are flagged, not bounded") {
  ContinuedFraction& cf = shared_tau_cf();
  const mpz_class M = flagship_M();
  for (long r : {2L, 6L}) {
    CAPTURE(r);
    ReductionProblem prob{tau_cr(), mu_shift_cr(r), scale_cr(), alpha_cr(), M};
    try {
      bd_reduce(cf, prob);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code == Error::Code::unresolved);
      CHECK(std::string(e.what()).find("DependenceSuspected") !=
            std::string::npos);
    }
  }

  // The shifts at r = 2 and r = 6 collapse algebraically: u(1 + alpha^-2) is
  // alpha itself and u(1 + alpha^-6) is 2/alpha.  Confirm the identities
  // exactly, then confirm the detector names the integer relations.
  NFElem alpha = flagship().spec_left.alpha;
  NFElem u = flagship().spec_left.u;
  NFElem one = alpha.field().one();
  NFElem y2 = u * (one + alpha.pow(-2));
  NFElem y6 = u * (one + alpha.pow(-6));
  CHECK(y2 == alpha);
  CHECK(y6 == alpha.field().from_q(mpq_class(2)) * alpha.inverse());

  LogWitness w2{alpha, y2, mpq_class(2)};
  auto rel2 = detect_dependence(tau_cr(), mu_shift_cr(2), 10, w2);
  REQUIRE(rel2.has_value());
  CHECK((*rel2)[0] == 1);
  CHECK((*rel2)[1] == 0);
  CHECK((*rel2)[2] == -1);

  LogWitness w6{alpha, y6, mpq_class(2)};
  auto rel6 = detect_dependence(tau_cr(), mu_shift_cr(6), 10, w6);
  REQUIRE(rel6.has_value());
  CHECK((*rel6)[0] == 1);
  CHECK((*rel6)[1] == -1);
  CHECK((*rel6)[2] == 1);

  // Numeric-only route agrees.
  auto rel2n = detect_dependence(tau_cr(), mu_shift_cr(2), 6);
  REQUIRE(rel2n.has_value());
  CHECK(*rel2n == *rel2);

  // A witness that contradicts the numbers vetoes the numeric coincidence:
  // tau equals tau, but alpha / u is not 1, so no relation survives.
  LogWitness bad{alpha, u, mpq_class(2)};
  CHECK(!detect_dependence(tau_cr(), tau_cr(), 5, bad).has_value());

  CHECK_THROWS_AS(detect_dependence(tau_cr(), mu_shift_cr(2), 0), Error);
  CHECK_THROWS_AS(detect_dependence(tau_cr(), mu_shift_cr(2), 1001), Error);
}

TEST_CASE("dependent cells reduce through the convergent criterion") {
  ContinuedFraction& cf = shared_tau_cf();
  const mpz_class M = flagship_M();
  std::array<mpz_class, 3> rel{1, 0, -1};
  // The collapsed form |(n+1) tau - m| keeps the scale and pushes the
  // numerator range up by one.
  ReductionOutcome out =
      legendre_reduce(cf, rel, scale_cr(), alpha_cr(), M + 1);
  CHECK(out.method == ReductionMethod::Legendre);
  CHECK(out.S == 134);
  CHECK(out.q_used == cf.q(127));
  CHECK(out.new_k_bound >= 300);
  CHECK(out.new_k_bound <= 340);
  CHECK(out.trace.size() == 129);
  CHECK(out.trace.front() == 1);
}

TEST_CASE("convergent criterion on the golden ratio") {
  ContinuedFraction cf(golden_cr());
  ReductionOutcome out = legendre_reduce(
      cf, std::nullopt, CReal::constant(mpq_class(1)), golden_cr(),
      mpz_class(10000));
  CHECK(out.method == ReductionMethod::Legendre);
  CHECK(out.S == 1);
  CHECK(out.q_used == 6765);
  CHECK(out.new_k_bound == 21);
  CHECK(out.trace.size() == 21);
  CHECK(out.trace.back() == 10946);

  CHECK_THROWS_AS(legendre_reduce(cf, std::nullopt,
                                  CReal::constant(mpq_class(1)), golden_cr(),
                                  mpz_class(0)),
                  Error);
  // Base at 1 cannot be certified above 1.
  CHECK_THROWS_AS(legendre_reduce(cf, std::nullopt,
                                  CReal::constant(mpq_class(1)),
                                  CReal::constant(mpq_class(1)),
                                  mpz_class(100)),
                  Error);
}

TEST_CASE("synthetic reductions verified by exhaustive search") {
  struct Case {
    long root;       // tau = sqrt(root)
    mpq_class mu;    // rational offset
    long M;
    mpq_class A;
    mpq_class B;
  };
  const std::vector<Case> cases = {
      {2, mpq_class(1, 3), 1000, 10, 2},
      {2, mpq_class(1, 7), 10000, 10, 2},
      {3, mpq_class(1, 3), 10000, 10, 2},
      {3, mpq_class(1, 7), 100, 5, 2},
      {5, mpq_class(1, 3), 1000, 5, 2},
      {5, mpq_class(1, 7), 1000, 10, mpq_class(3, 2)},
      {2, mpq_class(1, 3), 100, 5, mpq_class(3, 2)},
      {3, mpq_class(2, 7), 1000, 10, 2},
      {5, mpq_class(3, 7), 10000, 10, 2},
      {2, mpq_class(5, 7), 1000, 10, mpq_class(3, 2)},
  };
  for (const Case& c : cases) {
    CAPTURE(c.root);
    CAPTURE(c.M);
    CReal tau = sqrt_cr(c.root);
    ReductionProblem prob{tau, CReal::constant(c.mu),
                          CReal::constant(c.A), CReal::constant(c.B),
                          mpz_class(c.M)};
    ReductionOutcome out = bd_reduce(prob);
    REQUIRE(out.method == ReductionMethod::BakerDavenport);
    CHECK(out.q_used > 6 * mpz_class(c.M));
    REQUIRE(out.new_k_bound >= 1);

    // The certificate promises: for every 1 <= n <= M the value
    // n tau + mu is at least A B^-(k+1) away from every integer, where k is
    // the reported bound.  Check it exhaustively with one interval per n.
    mpq_class floor_dist = c.A / qpow(c.B, out.new_k_bound + 1);
    const mpfr_prec_t p = 160;
    Interval T = tau.at(p);
    Interval muI = Interval::from_q(c.mu, p);
    Interval x = Interval::exact_si(0, p);
    for (long n = 1; n <= c.M; ++n) {
      x = x + T;
      bool ok = false;
      Interval d = (x + muI).dist_to_nearest_int(ok);
      // A tie against a half-integer means the distance is near maximal,
      // far above any useful floor; skip it.
      if (!ok) continue;
      if (!(d.lo_q() >= floor_dist)) {
        CAPTURE(n);
        CHECK(d.lo_q() >= floor_dist);
      }
    }
  }
}

TEST_CASE("synthetic dependence is detected and named") {
  CReal tau = sqrt_cr(2);
  CReal mu = CReal([tau](mpfr_prec_t p) {
    return Interval::exact_si(17, p) * tau.at(p) - Interval::exact_si(5, p);
  });
  ReductionProblem prob{tau, mu, CReal::constant(mpq_class(10)),
                        CReal::constant(mpq_class(2)), mpz_class(1000)};
  try {
    bd_reduce(prob);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code == Error::Code::unresolved);
    CHECK(std::string(e.what()).find("DependenceSuspected") !=
          std::string::npos);
  }
  auto rel = detect_dependence(tau, mu, 20);
  REQUIRE(rel.has_value());
  CHECK((*rel)[0] == 17);
  CHECK((*rel)[1] == -5);
  CHECK((*rel)[2] == -1);

  // Domain guards on the walk itself.
  ReductionProblem bad_m{tau, mu, CReal::constant(mpq_class(10)),
                         CReal::constant(mpq_class(2)), mpz_class(0)};
  CHECK_THROWS_AS(bd_reduce(bad_m), Error);
  ReductionProblem bad_a{tau, CReal::constant(mpq_class(1, 3)),
                         CReal::constant(mpq_class(-1)),
                         CReal::constant(mpq_class(2)), mpz_class(10)};
  CHECK_THROWS_AS(bd_reduce(bad_a), Error);
  ReductionProblem bad_b{tau, CReal::constant(mpq_class(1, 3)),
                         CReal::constant(mpq_class(10)),
                         CReal::constant(mpq_class(1)), mpz_class(10)};
  CHECK_THROWS_AS(bd_reduce(bad_b), Error);

  // A terminating expansion can never supply a denominator above 6M.
  ContinuedFraction finite(mpq_class(355, 113));
  ReductionProblem fin_prob{CReal::constant(mpq_class(355, 113)),
                            CReal::constant(mpq_class(1, 3)),
                            CReal::constant(mpq_class(10)),
                            CReal::constant(mpq_class(2)), mpz_class(1000)};
  CHECK_THROWS_AS(bd_reduce(finite, fin_prob), Error);
}

TEST_CASE("independent quadratic logs yield no relation") {
  CHECK(!detect_dependence(sqrt_cr(2), sqrt_cr(3), 1000).has_value());
}

TEST_CASE("epsilon refines monotonically once certified") {
  ContinuedFraction& cf = shared_tau_cf();
  ReductionProblem prob{tau_cr(), mu_shift_cr(0), scale_cr(), alpha_cr(),
                        flagship_M()};
  ReductionOutcome out = bd_reduce(cf, prob);
  REQUIRE(out.epsilon.has_value());
  Interval coarse = out.epsilon->at(256);
  Interval fine = out.epsilon->at(1024);
  CHECK(coarse.is_positive());
  CHECK(fine.is_positive());
  CHECK(fine.width_d() <= coarse.width_d());
  CHECK(fine.lo_q() >= coarse.lo_q());
  CHECK(fine.hi_q() <= coarse.hi_q());
}

TEST_CASE("trace records are tab-separated and faithful") {
  ContinuedFraction& cf = shared_tau_cf();
  ReductionProblem prob{tau_cr(), mu_shift_cr(0), scale_cr(), alpha_cr(),
                        flagship_M()};
  ReductionOutcome bd = bd_reduce(cf, prob);
  std::vector<std::string> f = split_tabs(trace_record(bd, "shift-0"));
  REQUIRE(f.size() == 5);
  CHECK(f[0] == "shift-0");
  CHECK(f[1] == "baker-davenport");
  CHECK(f[2] == bd.q_used.get_str());
  CHECK(f[3] != "-");
  CHECK(!f[3].empty());
  CHECK(f[4] == std::to_string(bd.new_k_bound));

  ContinuedFraction gold(golden_cr());
  ReductionOutcome lg = legendre_reduce(
      gold, std::nullopt, CReal::constant(mpq_class(1)), golden_cr(),
      mpz_class(10000));
  f = split_tabs(trace_record(lg, "cell-2"));
  REQUIRE(f.size() == 5);
  CHECK(f[1] == "legendre");
  CHECK(f[2] == "6765");
  CHECK(f[3] == "1");
  CHECK(f[4] == "21");

  ReductionOutcome none;
  f = split_tabs(trace_record(none, "unset"));
  REQUIRE(f.size() == 5);
  CHECK(f[1] == "failed");
  CHECK(f[2] == "0");
  CHECK(f[3] == "-");
  CHECK(f[4] == "0");
}
