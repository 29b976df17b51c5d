// Instance assembly and growth-comparison constants: builds the certified
// data relating alpha^{n_1} and beta^{m_1} for solutions of
//   a_1 U_{n_1} + ... + a_k U_{n_k} = b_1 V_{m_1} + ... + b_l V_{m_l},
// plus the uniform multiplicative-independence constant C'.

#include <algorithm>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "recsolve/chain.hpp"
#include "cr_util.hpp"

namespace recsolve {

using namespace crutil;

namespace {

// ---------------------------------------------------------------------------
// Composite field degree D = [Q(alpha, beta) : Q].
// ---------------------------------------------------------------------------

// Certified check that t is a "lucky" shift for the primitive element
// alpha + t*beta: t*(beta_0 - beta_j) != alpha_i - alpha_0 for every
// conjugate index i and every j >= 1.  A true statement is certified at
// some finite precision; returns false when the budget is exhausted.
bool lucky_shift(const NumberField& FA, const NumberField& FB, long t) {
  int da = FA.degree(), db = FB.degree();
  for (mpfr_prec_t p : {static_cast<mpfr_prec_t>(128), static_cast<mpfr_prec_t>(256),
                        static_cast<mpfr_prec_t>(512)}) {
    const auto& ra = FA.roots(p);
    const auto& rb = FB.roots(p);
    bool all_ok = true;
    Interval tI = Interval::exact_si(t, p);
    CInterval tC{tI, Interval::exact_si(0, p)};
    for (int i = 0; i < da && all_ok; ++i) {
      for (int j = 1; j < db && all_ok; ++j) {
        CInterval lhs = tC * (rb[0].center - rb[j].center);
        CInterval rhs = ra[i].center - ra[0].center;
        if ((lhs - rhs).contains_zero()) all_ok = false;
      }
    }
    if (all_ok) return true;
  }
  return false;
}

// Product polynomial F_t(x) = prod_{i,j} (x - (alpha_i + t beta_j)) with
// certified integer coefficients, or nullopt if the coefficients cannot be
// pinned to unique integers at this precision.
std::optional<QPoly> product_poly(const NumberField& FA, const NumberField& FB,
                                  long t, mpfr_prec_t p) {
  const auto& ra = FA.roots(p);
  const auto& rb = FB.roots(p);
  Interval zero = Interval::exact_si(0, p);
  CInterval czero{zero, zero};
  CInterval cone{Interval::exact_si(1, p), zero};
  Interval tI = Interval::exact_si(t, p);
  CInterval tC{tI, zero};

  // Coefficients low-to-high; start with the constant polynomial 1 and
  // multiply in one linear factor per root pair.
  std::vector<CInterval> poly(1, cone);
  for (const auto& rda : ra) {
    for (const auto& rdb : rb) {
      CInterval s = rda.center + tC * rdb.center;  // root alpha_i + t beta_j
      std::vector<CInterval> next(poly.size() + 1, czero);
      for (size_t d = 0; d < poly.size(); ++d) {
        next[d + 1] = next[d + 1] + poly[d];
        next[d] = next[d] - s * poly[d];
      }
      poly = std::move(next);
    }
  }
  // The true coefficients are integers (symmetric functions of algebraic
  // integers, rational by construction); pin each enclosure to the unique
  // integer it contains.
  std::vector<mpz_class> co(poly.size());
  for (size_t d = 0; d + 1 < poly.size(); ++d) {
    if (!poly[d].im.contains_zero()) return std::nullopt;
    mpq_class l = poly[d].re.lo_q(), h = poly[d].re.hi_q();
    mpz_class fh;
    mpz_fdiv_q(fh.get_mpz_t(), h.get_num_mpz_t(), h.get_den_mpz_t());
    // Exactly one integer in [l, h] iff floor(h) >= l and floor(h) - 1 < l.
    if (mpq_class(fh) < l) return std::nullopt;
    if (mpq_class(fh - 1) >= l) return std::nullopt;
    co[d] = fh;
  }
  co.back() = 1;  // monic by construction
  if (!poly.back().re.contains_q(mpq_class(1)) || !poly.back().im.contains_zero()) {
    return std::nullopt;
  }
  return QPoly::from_z(co);
}

int composite_degree(const Spectral& a, const Spectral& b) {
  int da = a.field->degree(), db = b.field->degree();
  if (da == 1) return db;
  if (db == 1) return da;
  if (a.alpha_min_poly == b.alpha_min_poly) {
    // Same minimal polynomial: both are its unique real root > 1, so the
    // generated fields coincide.
    return da;
  }
  long t_cap = static_cast<long>(da) * db + 3;
  for (long t = 1; t <= t_cap; ++t) {
    if (!lucky_shift(*a.field, *b.field, t)) continue;
    for (mpfr_prec_t p : {static_cast<mpfr_prec_t>(192), static_cast<mpfr_prec_t>(384),
                          static_cast<mpfr_prec_t>(768), static_cast<mpfr_prec_t>(1536)}) {
      std::optional<QPoly> F;
      try {
        F = product_poly(*a.field, *b.field, t, p);
      } catch (const Error& e) {
        if (e.code == Error::Code::precision) continue;
        throw;
      }
      if (!F) continue;
      try {
        QPoly Fsq = F->squarefree_part();
        Interval where = a.alpha_r.at(p) + Interval::exact_si(t, p) * b.alpha_r.at(p);
        QPoly mp = min_poly_of_root(Fsq, where);
        int D = mp.degree();
        // Both generated fields embed into the compositum, so both degrees
        // divide D, and D is at most the degree product.
        if (D % da != 0 || D % db != 0 || D > da * db) {
          throw Error(Error::Code::internal,
                      "composite field degree outside its certified range");
        }
        return D;
      } catch (const Error& e) {
        if (e.code == Error::Code::precision) continue;
        throw;
      }
    }
  }
  throw Error(Error::Code::precision,
              "could not certify a primitive element for the composite field");
}

// ---------------------------------------------------------------------------
// Prefix lower constants
// ---------------------------------------------------------------------------

std::vector<CReal> prefix_c2(const SideSpec& side, const DominanceCertificate& cert) {
  std::vector<CReal> out;
  out.reserve(side.coefficients.size());
  mpz_class a1 = abs(side.coefficients.front());
  out.push_back(cr_z(a1));
  for (size_t j = 2; j <= side.coefficients.size(); ++j) {
    if (cert.per_level_c2.size() < j - 1) {
      throw Error(Error::Code::internal,
                  "dominance certificate lacks a level constant for a prefix");
    }
    out.push_back(cert.per_level_c2[j - 2]);
  }
  return out;
}

mpz_class squarefree_part_z(mpz_class n) {
  if (n == 0) return 0;
  mpz_class s = 1;
  if (n < 0) {
    s = -1;
    n = -n;
  }
  for (mpz_class p = 2; p * p * p <= n; ++p) {
    while (mpz_divisible_p(n.get_mpz_t(), mpz_class(p * p).get_mpz_t())) n /= p * p;
  }
  if (mpz_perfect_square_p(n.get_mpz_t())) return s;  // n = q^2
  return s * n;  // n is 1, q, or q*r with distinct primes q, r
}

mpz_class primitive_base(const mpz_class& a) {
  // a >= 2; largest e with an exact e-th root gives the non-power core.
  for (unsigned long e = mpz_sizeinbase(a.get_mpz_t(), 2); e >= 2; --e) {
    mpz_class r;
    if (mpz_root(r.get_mpz_t(), a.get_mpz_t(), e) != 0) return r;
  }
  return a;
}

bool is_quadratic_unit(const Spectral& s) {
  if (s.field->degree() != 2) return false;
  mpq_class nm = s.alpha.norm();
  return nm == 1 || nm == -1;
}

mpz_class rational_root_abs(const Spectral& s) {
  auto r = s.alpha.as_rational();
  if (!r) throw Error(Error::Code::internal, "expected a rational dominant root");
  mpq_class q = *r;
  if (q.get_den() != 1) {
    throw Error(Error::Code::internal,
                "dominant root of an integer recurrence must be an integer when rational");
  }
  mpz_class z = q.get_num();
  return abs(z);
}

}  // namespace

// ---------------------------------------------------------------------------
// make_instance
// ---------------------------------------------------------------------------

ProblemInstance make_instance(SideSpec left, SideSpec right, long n_star,
                              bool weighted, std::optional<mpq_class> c_prime) {
  if (n_star < 3) {
    throw Error(Error::Code::config,
                "the chain validity threshold must be at least 3");
  }
  DominanceCertificate cl = check_dominance(left);
  if (cl.verdict != Verdict::Dominant) {
    throw Error(Error::Code::invalid_domain,
                "left side is not dominant: a vanishing combination of powers of "
                "its dominant root exists");
  }
  DominanceCertificate cr = check_dominance(right);
  if (cr.verdict != Verdict::Dominant) {
    throw Error(Error::Code::invalid_domain,
                "right side is not dominant: a vanishing combination of powers of "
                "its dominant root exists");
  }
  Spectral sl = spectral_analyze(left.rec);
  Spectral sr = spectral_analyze(right.rec);

  ProblemInstance inst{std::move(left),
                       std::move(right),
                       std::move(cl),
                       std::move(cr),
                       std::move(sl),
                       std::move(sr),
                       {},
                       0,
                       n_star,
                       weighted,
                       std::move(c_prime)};
  inst.c2_prefix_right = prefix_c2(inst.right, inst.cert_right);
  inst.field_degree = composite_degree(inst.spec_left, inst.spec_right);
  return inst;
}

// ---------------------------------------------------------------------------
// Growth constants
// ---------------------------------------------------------------------------

namespace {

// nu(n) = |u| - C1 * (max{1,|alpha_2|}/alpha)^n, an increasing-in-n lower
// bound with |U_n| >= nu(n0) * alpha^n for all n >= n0.
CReal nu_at(const Spectral& s, long n) {
  CReal u = s.u_abs, c1 = s.c1_tail, a2 = s.alpha2_mod, al = s.alpha_r;
  return CReal([u, c1, a2, al, n](mpfr_prec_t p) {
    Interval one = Interval::exact_si(1, p);
    Interval ratio = imax(a2.at(p), one) / al.at(p);
    return u.at(p) - c1.at(p) * ratio.pow_si(n);
  });
}

long positivity_index(const Spectral& s, const char* side_name) {
  for (long n = 1; n <= 10000; ++n) {
    if (certify_positive(nu_at(s, n), {128, 256})) return n;
  }
  std::ostringstream os;
  os << "could not certify that the " << side_name
     << " sequence eventually dominates its Binet tail";
  throw Error(Error::Code::unresolved, os.str());
}

// Geometric-series factor alpha/(alpha-1) as a CReal.
CReal geo_factor(const Spectral& s) {
  CReal al = s.alpha_r;
  return CReal([al](mpfr_prec_t p) {
    Interval a = al.at(p);
    return a / (a - Interval::exact_si(1, p));
  });
}

}  // namespace

GrowthData derive_growth_constants(const ProblemInstance& inst) {
  const Spectral& SU = inst.spec_left;
  const Spectral& SV = inst.spec_right;

  GrowthData g;
  g.log_alpha = SU.alpha_r.log();
  g.log_beta = SV.alpha_r.log();
  g.wU = g.log_alpha - cr_pos(SU.alpha2_mod.log());
  g.wV = g.log_beta - cr_pos(SV.alpha2_mod.log());

  g.nu_left = positivity_index(SU, "left");
  g.nu_right = positivity_index(SV, "right");
  g.nuU = nu_at(SU, g.nu_left);
  g.nuV = nu_at(SV, g.nu_right);

  g.C5p = *inst.cert_left.c3 * g.nuU;
  g.C5pp = *inst.cert_right.c3 * g.nuV;
  g.C6pp = cr_z(inst.left.A) * (SU.u_abs + SU.c1_tail) * geo_factor(SU);
  g.C6p = cr_z(inst.right.A) * (SV.u_abs + SV.c1_tail) * geo_factor(SV);
  g.C5 = g.C5pp / g.C6pp;
  g.C6 = g.C6p / g.C5p;

  CReal logC5 = g.C5.log();
  CReal logC6 = g.C6.log();
  // n_1/m_1 > C7: from m_1 log beta < n_1 log alpha - log C5, two certified
  // lower forms combined (the second is positive whenever n_1 >= 1).
  CReal form1 = (g.log_beta - cr_abs(logC5)) / g.log_alpha;
  CReal form2 = g.log_beta / (g.log_alpha + cr_pos(cr_neg(logC5)));
  g.C7 = cr_max(form1, form2);
  // n_1/m_1 < C8, the log C6 contribution maximized at m_1 = 1 and dropped
  // when negative.
  g.C8 = (g.log_beta + cr_pos(logC6)) / g.log_alpha;

  // Validity threshold: start of nu-positivity on the left, forcing of
  // m_1 >= nu_right through the size of the equation, and the configured
  // floor.
  long thr = std::max(inst.n_star, g.nu_left);
  if (g.nu_right >= 2) {
    // Smallest T with C5' alpha^T > C6' beta^{nu_right}: for n_1 >= T a
    // solution must have m_1 >= nu_right.
    Interval x = ((g.C6p.log() + cr_si(g.nu_right) * g.log_beta - g.C5p.log()) /
                  g.log_alpha)
                     .at(256);
    double hd = x.hi_d();
    long t_force = hd < 1 ? 1 : static_cast<long>(hd) + 2;
    thr = std::max(thr, t_force);
  }
  g.n_threshold = std::max<long>(thr, 1);

  // max{n_1, m_1} <= CL * n_1 for n_1 >= n_threshold.
  CReal lt = cr_si(g.n_threshold);
  g.CL = cr_max(cr_si(1),
                (g.log_alpha + cr_pos(cr_neg(logC5)) / lt) / g.log_beta);
  return g;
}

// ---------------------------------------------------------------------------
// Uniform multiplicative-independence constant
// ---------------------------------------------------------------------------

CReal mult_indep_uniform(const ProblemInstance& inst) {
  const Spectral& SA = inst.spec_left;
  const Spectral& SB = inst.spec_right;
  int da = SA.field->degree(), db = SB.field->degree();

  auto cfg_or_missing = [&]() -> CReal {
    if (inst.c_prime_cfg) {
      if (*inst.c_prime_cfg <= 0) {
        throw Error(Error::Code::config,
                    "configured independence constant must be positive");
      }
      return cr_q(*inst.c_prime_cfg);
    }
    throw Error(Error::Code::config,
                "MissingCPrime: no certified multiplicative-independence "
                "constant is derivable for this pair of dominant roots; "
                "provide one in the configuration");
  };

  if (da == 1 && db == 1) {
    mpz_class a = rational_root_abs(SA), b = rational_root_abs(SB);
    if (primitive_base(a) == primitive_base(b)) {
      throw Error(Error::Code::invalid_domain,
                  "the dominant roots are multiplicatively dependent: both are "
                  "powers of the same integer");
    }
    mpz_class gval;
    mpz_gcd(gval.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    if (gval == 1) {
      // h(a^n / b^m) = log max{a^n, b^m} >= min{log a, log b} max{n, m}.
      return cr_min(cr_z(a).log(), cr_z(b).log());
    }
    return cfg_or_missing();
  }

  if (da == 1 || db == 1) {
    // Rational against irrational: always independent (a rational power of a
    // non-degenerate irrational root forces the exponent to vanish).
    const Spectral& rat = (da == 1) ? SA : SB;
    const Spectral& irr = (da == 1) ? SB : SA;
    if (is_quadratic_unit(irr)) {
      mpz_class b = rational_root_abs(rat);
      // gamma = b^m alpha^{-n} is an algebraic integer with a conjugate of
      // modulus b^m alpha^n, so 2 h(gamma) >= m log b + n log alpha.
      return cr_q(mpq_class(1, 2)) * cr_min(irr.alpha_r.log(), cr_z(b).log());
    }
    return cfg_or_missing();
  }

  if (SA.alpha_min_poly == SB.alpha_min_poly) {
    throw Error(Error::Code::invalid_domain,
                "the dominant roots are multiplicatively dependent: they are "
                "equal");
  }

  if (da == 2 && db == 2 && is_quadratic_unit(SA) && is_quadratic_unit(SB)) {
    // Discriminant of x^2 + c1 x + c0.
    auto disc = [](const QPoly& f) {
      mpq_class c1 = f.coeff(1), c0 = f.coeff(0);
      mpq_class d = c1 * c1 - 4 * c0;
      if (d.get_den() != 1) {
        throw Error(Error::Code::internal, "non-integral quadratic discriminant");
      }
      return squarefree_part_z(d.get_num());
    };
    mpz_class dA = disc(SA.alpha_min_poly), dB = disc(SB.alpha_min_poly);
    if (dA == dB) {
      // Units of the same real quadratic field are powers of a common
      // fundamental unit, hence multiplicatively dependent.
      throw Error(Error::Code::invalid_domain,
                  "the dominant roots are multiplicatively dependent: both are "
                  "units of the same quadratic field");
    }
    // Distinct real quadratic fields: the compositum has degree 4 and some
    // embedding sends alpha^n beta^{-m} to a number of modulus
    // alpha^n beta^m, so 4 h >= n log alpha + m log beta.
    return cr_q(mpq_class(1, 4)) * cr_min(SA.alpha_r.log(), SB.alpha_r.log());
  }

  return cfg_or_missing();
}

}  // namespace recsolve
