#include "recsolve/heights.hpp"

#include <algorithm>

#include "recsolve/poly.hpp"

namespace recsolve {

namespace {

// x^y for x >= 0 (interval), y arbitrary (interval), via exp(y log x).
// Monotone in x, so a lower endpoint of exactly 0 maps to 0.
Interval rpow(const Interval& b, const Interval& e, mpfr_prec_t p) {
  if (b.is_negative())
    throw Error(Error::Code::invalid_domain, "rpow: negative base");
  mpq_class lo = b.lo_q();
  if (b.hi_q() == 0) return Interval::exact_si(0, p);
  if (lo > 0) return (e * b.log()).exp();
  // Base touches zero: [0, hi^e] for positive exponents.
  Interval hi_only = Interval::span_q(b.hi_q(), b.hi_q(), p);
  Interval upper = (e * hi_only.log()).exp();
  return ihull(Interval::exact_si(0, p), upper);
}

CReal log2_r() {
  return CReal([](mpfr_prec_t p) { return Interval::exact_si(2, p).log(); });
}

}  // namespace

HeightValue weil_height(const NFElem& x) {
  return weil_height(x, x.field().degree());
}

HeightValue weil_height(const NFElem& x, int ambient_degree) {
  if (x.is_zero())
    throw Error(Error::Code::invalid_domain, "height of zero is undefined");
  QPoly mp = x.min_poly();  // monic over Q, irreducible
  std::vector<mpz_class> prim = mp.primitive_z();
  mpz_class a0 = prim.back();
  if (a0 < 0) a0 = -a0;
  int delta = mp.degree();
  QPoly mpc = mp;
  CReal h([mpc, a0, delta](mpfr_prec_t p) -> Interval {
    for (mpfr_prec_t q = std::max<mpfr_prec_t>(p, 160);; q *= 2) {
      if (q > (1 << 16))
        throw Error(Error::Code::precision, "height: root refinement failed");
      try {
        Interval acc = Interval::exact_z(a0, q).log();
        if (delta >= 1) {
          auto roots = certified_roots(mpc, q);
          Interval one = Interval::exact_si(1, q);
          for (const auto& r : roots) acc = acc + imax(one, r.modulus).log();
        }
        Interval hv = acc / Interval::exact_si(delta, q);
        return imax(Interval::exact_si(0, q), hv);
      } catch (const Error& e) {
        if (e.code == Error::Code::precision) continue;
        throw;
      }
    }
  });
  NFElem xc = x;
  int d = ambient_degree;
  if (d < 1)
    throw Error(Error::Code::config, "ambient degree must be positive");
  CReal hp([xc, h, d](mpfr_prec_t p) -> Interval {
    for (mpfr_prec_t q = std::max<mpfr_prec_t>(p, 160);; q *= 2) {
      if (q > (1 << 16))
        throw Error(Error::Code::precision, "modified height refinement failed");
      Interval ax = xc.embed_real(q).abs();
      if (!ax.is_positive()) continue;
      Interval la = ax.log().abs();
      Interval dh = Interval::exact_si(d, q) * h.at(q);
      Interval m = imax(imax(dh, la), Interval::exact_si(1, q));
      return m / Interval::exact_si(d, q);
    }
  });
  HeightValue out;
  out.h = h;
  out.h_prime = hp;
  out.degree_used = d;
  return out;
}

CReal height_add(const CReal& ha, const CReal& hb) {
  return ha + hb + log2_r();
}

CReal height_add_n(const std::vector<CReal>& hs) {
  if (hs.empty())
    throw Error(Error::Code::config, "height_add_n: empty term list");
  CReal acc = hs[0];
  for (size_t i = 1; i < hs.size(); ++i) acc = acc + hs[i];
  long n = static_cast<long>(hs.size());
  return acc + CReal([n](mpfr_prec_t p) {
           return Interval::exact_si(n, p).log();
         });
}

CReal height_mul(const CReal& ha, const CReal& hb) { return ha + hb; }

CReal height_pow(const CReal& h, long n) {
  long a = n < 0 ? -n : n;
  return h * CReal::constant(mpq_class(a));
}

CReal h_prime_upper(const CReal& h_upper, const CReal& log_abs_upper, int d) {
  if (d < 1)
    throw Error(Error::Code::config, "ambient degree must be positive");
  CReal dc = CReal::constant(mpq_class(d));
  return CReal([h_upper, log_abs_upper, dc, d](mpfr_prec_t p) {
    Interval m = imax(imax(dc.at(p) * h_upper.at(p), log_abs_upper.at(p)),
                      Interval::exact_si(1, p));
    return m / Interval::exact_si(d, p);
  });
}

CReal bw_constant(int k, int d) {
  if (k < 1 || d < 1)
    throw Error(Error::Code::config, "bw_constant requires k, d >= 1");
  mpz_class intpart(18);
  mpz_class fact(1);
  for (int i = 2; i <= k + 1; ++i) fact *= i;
  intpart *= fact;
  mpz_class kk(1);
  for (int i = 0; i <= k; ++i) kk *= k;
  intpart *= kk;
  mpz_class b(32 * d);
  mpz_class bp(1);
  for (int i = 0; i < k + 2; ++i) bp *= b;
  intpart *= bp;
  long arg = 2L * k * d;
  return CReal([intpart, arg](mpfr_prec_t p) {
    return Interval::exact_z(intpart, p) * Interval::exact_si(arg, p).log();
  });
}

LinearFormInstance make_linear_form(std::vector<NFElem> etas,
                                    std::vector<mpz_class> coeffs,
                                    int field_degree) {
  if (etas.empty() || etas.size() != coeffs.size())
    throw Error(Error::Code::config,
                "linear form needs matching nonempty eta/coefficient lists");
  LinearFormInstance inst;
  inst.field_degree = field_degree;
  mpz_class lmax(0), g(0);
  for (const auto& l : coeffs) {
    lmax = std::max(lmax, mpz_class(abs(l)));
    g = gcd(g, l);
  }
  inst.lambda_gcd = g;
  inst.L_cap = CReal([lmax](mpfr_prec_t p) {
    Interval e = Interval::exact_si(1, p).exp();
    return imax(Interval::exact_z(lmax, p), e);
  });
  for (const auto& eta : etas) {
    if (eta.is_zero())
      throw Error(Error::Code::config, "linear form eta must be nonzero");
    if (eta == eta.field_ptr()->one())
      throw Error(Error::Code::config, "linear form eta must not be 1");
    if (exact_sign(eta) <= 0)
      throw Error(Error::Code::config,
                  "linear form eta must be positive under the real embedding");
    inst.heights.push_back(weil_height(eta, field_degree));
  }
  std::vector<NFElem> etas_c = etas;
  std::vector<mpz_class> coeffs_c = coeffs;
  inst.Lambda = CReal([etas_c, coeffs_c](mpfr_prec_t p) -> Interval {
    for (mpfr_prec_t q = std::max<mpfr_prec_t>(p, 160);; q *= 2) {
      if (q > (1 << 16))
        throw Error(Error::Code::precision, "linear form enclosure failed");
      bool ok = true;
      Interval acc = Interval::exact_si(0, q);
      for (size_t i = 0; i < etas_c.size(); ++i) {
        Interval e = etas_c[i].embed_real(q);
        if (!e.is_positive()) {
          ok = false;
          break;
        }
        acc = acc + Interval::exact_z(coeffs_c[i], q) * e.log();
      }
      if (ok) return acc;
    }
  });
  CReal lam = inst.Lambda;
  inst.Phi = CReal([lam](mpfr_prec_t p) {
    return lam.at(p).exp() - Interval::exact_si(1, p);
  });
  inst.etas = std::move(etas);
  inst.int_coeffs = std::move(coeffs);
  return inst;
}

BwBound bw_lower_bound(const LinearFormInstance& form) {
  // Precondition: Lambda != 0 certified.
  bool nonzero = false;
  mpfr_prec_t pz = 128;
  for (; pz <= (1 << 14); pz *= 2) {
    Interval l = form.Lambda.at(pz);
    if (!l.contains_zero()) {
      nonzero = true;
      break;
    }
  }
  if (!nonzero)
    throw Error(Error::Code::unresolved,
                "linear form enclosure still contains zero; vanishing-form "
                "branch must be used");
  int k = static_cast<int>(form.etas.size());
  CReal c = bw_constant(k, form.field_degree);
  CReal prod = c;
  for (const auto& hv : form.heights) prod = prod * hv.h_prime;
  CReal hl = CReal([L = form.L_cap](mpfr_prec_t p) { return L.at(p).log(); });
  CReal zero = CReal::constant(mpq_class(0));
  CReal bound = zero - prod * hl;
  BwBound out;
  out.log_lambda_lb = bound;
  out.log_phi_lb = bound - log2_r();
  out.phi_transfer_valid = false;
  for (mpfr_prec_t p = 128; p <= (1 << 12); p *= 2) {
    Interval l = form.Lambda.at(p).abs();
    if (l.certainly_le(Interval::from_q(mpq_class(1, 2), p))) {
      out.phi_transfer_valid = true;
      break;
    }
    if (Interval::from_q(mpq_class(1, 2), p).certainly_lt(l)) break;
  }
  return out;
}

CReal mult_indep_height_bound(const NFElem& alpha, const NFElem& beta, long n,
                              long m, std::optional<mpq_class> C_prime,
                              bool independence_asserted) {
  if (n == 0 && m == 0) return CReal::constant(mpq_class(0));
  // Exact independence check for the quadratic-unit / rational case:
  // |Norm(alpha)| = 1 with |beta| rational != 1 forces independence.
  bool indep = independence_asserted;
  if (!indep && beta.is_rational()) {
    mpq_class b = *beta.as_rational();
    mpq_class na = alpha.norm();
    if (abs(na) == 1 && abs(b) != 1 && !alpha.is_rational()) indep = true;
  }
  if (!indep)
    throw Error(Error::Code::config,
                "multiplicative independence not established for this pair");
  // Direct derivation for the golden-unit / 2 pair.
  QPoly mp = alpha.min_poly();
  bool golden = mp.degree() == 2 && mp.coeff(2) == 1 && mp.coeff(1) == -1 &&
                mp.coeff(0) == -1;
  bool beta2 = beta.is_rational() && *beta.as_rational() == 2;
  if (golden && beta2) {
    NFElem ac = alpha;
    long nn = n;
    return CReal([ac, nn](mpfr_prec_t p) {
      Interval v = Interval::exact_si(nn, p) * ac.embed_real(p).log() -
                   Interval::exact_si(2, p).log();
      return imax(Interval::exact_si(0, p), v);
    });
  }
  if (!C_prime)
    throw Error(Error::Code::config,
                "no configured lower-bound constant for this pair");
  long mx = std::max(n < 0 ? -n : n, m < 0 ? -m : m);
  return CReal::constant(*C_prime * mpq_class(mx));
}

CReal pdw_solve(const CReal& u, const CReal& v, const CReal& h) {
  // Validate: u >= 0, v > 0, h >= 1 (certified where decidable).
  mpfr_prec_t p0 = 192;
  Interval ui = u.at(p0), vi = v.at(p0), hi = h.at(p0);
  if (ui.is_negative())
    throw Error(Error::Code::invalid_domain, "pdw_solve: u must be >= 0");
  if (!vi.is_positive())
    throw Error(Error::Code::invalid_domain, "pdw_solve: v must be > 0");
  if (hi.certainly_lt(Interval::exact_si(1, p0)))
    throw Error(Error::Code::invalid_domain, "pdw_solve: h must be >= 1");
  CReal uc = u, vc = v, hc = h;
  return CReal([uc, vc, hc](mpfr_prec_t p) -> Interval {
    mpfr_prec_t q = std::max<mpfr_prec_t>(p, 160);
    // v > 0 and h >= 1 were validated; refine until the enclosures admit
    // the logarithms.
    while (!(vc.at(q).is_positive() && hc.at(q).is_positive())) {
      q *= 2;
      if (q > (1 << 16))
        throw Error(Error::Code::precision, "pdw_solve: enclosures too wide");
    }
    Interval ui = uc.at(q), vi = vc.at(q), hi = hc.at(q);
    Interval zero = Interval::exact_si(0, q);
    Interval one = Interval::exact_si(1, q);
    Interval two = Interval::exact_si(2, q);
    ui = imax(zero, ui);
    Interval invh = one / hi;
    Interval u1h = rpow(ui, invh, q);
    Interval v1h = rpow(vi, invh, q);
    // log(h^h v) = h log h + log v
    Interval loghv = hi * hi.log() + vi.log();
    Interval inner1 = imax(zero, u1h + v1h * loghv);
    Interval pow2h = (hi * two.log()).exp();
    Interval b1 = pow2h * rpow(inner1, hi, q);
    Interval e2 = two.exp();
    Interval inner2 = u1h + two * e2;
    Interval b2 = pow2h * rpow(inner2, hi, q);
    return imax(b1, b2);
  });
}

}  // namespace recsolve
