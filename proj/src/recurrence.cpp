#include "recsolve/recurrence.hpp"

#include <algorithm>

namespace recsolve {

QPoly Recurrence::char_poly() const {
  int d = order();
  std::vector<mpq_class> c(d + 1, mpq_class(0));
  c[d] = 1;
  for (int i = 1; i <= d; ++i) c[d - i] = mpq_class(-coeffs[i - 1]);
  return QPoly(std::move(c));
}

mpz_class Recurrence::term(long n) const {
  if (n < 0) throw Error(Error::Code::invalid_domain, "term index negative");
  int d = order();
  if (n < d) return initial[n];
  std::vector<mpz_class> win(initial.begin(), initial.end());
  mpz_class next;
  for (long i = d; i <= n; ++i) {
    next = 0;
    for (int j = 0; j < d; ++j) next += coeffs[j] * win[d - 1 - j];
    std::rotate(win.begin(), win.begin() + 1, win.end());
    win[d - 1] = next;
  }
  return win[d - 1];
}

std::vector<mpz_class> Recurrence::terms_upto(long n) const {
  std::vector<mpz_class> out;
  out.reserve(n + 1);
  int d = order();
  for (long i = 0; i <= n && i < d; ++i) out.push_back(initial[i]);
  for (long i = d; i <= n; ++i) {
    mpz_class next(0);
    for (int j = 0; j < d; ++j) next += coeffs[j] * out[i - 1 - j];
    out.push_back(next);
  }
  return out;
}

Admissibility check_admissible(const Recurrence& rec) {
  Admissibility adm;
  if (rec.coeffs.empty() || rec.coeffs.back() == 0)
    throw Error(Error::Code::invalid_domain,
                "recurrence needs nonzero last coefficient");
  QPoly f = rec.char_poly();
  adm.simple = f.squarefree();
  QPoly sf = f.squarefree_part();
  int d = sf.degree();
  if (d <= 1) {
    adm.non_degenerate = true;
    return adm;
  }
  // A ratio of two distinct roots is a root of x -> Res_y(f(y), f(x*y)).
  // Degenerate iff that polynomial shares a factor with some cyclotomic
  // Phi_m, m >= 2, phi(m) <= d^2 (the ratio has degree at most d^2).
  unsigned dd = static_cast<unsigned>(d) * static_cast<unsigned>(d);
  // Build R(x) by evaluation/interpolation at x = 1..d^2+1.
  int deg_bound = static_cast<int>(dd);
  std::vector<mpq_class> xs, vals;
  for (int t = 1; static_cast<int>(xs.size()) <= deg_bound; ++t) {
    mpq_class x0(t);
    vals.push_back(QPoly::resultant(sf, sf.compose_scale(x0)));
    xs.push_back(x0);
  }
  QPoly R;
  for (size_t i = 0; i < xs.size(); ++i) {
    QPoly term = QPoly::constant(1);
    mpq_class denom(1);
    for (size_t j = 0; j < xs.size(); ++j) {
      if (i == j) continue;
      term = term * QPoly({-xs[j], mpq_class(1)});
      denom *= xs[i] - xs[j];
    }
    R = R + term.scale(vals[i] / denom);
  }
  adm.non_degenerate = true;
  for (unsigned m = 2; m <= 2 * dd * dd + 4; ++m) {
    if (totient(m) > dd) continue;
    if (QPoly::gcd(R, cyclotomic(m)).degree() > 0) {
      adm.non_degenerate = false;
      adm.degeneracy_order = m;
      if (m == 2) adm.degeneracy_ratio = "-1";
      else
        adm.degeneracy_ratio =
            "primitive root of unity of order " + std::to_string(m);
      break;
    }
  }
  return adm;
}

Spectral spectral_analyze(const Recurrence& rec) {
  Admissibility adm = check_admissible(rec);
  if (!adm.simple)
    throw Error(Error::Code::invalid_domain,
                "recurrence is not simple (repeated characteristic root)");
  if (!adm.non_degenerate)
    throw Error(Error::Code::invalid_domain,
                "recurrence is degenerate (root ratio is a root of unity)");
  Spectral sp;
  sp.order = rec.order();
  sp.charpoly = rec.char_poly();
  const QPoly f = sp.charpoly;
  int d = f.degree();

  // Locate the dominant root: unique root of maximal modulus.  For a real
  // polynomial such a root is automatically real.
  mpfr_prec_t prec = 256;
  int dom = -1;
  std::vector<RootDisk> roots;
  for (;; prec *= 2) {
    if (prec > (1 << 15))
      throw Error(Error::Code::precision, "dominant root separation failed");
    try {
      roots = certified_roots(f, prec);
    } catch (const Error& e) {
      if (e.code == Error::Code::precision) continue;
      throw;
    }
    // Find the root whose modulus is certainly above all others.
    dom = -1;
    for (int i = 0; i < d; ++i) {
      bool dominant = true;
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        if (!roots[j].modulus.certainly_lt(roots[i].modulus)) {
          dominant = false;
          break;
        }
      }
      if (dominant) { dom = i; break; }
    }
    if (dom >= 0) break;
    // Could be a genuine tie (no dominant root).  Detect exact ties via the
    // pair structure: if the two largest moduli cannot be separated at high
    // precision, give up with invalid_domain rather than precision.
    if (prec >= (1 << 14))
      throw Error(Error::Code::invalid_domain,
                  "recurrence has no unique dominant characteristic root");
  }
  if (!roots[dom].real)
    throw Error(Error::Code::internal, "dominant root not certified real");
  Interval alpha_enc = roots[dom].center.re;
  if (!Interval::exact_si(1, 64).certainly_lt(alpha_enc))
    throw Error(Error::Code::invalid_domain,
                "dominant characteristic root is not greater than 1");
  sp.alpha_gt_one = true;

  // Exact minimal polynomial and the number field Q(alpha).
  sp.alpha_min_poly = min_poly_of_root(f, alpha_enc);
  sp.field = NumberField::create(sp.alpha_min_poly, alpha_enc);
  sp.alpha = sp.field->gen();

  // Exact leading Binet coefficient via the generating function
  //   sum U_n x^n = N(x) / D(x),  D(x) = 1 - c_1 x - ... - c_d x^d,
  //   u = -alpha * N(1/alpha) / D'(1/alpha).
  std::vector<mpq_class> Dc(d + 1, mpq_class(0));
  Dc[0] = 1;
  for (int i = 1; i <= d; ++i) Dc[i] = mpq_class(-rec.coeffs[i - 1]);
  QPoly D(std::move(Dc));
  std::vector<mpq_class> Nc(d, mpq_class(0));
  for (int n = 0; n < d; ++n) {
    mpq_class v(rec.initial[n]);
    for (int j = 1; j <= n; ++j) v -= mpq_class(rec.coeffs[j - 1]) *
                                     mpq_class(rec.initial[n - j]);
    Nc[n] = v;
  }
  QPoly N(std::move(Nc));
  NFElem inv_alpha = sp.alpha.inverse();
  auto eval_nf = [&](const QPoly& p, const NFElem& x) {
    NFElem acc = sp.field->zero();
    for (int i = p.degree(); i >= 0; --i)
      acc = acc * x + sp.field->from_q(p.coeff(i));
    return acc;
  };
  NFElem Dp = eval_nf(D.derivative(), inv_alpha);
  if (Dp.is_zero())
    throw Error(Error::Code::internal, "simple root with vanishing D'(1/alpha)");
  sp.u = -(sp.alpha * eval_nf(N, inv_alpha) / Dp);
  if (sp.u.is_zero())
    throw Error(Error::Code::invalid_domain,
                "leading Binet coefficient vanishes (degenerate start values)");

  // Refinable enclosures.  Root disks are recomputed from the
  // characteristic polynomial at the requested precision inside each
  // generator; the dominant root is re-identified by maximal modulus.
  QPoly charpoly = f;
  sp.alpha_r = CReal([charpoly](mpfr_prec_t p) -> Interval {
    for (mpfr_prec_t q = std::max<mpfr_prec_t>(p, 192);; q *= 2) {
      if (q > (1 << 16))
        throw Error(Error::Code::precision, "alpha refinement failed");
      try {
        auto rs = certified_roots(charpoly, q);
        int best = -1;
        for (size_t i = 0; i < rs.size(); ++i) {
          bool dominant = true;
          for (size_t j = 0; j < rs.size(); ++j)
            if (i != j && !rs[j].modulus.certainly_lt(rs[i].modulus)) {
              dominant = false;
              break;
            }
          if (dominant) { best = static_cast<int>(i); break; }
        }
        if (best < 0) continue;
        return rs[best].center.re;
      } catch (const Error& e) {
        if (e.code == Error::Code::precision) continue;
        throw;
      }
    }
  });
  if (d == 1) {
    // Conventions for order-1 sequences: no secondary roots, so the tail
    // constant is exactly zero; the second-root modulus placeholder 1/2
    // keeps ratio formulas well-defined and is only ever multiplied by 0.
    sp.alpha2_mod = CReal([](mpfr_prec_t p) {
      return Interval::from_q(mpq_class(1, 2), p);
    });
    sp.c1_tail = CReal([](mpfr_prec_t p) { return Interval::exact_si(0, p); });
  } else {
    QPoly Dcopy = D, Ncopy = N;
    sp.alpha2_mod = CReal([charpoly](mpfr_prec_t p) -> Interval {
      for (mpfr_prec_t q = std::max<mpfr_prec_t>(p, 192);; q *= 2) {
        if (q > (1 << 16))
          throw Error(Error::Code::precision, "alpha2 refinement failed");
        try {
          auto rs = certified_roots(charpoly, q);
          int best = -1;
          for (size_t i = 0; i < rs.size(); ++i) {
            bool dominant = true;
            for (size_t j = 0; j < rs.size(); ++j)
              if (i != j && !rs[j].modulus.certainly_lt(rs[i].modulus)) {
                dominant = false;
                break;
              }
            if (dominant) { best = static_cast<int>(i); break; }
          }
          if (best < 0) continue;
          Interval m2(q);
          bool first = true;
          for (size_t i = 0; i < rs.size(); ++i) {
            if (static_cast<int>(i) == best) continue;
            m2 = first ? rs[i].modulus : imax(m2, rs[i].modulus);
            first = false;
          }
          return m2;
        } catch (const Error& e) {
          if (e.code == Error::Code::precision) continue;
          throw;
        }
      }
    });
    sp.c1_tail = CReal([charpoly, Dcopy, Ncopy](mpfr_prec_t p) -> Interval {
      for (mpfr_prec_t q = std::max<mpfr_prec_t>(p, 192);; q *= 2) {
        if (q > (1 << 16))
          throw Error(Error::Code::precision, "tail bound refinement failed");
        try {
          auto rs = certified_roots(charpoly, q);
          int best = -1;
          for (size_t i = 0; i < rs.size(); ++i) {
            bool dominant = true;
            for (size_t j = 0; j < rs.size(); ++j)
              if (i != j && !rs[j].modulus.certainly_lt(rs[i].modulus)) {
                dominant = false;
                break;
              }
            if (dominant) { best = static_cast<int>(i); break; }
          }
          if (best < 0) continue;
          // Sum of |u_j| over the non-dominant roots, evaluated on disks:
          // u_j = -alpha_j N(1/alpha_j) / D'(1/alpha_j).
          Interval sum = Interval::exact_si(0, q);
          QPoly Dp = Dcopy.derivative();
          for (size_t i = 0; i < rs.size(); ++i) {
            if (static_cast<int>(i) == best) continue;
            CInterval aj = rs[i].center;
            CInterval one = CInterval::exact_si(1, 0, q);
            CInterval inv = one / aj;
            CInterval uj = -(aj * Ncopy.eval_ci(inv) / Dp.eval_ci(inv));
            sum = sum + uj.modulus();
          }
          return sum;
        } catch (const Error& e) {
          if (e.code == Error::Code::precision) continue;
          throw;
        }
      }
    });
  }
  NFElem ucopy = sp.u;
  sp.u_abs = CReal([ucopy](mpfr_prec_t p) { return ucopy.embed_real(p).abs(); });
  return sp;
}

}  // namespace recsolve
