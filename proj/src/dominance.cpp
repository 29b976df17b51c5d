#include "recsolve/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace recsolve {

namespace {

constexpr long kGapCap = 1000000;  // safety valve for N-set scans

// (2^20 - 1) / 2^20: certificates are shaved by this factor so that the
// certified constants sit strictly below the exact minima, making the
// strict inequalities decidable at finite precision.
mpq_class shave_factor() {
  mpz_class d(1);
  d <<= 20;
  return mpq_class(d - 1, d);
}

NFElem min_nf(const NFElem& a, const NFElem& b) {
  return exact_sign(a - b) <= 0 ? a : b;
}

CReal nf_creal(const NFElem& x) {
  return CReal([x](mpfr_prec_t p) { return x.embed_real(p); });
}

struct Tup {
  std::vector<long> gaps;  // m_2 < ... < m_K
  NFElem S;                // a_1 + sum a_i alpha^{-m_i}, exact
};

std::vector<long> gaps_to_exponents(const std::vector<long>& gaps) {
  long mK = gaps.back();
  std::vector<long> n;
  n.push_back(mK);
  for (size_t i = 0; i < gaps.size(); ++i) n.push_back(mK - gaps[i]);
  return n;
}

// Certify U_n > 0 for every n >= 0: the dominant term must outgrow the tail
// beyond some index, and the initial stretch is checked exactly.
bool sequence_all_positive(const Recurrence& rec, const Spectral& sp) {
  if (exact_sign(sp.u) <= 0) return false;
  long n0 = -1;
  mpfr_prec_t p = 192;
  for (long n = 0; n <= 10000; ++n) {
    Interval alpha = sp.alpha_r.at(p);
    Interval u = sp.u_abs.at(p);
    Interval c1 = sp.c1_tail.at(p);
    Interval q = imax(Interval::exact_si(1, p), sp.alpha2_mod.at(p));
    Interval lhs = u * alpha.pow_si(n);
    Interval rhs = c1 * q.pow_si(n);
    if (rhs.certainly_lt(lhs)) {
      n0 = n;
      break;
    }
    if (n % 16 == 15) p *= 2;
    if (p > (1 << 14)) break;
  }
  if (n0 < 0) return false;
  auto head = rec.terms_upto(n0);
  for (long n = 0; n < n0; ++n)
    if (head[n] <= 0) return false;
  return true;
}

}  // namespace

SideSpec::SideSpec(Recurrence r, std::vector<mpz_class> coeffs)
    : rec(std::move(r)), coefficients(std::move(coeffs)), A(0) {
  if (coefficients.empty())
    throw Error(Error::Code::config, "coefficient tuple must be nonempty");
  for (const auto& a : coefficients) {
    if (a == 0)
      throw Error(Error::Code::config,
                  "coefficient tuple must not contain zeros");
    A = std::max(A, mpz_class(abs(a)));
  }
}

std::optional<long> relation_solve(const NFElem& alpha,
                                   const std::vector<mpz_class>& prefix_coeffs,
                                   const std::vector<long>& prefix_gaps,
                                   const mpz_class& aK) {
  if (prefix_coeffs.size() != prefix_gaps.size() + 1)
    throw Error(Error::Code::config,
                "relation_solve: coefficient/gap arity mismatch");
  auto F = alpha.field_ptr();
  NFElem inv = alpha.inverse();
  NFElem P = F->from_q(mpq_class(prefix_coeffs[0]));
  for (size_t i = 0; i < prefix_gaps.size(); ++i)
    P = P + F->from_q(mpq_class(prefix_coeffs[i + 1])) * inv.pow(prefix_gaps[i]);
  if (P.is_zero()) return std::nullopt;
  NFElem rho = -(P / F->from_q(mpq_class(aK)));
  if (exact_sign(rho) <= 0) return std::nullopt;  // alpha^{-m} > 0 always
  long mmin = prefix_gaps.empty() ? 1 : prefix_gaps.back() + 1;
  for (mpfr_prec_t p = 192;; p *= 2) {
    if (p > (1 << 18))
      throw Error(Error::Code::internal,
                  "relation_solve: log-candidate enclosure did not shrink");
    Interval r = rho.embed_real(p);
    if (!r.is_positive()) continue;
    Interval la = alpha.embed_real(p).log();
    Interval mr = -(r.log()) / la;
    if (mr.width_d() > 0.25) continue;
    long lo = static_cast<long>(std::floor(mr.lo_d())) - 1;
    long hi = static_cast<long>(std::ceil(mr.hi_d())) + 1;
    NFElem one = F->one();
    for (long m = std::max(lo, mmin); m <= hi; ++m)
      if (rho * alpha.pow(m) == one) return m;
    return std::nullopt;
  }
}

DominanceCertificate check_dominance(const SideSpec& side) {
  const auto& a = side.coefficients;
  const size_t k = a.size();
  Spectral sp = spectral_analyze(side.rec);
  auto F = sp.field;
  const NFElem alpha = sp.alpha;
  DominanceCertificate cert;

  mpq_class a1_abs = mpq_class(abs(a[0]));

  if (k == 1) {
    cert.verdict = Verdict::Dominant;
    cert.c2 = CReal::constant(a1_abs);
    cert.c3 = CReal::constant(a1_abs);
    cert.c3_formula =
        "single term: C2 = C3 = |a_1| (equality attained, bound is >=)";
    return cert;
  }

  bool all_positive_units = true;
  for (const auto& ai : a)
    if (ai < 1) all_positive_units = false;
  if (all_positive_units && sequence_all_positive(side.rec, sp)) {
    // Every term of the combination is positive, so the leading term is a
    // strict lower bound: C2 = C3 = a_1 exactly, and the same holds for
    // every prefix of the combination.
    cert.verdict = Verdict::Dominant;
    cert.fast_path = true;
    cert.c2 = CReal::constant(mpq_class(a[0]));
    cert.c3 = CReal::constant(mpq_class(a[0]));
    for (size_t j = 2; j <= k; ++j)
      cert.per_level_c2.push_back(CReal::constant(mpq_class(a[0])));
    cert.c3_formula =
        "positive tuple over a positive sequence: C2 = C3 = a_1";
    return cert;
  }

  // General path: level-by-level exceptional sets with exact arithmetic.
  const NFElem one = F->one();
  const NFElem inv = alpha.inverse();
  const NFElem am1 = alpha - one;            // alpha - 1 > 0
  const NFElem Anf = F->from_q(mpq_class(side.A));
  const NFElem half = F->from_q(mpq_class(1, 2));

  std::vector<Tup> cur;
  NFElem c2cur = half;  // running C2^(K)

  // Level 2.
  if (auto m = relation_solve(alpha, {a[0]}, {}, a[1])) {
    cert.verdict = Verdict::NotDominant;
    cert.witness = gaps_to_exponents({*m});
    return cert;
  }
  {
    NFElem margin = F->from_q(a1_abs) - half;  // |a_1| - 1/2 >= 1/2 > 0
    std::vector<std::vector<long>> set2;
    for (long m = 1;; ++m) {
      if (m > kGapCap)
        throw Error(Error::Code::precision,
                    "level-2 exceptional scan exceeded the gap cap");
      NFElem lhs = margin * am1 * alpha.pow(m - 1);
      if (exact_sign(lhs - Anf) > 0) break;  // monotone: all later m excluded
      NFElem S = F->from_q(mpq_class(a[0])) +
                 F->from_q(mpq_class(a[1])) * inv.pow(m);
      if (S.is_zero()) {  // defensive: relation_solve must have caught this
        cert.verdict = Verdict::NotDominant;
        cert.witness = gaps_to_exponents({m});
        return cert;
      }
      cur.push_back(Tup{{m}, S});
      set2.push_back({m});
      c2cur = min_nf(c2cur, exact_abs(S));
    }
    cert.exceptional_sets.push_back(std::move(set2));
    cert.per_level_c2.push_back(nf_creal(c2cur));
  }

  // Levels 3..k.
  for (size_t K = 3; K <= k; ++K) {
    NFElem thr = c2cur * half;  // C2^(K-1) / 2
    std::vector<Tup> next;
    std::vector<std::vector<long>> setK;
    std::vector<mpz_class> pc(a.begin(), a.begin() + (K - 1));
    for (const Tup& p : cur) {
      if (auto m = relation_solve(alpha, pc, p.gaps, a[K - 1])) {
        std::vector<long> g = p.gaps;
        g.push_back(*m);
        cert.verdict = Verdict::NotDominant;
        cert.witness = gaps_to_exponents(g);
        return cert;
      }
      NFElem margin = exact_abs(p.S) - thr;
      if (exact_sign(margin) <= 0)
        throw Error(Error::Code::internal,
                    "partial sum fell below half the previous level constant");
      for (long m = p.gaps.back() + 1;; ++m) {
        if (m > kGapCap)
          throw Error(Error::Code::precision,
                      "exceptional scan exceeded the gap cap");
        NFElem lhs = margin * am1 * alpha.pow(m - 1);
        if (exact_sign(lhs - Anf) > 0) break;
        NFElem S = p.S + F->from_q(mpq_class(a[K - 1])) * inv.pow(m);
        std::vector<long> g = p.gaps;
        g.push_back(m);
        if (S.is_zero()) {  // defensive
          cert.verdict = Verdict::NotDominant;
          cert.witness = gaps_to_exponents(g);
          return cert;
        }
        next.push_back(Tup{g, S});
        setK.push_back(std::move(g));
      }
    }
    NFElem c2next = c2cur * half;
    for (const Tup& t : next) c2next = min_nf(c2next, exact_abs(t.S));
    c2cur = c2next;
    cur = std::move(next);
    cert.exceptional_sets.push_back(std::move(setK));
    cert.per_level_c2.push_back(nf_creal(c2cur));
  }

  cert.verdict = Verdict::Dominant;
  mpq_class shave = shave_factor();
  NFElem c2cert = c2cur * F->from_q(shave);
  cert.c2 = nf_creal(c2cert);

  // Sequence-side constant: |sum a_i U_{n_i}| >= |u| C2 alpha^{n_1} -
  // k A C1 max(1,|alpha_2|)^{n_1}, and |U_{n_1}| <= (|u|+C1) alpha^{n_1}.
  CReal u = sp.u_abs, c1 = sp.c1_tail;
  CReal c2r = nf_creal(c2cur);
  CReal kA = CReal::constant(mpq_class(mpz_class(k) * side.A));
  CReal c3f = (u * c2r - kA * c1) / (u + c1);
  mpfr_prec_t p = 256;
  if (c3f.at(p).is_positive()) {
    cert.c3 = c3f * CReal::constant(shave);
    cert.c3_formula = "C3 = (|u| C2 - k A C1) / (|u| + C1)";
  } else {
    // The direct formula is not positive: split the exponent range.  Beyond
    // n*, the tail k A C1 q^n (q = max(1,|alpha_2|)/alpha < 1) is below
    // half the main term; below n*, every tuple is checked exactly.
    CReal q = CReal([sp](mpfr_prec_t pp) {
      return imax(Interval::exact_si(1, pp), sp.alpha2_mod.at(pp)) /
             sp.alpha_r.at(pp);
    });
    long nstar = -1;
    for (long n = 0; n <= 4096 && nstar < 0; ++n) {
      Interval lhs = (kA * c1).at(p) * q.at(p).pow_si(n);
      Interval rhs = (u * c2r).at(p) / Interval::exact_si(2, p);
      if (lhs.certainly_lt(rhs)) nstar = n;
      if (n % 32 == 31) p *= 2;
    }
    if (nstar < 0)
      throw Error(Error::Code::precision,
                  "sequence-side constant: no exponent split point found");
    // Exact minimum of |sum a_i U_{n_i}| / |U_{n_1}| over n_1 < n*.
    auto terms = side.rec.terms_upto(std::max<long>(nstar - 1, 0));
    std::optional<mpq_class> minratio;
    double combos = 1;
    for (size_t i = 0; i < k; ++i)
      combos *= static_cast<double>(nstar - i) / static_cast<double>(i + 1);
    if (nstar >= static_cast<long>(k)) {
      if (combos > 2e6)
        throw Error(Error::Code::precision,
                    "sequence-side constant: exact range too large");
      // Iterate all strictly decreasing k-tuples from {0..n*-1}.
      std::vector<long> c(k);
      for (size_t i = 0; i < k; ++i) c[i] = static_cast<long>(k - 1 - i);
      // c holds n_k..n_1 increasing; enumerate combinations.
      bool done = false;
      while (!done) {
        mpz_class s(0);
        for (size_t i = 0; i < k; ++i) s += a[i] * terms[c[k - 1 - i]];
        mpz_class den = abs(terms[c[k - 1]]);
        mpz_class num = abs(s);
        if (num == 0)
          throw Error(Error::Code::invalid_domain,
                      "sequence-side combination vanishes exactly; no "
                      "positive lower constant exists");
        if (den != 0) {
          mpq_class ratio(num, den);
          ratio.canonicalize();
          if (!minratio || ratio < *minratio) minratio = ratio;
        }
        // next combination
        long i = static_cast<long>(k) - 1;
        while (i >= 0 && c[i] == nstar - 1 - (static_cast<long>(k) - 1 - i))
          --i;
        if (i < 0) done = true;
        else {
          ++c[i];
          for (size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
        }
      }
    }
    CReal asym = (u * c2r) / (CReal::constant(mpq_class(2)) * (u + c1));
    CReal c3v = minratio
                    ? CReal([asym, mr = *minratio](mpfr_prec_t pp) {
                        return imin(asym.at(pp), Interval::from_q(mr, pp));
                      })
                    : asym;
    cert.c3 = c3v * CReal::constant(shave);
    cert.c3_formula =
        "C3 = min( |u| C2 / (2(|u|+C1))  [n_1 >= n*],  exact minimum of "
        "|sum a_i U_{n_i}|/|U_{n_1}| over n_1 < n* )";
  }
  return cert;
}

std::pair<CReal, CReal> infimum_supremum_proxies(const SideSpec& side) {
  DominanceCertificate cert = check_dominance(side);
  if (cert.verdict != Verdict::NotDominant && !cert.c3)
    throw Error(Error::Code::internal, "dominant certificate lacks C3");
  if (cert.verdict == Verdict::NotDominant)
    throw Error(Error::Code::invalid_domain,
                "tuple does not admit dominance; no infimum proxy exists");
  Spectral sp = spectral_analyze(side.rec);
  CReal u = sp.u_abs, c1 = sp.c1_tail;
  CReal Ar = CReal::constant(mpq_class(side.A));
  CReal upper(CReal::constant(mpq_class(1)));
  if (side.coefficients.size() == 1) {
    upper = Ar * (u + c1) / u;
  } else {
    CReal alpha = CReal([sp](mpfr_prec_t p) { return sp.alpha_r.at(p); });
    CReal onec = CReal::constant(mpq_class(1));
    upper = Ar * (u + c1) * alpha / ((alpha - onec) * u);
  }
  return {*cert.c3, upper};
}

std::string DominanceCertificate::report() const {
  std::ostringstream os;
  os << "verdict: "
     << (verdict == Verdict::Dominant ? "Dominant" : "NotDominant") << "\n";
  if (witness) {
    os << "vanishing relation at exponents (";
    for (size_t i = 0; i < witness->size(); ++i)
      os << (i ? ", " : "") << (*witness)[i];
    os << ")\n";
  }
  if (c2) os << "C2 >= " << c2->at(96).str(8) << "\n";
  if (c3) os << "C3 >= " << c3->at(96).str(8) << "\n";
  if (!c3_formula.empty()) os << "C3 rule: " << c3_formula << "\n";
  if (fast_path) os << "fast path: positive tuple over positive sequence\n";
  for (size_t lvl = 0; lvl < exceptional_sets.size(); ++lvl) {
    os << "exceptional set, level " << (lvl + 2) << ": {";
    for (size_t i = 0; i < exceptional_sets[lvl].size(); ++i) {
      os << (i ? ", " : "") << "(";
      const auto& t = exceptional_sets[lvl][i];
      for (size_t j = 0; j < t.size(); ++j) os << (j ? "," : "") << t[j];
      os << ")";
    }
    os << "}\n";
  }
  for (size_t lvl = 0; lvl < per_level_c2.size(); ++lvl)
    os << "C2^(" << (lvl + 2) << ") >= " << per_level_c2[lvl].at(96).str(8)
       << "\n";
  return os.str();
}

}  // namespace recsolve
