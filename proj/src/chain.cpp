// Constant chain for a linear equation between two dominant-root
// recurrence sequences: base-level and general-level branch constants, the
// final per-level constant C, the finiteness bound N, and the Stewart-style
// closed form.  Every constant is certified interval arithmetic end to end.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "recsolve/chain.hpp"
#include "cr_util.hpp"

namespace recsolve {

using namespace crutil;

namespace {

CReal fold_min(const std::vector<CReal>& xs, CReal init) {
  CReal m = std::move(init);
  for (const auto& x : xs) m = cr_min(m, x);
  return m;
}

// Smallest certified lower factor over the prefixes of one side:
// min{ |leading coefficient|, per-level constants }.
CReal prefix_min(const mpz_class& lead, const std::vector<CReal>& levels) {
  return fold_min(levels, cr_z(abs(lead)));
}

// Cap on sum_{i<K} (max{1,|alpha_2|})^{n_i - n_1} over strictly decreasing
// exponents: the term count always works; when |alpha_2| > 1 is certified
// the geometric sum |alpha_2|/(|alpha_2|-1) may be smaller.
CReal tail_weight_cap(const Spectral& s, long width) {
  CReal cap = cr_si(width);
  bool gt_one = false;
  for (mpfr_prec_t p : {static_cast<mpfr_prec_t>(128), static_cast<mpfr_prec_t>(256)}) {
    if (Interval::exact_si(1, p).certainly_lt(s.alpha2_mod.at(p))) {
      gt_one = true;
      break;
    }
  }
  if (!gt_one) return cap;
  CReal m2 = s.alpha2_mod;
  CReal geo = CReal([m2](mpfr_prec_t p) {
    Interval m = m2.at(p);
    return m / (m - Interval::exact_si(1, p));
  });
  return cr_min(cap, geo);
}

// Heights of eta = (anum * u) / (bden * v).  Exact whenever eta can be
// materialized in a single field (one of u, v rational, or both fields
// share the minimal polynomial and hence the marked root); otherwise the
// additivity calculus gives certified upper bounds.
struct EtaHeights {
  CReal h;        // upper bound (exact in the single-field route)
  CReal h_prime;  // modified height at the ambient degree
  bool exact = false;
};

EtaHeights eta_heights(const ProblemInstance& inst, const mpz_class& anum,
                       const mpz_class& bden) {
  const NFElem& u = inst.spec_left.u;
  const NFElem& v = inst.spec_right.u;
  int D = inst.field_degree;

  auto finish = [&](const NFElem& e) {
    HeightValue hv = weil_height(e, D);
    return EtaHeights{hv.h, hv.h_prime, true};
  };

  if (auto vq = v.as_rational()) {
    mpq_class scale = mpq_class(anum) / (mpq_class(bden) * (*vq));
    return finish(u * u.field_ptr()->from_q(scale));
  }
  if (auto uq = u.as_rational()) {
    mpq_class scale = mpq_class(anum) * (*uq) / mpq_class(bden);
    return finish(v.field_ptr()->from_q(scale) / v);
  }
  if (inst.spec_left.alpha_min_poly == inst.spec_right.alpha_min_poly) {
    // Same minimal polynomial: both fields mark its unique real root > 1,
    // so the coordinate vector of v transfers verbatim.
    NFElem v_here = inst.spec_left.field->from_coords(v.coords());
    NFElem e = (u * inst.spec_left.field->from_q(mpq_class(anum))) /
               (v_here * inst.spec_left.field->from_q(mpq_class(bden)));
    return finish(e);
  }

  // Calculus route: h(anum u / (bden v)) <= h(u) + h(v) + log|anum| +
  // log|bden|, and |log eta| bounded through the certified moduli.
  CReal h_ub = weil_height(u).h + weil_height(v).h +
               cr_z(abs(anum)).log() + cr_z(abs(bden)).log();
  CReal log_abs = cr_abs(cr_z(abs(anum)).log() + inst.spec_left.u_abs.log() -
                         cr_z(abs(bden)).log() - inst.spec_right.u_abs.log());
  return EtaHeights{h_ub, h_prime_upper(h_ub, log_abs, D), false};
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundChain accessors
// ---------------------------------------------------------------------------

bool BoundChain::has(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return true;
  }
  return false;
}

const CReal& BoundChain::c(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e.value;
  }
  throw Error(Error::Code::internal, "unknown chain constant: " + name);
}

std::string BoundChain::report() const {
  std::ostringstream os;
  os << "bound chain: k=" << k << " ell=" << ell << " D=" << field_degree
     << " n_star=" << n_star << " threshold=" << growth.n_threshold
     << " gaps=" << (weighted ? "weighted" : "raw") << "\n";
  for (const auto& e : entries) {
    os << "  " << e.name << " = " << e.value.at(128).str(20) << "  :: "
       << e.provenance << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// derive_chain
// ---------------------------------------------------------------------------

BoundChain derive_chain(const ProblemInstance& inst) {
  const Spectral& SU = inst.spec_left;
  const Spectral& SV = inst.spec_right;
  const long k = inst.k(), ell = inst.ell();
  const int D = inst.field_degree;
  const mpz_class a1 = abs(inst.left.coefficients.front());
  const mpz_class b1 = abs(inst.right.coefficients.front());

  GrowthData g = derive_growth_constants(inst);
  CReal Cprime = mult_indep_uniform(inst);

  BoundChain bc;
  bc.weighted = inst.weighted;
  bc.n_star = inst.n_star;
  bc.k = k;
  bc.ell = ell;
  bc.field_degree = D;
  bc.growth = g;

  auto put = [&bc](const std::string& name, CReal value, std::string prov) {
    bc.entries.push_back(ChainEntry{name, std::move(value), std::move(prov)});
  };

  const CReal log_ns = cr_si(g.n_threshold).log();
  const CReal one = cr_si(1);
  const CReal two = cr_si(2);
  // Slack divisor of the additive height terms; sound because the final C
  // is floored at 93, so (C log n_1)^j >= 93 log(threshold) whenever j >= 1.
  const CReal floor93 = cr_si(93);
  // Lower bound for |e^L - 1| on the branch |L| > 1/2.
  const CReal bad_branch = one - cr_q(mpq_class(-1, 2)).exp();
  // Division by the gap weight converts a linear-form decay bound into a
  // raw-gap bound; weighted mode keeps the weights inside the gaps instead.
  const CReal wmin = cr_min(g.wU, g.wV);
  auto gapify = [&](const CReal& core) {
    return inst.weighted ? core : core / wmin;
  };

  // --- carried-over side and growth constants -----------------------------
  put("C1U", SU.c1_tail,
      "left Binet tail: |U_n - u alpha^n| <= C1U |alpha_2|^n");
  put("C1V", SV.c1_tail,
      "right Binet tail: |V_m - v beta^m| <= C1V |beta_2|^m");
  CReal c2u_min = prefix_min(a1, inst.cert_left.per_level_c2);
  CReal c2v_min = fold_min(inst.c2_prefix_right,
                           inst.c2_prefix_right.front());
  put("C2U", c2u_min,
      "smallest certified prefix factor on the left: |sum_{i<=j} a_i "
      "alpha^{n_i}| > C2U alpha^{n_1} for every prefix j");
  put("C2V", c2v_min,
      "smallest certified prefix factor on the right: |sum_{j<=i} b_j "
      "beta^{m_j}| > C2V beta^{m_1} for every prefix i");
  put("C3U", *inst.cert_left.c3,
      "certified dominance: |sum a_i U_{n_i}| > C3U |U_{n_1}|");
  put("C3V", *inst.cert_right.c3,
      "certified dominance: |sum b_j V_{m_j}| > C3V |V_{m_1}|");
  put("C4U", g.nuU,
      "left positivity margin nu(n) = |u| - C1U (max{1,|alpha_2|}/alpha)^n "
      "at the first index where it is certified positive");
  put("C4V", g.nuV, "right positivity margin at its first positive index");
  put("C5p", g.C5p,
      "C3U * C4U: |sum a_i U_{n_i}| >= C5p alpha^{n_1} once n_1 reaches the "
      "left positivity index");
  put("C5pp", g.C5pp, "C3V * C4V: right-side analogue of C5p");
  put("C6p", g.C6p,
      "B (|v|+C1V) beta/(beta-1): |sum b_j V_{m_j}| <= C6p beta^{m_1}");
  put("C6pp", g.C6pp,
      "A (|u|+C1U) alpha/(alpha-1): |sum a_i U_{n_i}| <= C6pp alpha^{n_1}");
  put("C5", g.C5,
      "C5pp/C6pp: alpha^{n_1}/beta^{m_1} > C5 at every solution with m_1 at "
      "or beyond the right positivity index");
  put("C6", g.C6,
      "C6p/C5p: alpha^{n_1}/beta^{m_1} < C6 at every solution with n_1 at "
      "or beyond the left positivity index");
  put("C7", g.C7, "n_1/m_1 > C7 at solutions beyond the threshold");
  put("C8", g.C8, "n_1/m_1 < C8 at solutions beyond the threshold");
  put("CL", g.CL,
      "max{n_1, m_1} <= CL n_1 at solutions with n_1 >= threshold");
  put("Cprime", Cprime,
      "uniform multiplicative independence: h(alpha^n beta^{-m}) >= Cprime "
      "max{|n|, |m|}");

  // --- heights -------------------------------------------------------------
  HeightValue h_alpha = weil_height(SU.alpha, D);
  HeightValue h_beta = weil_height(SV.alpha, D);
  EtaHeights h_uv = eta_heights(inst, 1, 1);
  EtaHeights h_eta1 = eta_heights(inst, inst.left.coefficients.front(),
                                  inst.right.coefficients.front());
  CReal bw3 = bw_constant(3, D);
  put("h_alpha", h_alpha.h, "Weil height of alpha");
  put("h_beta", h_beta.h, "Weil height of beta");
  put("hp_alpha", h_alpha.h_prime,
      "modified height of alpha at the composite degree D");
  put("hp_beta", h_beta.h_prime,
      "modified height of beta at the composite degree D");
  put("h_u_over_v", h_uv.h,
      std::string("height of u/v (") +
          (h_uv.exact ? "exact single-field evaluation"
                      : "certified additivity bound") +
          ")");
  put("h_eta1", h_eta1.h,
      std::string("height of a_1 u/(b_1 v) (") +
          (h_eta1.exact ? "exact single-field evaluation"
                        : "certified additivity bound") +
          ")");
  put("hp_eta1", h_eta1.h_prime,
      "modified height of a_1 u/(b_1 v) at the composite degree D");
  put("bw_C", bw3,
      "three-term linear-form constant 18*4!*3^4*(32 D)^5 log(6 D)");

  // --- base level (two exponents per side) ---------------------------------
  CReal C9 = g.C6pp;
  CReal C10 = g.C6p;
  put("C9", C9,
      "= C6pp; also bounds every left tail: sum_{i>=j} |a_i| |U_{n_i}| <= "
      "C9 alpha^{n_j}");
  put("C10", C10, "= C6p; right tail analogue of C9");
  CReal C11 = cr_max((C9 + cr_z(a1) * SU.c1_tail) * g.C6,
                     C10 + cr_z(b1) * SV.c1_tail) /
              (cr_z(b1) * SV.u_abs);
  put("C11", C11,
      "max{(C9+|a_1|C1U) C6, C10+|b_1|C1V}/(|b_1||v|): |a_1 u alpha^{n_1} / "
      "(b_1 v beta^{m_1}) - 1| <= 2 C11 max{alpha'^{-(n_1-n_2)}, "
      "beta'^{-(m_1-m_2)}}");

  CReal C12 = gapify(cr_pos((two * C11 / bad_branch).log()) / log_ns);
  put("C12", C12,
      "base branch |Lambda| > 1/2: |e^Lambda - 1| >= 1 - e^{-1/2}, so the "
      "smaller weighted gap is at most log(2 C11/(1-e^{-1/2})), spread over "
      "log(threshold)");
  CReal dep_denom = Cprime * cr_max(one, one / g.C8);
  CReal C13 = (inst.weighted ? g.wU * h_eta1.h : h_eta1.h) / dep_denom;
  put("C13", C13,
      "base branch Lambda = 0: alpha^{n_1} beta^{-m_1} = b_1 v/(a_1 u) "
      "forces n_1 <= h(a_1 u/(b_1 v)) / (Cprime max{1, 1/C8})");
  CReal log_cl_slack = one + g.CL.log() / log_ns;
  CReal C14 = gapify(bw3 * h_alpha.h_prime * h_beta.h_prime *
                         h_eta1.h_prime * log_cl_slack +
                     cr_pos((two * C11).log()) / log_ns);
  put("C14", C14,
      "base branch via the three-term linear form: decay exponent "
      "C(3,D) h'(alpha) h'(beta) h'(a_1 u/(b_1 v)) log(CL n_1) against the "
      "upper bound 2 C11 e^{-smaller weighted gap}");
  CReal C15 = cr_max(C12, cr_max(C13, C14));
  put("C15", C15, "base level: max{C12, C13, C14}");

  // --- general level -------------------------------------------------------
  CReal TU = tail_weight_cap(SU, k);
  CReal TV = tail_weight_cap(SV, ell);
  put("TU", TU,
      "cap on sum_{i<K} max{1,|alpha_2|}^{n_i - n_1}: term count, improved "
      "to the geometric sum when |alpha_2| > 1 is certified");
  put("TV", TV, "right-side analogue of TU");
  CReal C16 = cr_z(inst.left.A) * SU.c1_tail * TU;
  CReal C17 = cr_z(inst.right.A) * SV.c1_tail * TV;
  put("C16", C16,
      "A C1U TU: all collected left Binet tails, relative to "
      "max{1,|alpha_2|}^{n_1}");
  put("C17", C17, "B C1V TV: collected right Binet tails");
  put("C18", C9, "= C9 applied from the first uncollected left exponent");
  put("C19", C10, "= C10 applied from the first uncollected right exponent");
  CReal C20 =
      cr_max(g.C6 * (C9 + C16), C10 + C17) / (SV.u_abs * c2v_min);
  put("C20", C20,
      "max{C6 (C18+C16), C19+C17}/(|v| C2V): |eta_1 alpha^{n_1} "
      "beta^{-m_1} - 1| <= 2 C20 max{alpha'^{-(n_1-n_K)}, "
      "beta'^{-(m_1-m_L)}} with eta_1 the collected-prefix ratio");
  CReal C21 = gapify(cr_pos((two * C20 / bad_branch).log()) / log_ns);
  put("C21", C21,
      "general branch |Lambda| > 1/2: smaller weighted gap at most "
      "log(2 C20/(1-e^{-1/2})), spread over log(threshold)");

  CReal rho = inst.weighted
                  ? cr_max(h_alpha.h / g.wU, h_beta.h / g.wV)
                  : cr_max(h_alpha.h, h_beta.h);
  put("rho", rho,
      inst.weighted
          ? "height-per-weighted-gap rate max{h(alpha)/wU, h(beta)/wV}"
          : "height-per-gap rate max{h(alpha), h(beta)}");
  long m_max = k + ell + 3;
  CReal C22 = cr_q(mpq_class(101, 100)) * rho +
              (h_uv.h + cr_si(m_max) * (cr_z(inst.left.A).log() +
                                        cr_z(inst.right.A).log() + one)) /
                  (floor93 * log_ns);
  put("C22", C22,
      "1.01 rho + (h(u/v) + (k+ell+3)(log A + log B + 1))/(93 "
      "log(threshold)): h(eta_1) <= C22 (C log n_1)^{m-4} at level m");
  // |eta_1| is sandwiched by the prefix bounds, giving a fixed cap on
  // |log eta_1| independent of the level.
  CReal eta_up = SU.u_abs * cr_z(inst.left.A) * SU.alpha_r /
                 ((SU.alpha_r - one) * SV.u_abs * c2v_min);
  CReal eta_lo = SU.u_abs * c2u_min * (SV.alpha_r - one) /
                 (SV.u_abs * cr_z(inst.right.A) * SV.alpha_r);
  CReal log_eta1_cap = cr_max(cr_abs(eta_up.log()), cr_abs(eta_lo.log()));
  put("log_eta1_cap", log_eta1_cap,
      "certified cap on |log eta_1| from the prefix sandwich "
      "|u| C2U (beta-1)/(|v| B beta) <= |eta_1| <= |u| A alpha/"
      "((alpha-1)|v| C2V)");
  CReal C22p = cr_max(C22, cr_max(log_eta1_cap, one) /
                               (cr_si(D) * floor93 * log_ns));
  put("C22plus", C22p,
      "max{C22, max{|log eta_1| cap, 1}/(D 93 log(threshold))}: modified-"
      "height version of C22, h'(eta_1) <= C22plus (C log n_1)^{m-4}");
  CReal C23 = bw3 * h_alpha.h_prime * h_beta.h_prime * C22p;
  put("C23", C23,
      "C(3,D) h'(alpha) h'(beta) C22plus: linear-form decay factor at a "
      "general level");
  CReal C24 = gapify(C23 * log_cl_slack +
                     cr_pos((two * C20).log()) / (floor93 * log_ns * log_ns));
  put("C24", C24,
      "general branch via the three-term linear form: C23 (1 + log CL/"
      "log(threshold)) plus the 2 C20 offset spread over 93 "
      "(log(threshold))^2");
  CReal Cdep = (inst.weighted ? g.wU * C22p : C22p) / dep_denom;
  put("Cdep", Cdep,
      "general branch Lambda = 0: n_1 <= h(eta_1)/(Cprime max{1, 1/C8}) "
      "with h(eta_1) <= C22plus (C log n_1)^{m-4} log n_1");

  bc.C = cr_max(C24, cr_max(Cdep, cr_max(C21, cr_max(C15, floor93))));
  put("C", bc.C,
      "final per-level constant max{C24, Cdep, C21, C15, 93}: "
      "min{weighted gaps} <= (C log n_1)^{m-3} at every level m");
  return bc;
}

// ---------------------------------------------------------------------------
// finiteness_bound
// ---------------------------------------------------------------------------

CReal finiteness_bound(const BoundChain& chain, long k, long ell) {
  if (k < 1 || ell < 1) {
    throw Error(Error::Code::invalid_domain,
                "finiteness bound needs at least one term on each side");
  }
  const GrowthData& g = chain.growth;
  long h = k + ell - 1;
  CReal Ch = cr_pow_si(chain.C, h);
  CReal u0, v0;
  if (chain.weighted) {
    // Top level bounds min{wU n_1, wV m_1}; translate the m_1 case through
    // n_1 log alpha < m_1 log beta + max{0, log C6}.
    u0 = cr_pos(g.C6.log()) / g.log_alpha;
    CReal gw = cr_max(cr_si(1), cr_max(cr_si(1) / g.wU,
                                       g.log_beta / (g.wV * g.log_alpha)));
    v0 = gw * Ch;
  } else {
    // Top level bounds min{n_1, m_1}; the m_1 case costs a factor C8.
    u0 = cr_si(0);
    v0 = cr_max(cr_si(1), g.C8) * Ch;
  }
  CReal Nn = pdw_solve(u0, v0, cr_si(h));
  // Transfer to m_1, cover n_1 below the threshold, and the trivial floors.
  CReal Nm = (Nn * g.log_alpha + cr_pos(cr_neg(g.C5.log()))) / g.log_beta;
  CReal m_small = (cr_pos((g.C6pp / g.C5pp).log()) +
                   cr_si(g.n_threshold) * g.log_alpha) /
                  g.log_beta;
  CReal floors = cr_si(std::max<long>({g.n_threshold, 3, g.nu_right}));
  return cr_max(Nn, cr_max(Nm, cr_max(m_small, floors)));
}

// ---------------------------------------------------------------------------
// stewart_bound
// ---------------------------------------------------------------------------

StewartExpansion stewart_bound(const BoundChain& chain, long M,
                               std::optional<CReal> C_override) {
  if (M < 2) {
    throw Error(Error::Code::invalid_domain,
                "the closed-form bound needs a joint weight of at least 2");
  }
  const GrowthData& g = chain.growth;
  CReal Cu = C_override ? *C_override : chain.C;
  CReal log_ns = cr_si(g.n_threshold).log();
  CReal one = cr_si(1), two = cr_si(2);
  CReal log2 = two.log();

  StewartExpansion s;
  // Folding the additive start of n_1 <= u0 + v (log n_1)^h into the
  // multiplicative constant: (C log n)^h + u0 <= ((C + u0/log(threshold))
  // log n)^h for n >= threshold.
  CReal u0 = chain.weighted ? cr_pos(g.C6.log()) / g.log_alpha : cr_si(0);
  s.c_eff = Cu + u0 / log_ns;
  s.two_c_eff = two * s.c_eff;
  s.log_c_eff_additive = s.c_eff.log();
  CReal gw = chain.weighted
                 ? cr_max(one, cr_max(one / g.wU,
                                      g.log_beta / (g.wV * g.log_alpha)))
                 : cr_max(one, g.C8);
  // Branch 1 of the largest-solution lemma, shaped as (tilde_C M log M)^h:
  // h (log h + log c_eff + log gw) <= M log M (1 + (log c_eff + log gw)/
  // log 2) for h = M - 1 >= 1.
  CReal t1 = s.two_c_eff * gw *
             (one + (s.log_c_eff_additive + gw.log()) / log2);
  // Branch 2: 2^h (2 e^2)^h <= (t2 M log M)^h with t2 = 2 e^2/log 2.
  CReal t2 = two * two.exp() / log2;
  s.tilde_C = cr_max(t1, t2);
  CReal mlogm = cr_si(M) * cr_si(M).log();
  s.rhs = cr_pow_si(s.tilde_C * mlogm, M - 1);
  // Diagnostic variant for bounding log(value) = log|sum a_i U_{n_i}|
  // instead of the index n_1.
  s.tilde_C_logn =
      s.tilde_C *
      cr_max(one, g.log_alpha + cr_pos(g.C6pp.log()) / (s.tilde_C * two * log2));
  return s;
}

// ---------------------------------------------------------------------------
// level_bound
// ---------------------------------------------------------------------------

LevelBound level_bound(const BoundChain& chain, long K, long L,
                       const CReal& log_n1) {
  if (K < 2 || L < 2 || K > chain.k + 1 || L > chain.ell + 1) {
    throw Error(Error::Code::invalid_domain,
                "level out of range: need 2 <= K <= k+1 and 2 <= L <= ell+1 "
                "(the +1 slot is the virtual zero exponent)");
  }
  LevelBound lb;
  lb.K = K;
  lb.L = L;
  lb.m = K + L;
  CReal base = chain.C * log_n1;
  lb.min_bound = cr_pow_si(base, lb.m - 3);
  lb.max_bound = cr_pow_si(base, lb.m - 4);
  return lb;
}

}  // namespace recsolve
