#pragma once
// Certified constant chain for a linear equation between members of two
// dominant-root recurrence sequences
//   a_1 U_{n_1} + ... + a_k U_{n_k} = b_1 V_{m_1} + ... + b_l V_{m_l}.
// From the two dominance certificates this module derives, with interval
// arithmetic throughout:
//   * growth constants C5..C8 sandwiching alpha^{n_1} / beta^{m_1} and
//     n_1 / m_1,
//   * the full bound chain C9..C24 feeding a per-level inequality
//     min-gap <= (C log n_1)^{m-3},
//   * the finiteness bound N on max{n_1, m_1},
//   * a Stewart-style closed form (tilde_C * M log M)^{M-1}.
// Every constant is materialized as a named, auditable entry with a
// self-describing provenance formula.

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "recsolve/dominance.hpp"
#include "recsolve/heights.hpp"
#include "recsolve/interval.hpp"
#include "recsolve/recurrence.hpp"

namespace recsolve {

// A fully analyzed equation instance: both sides dominance-certified, both
// spectra computed, and the degree of the composite field Q(alpha, beta).
struct ProblemInstance {
  SideSpec left;   // U side, coefficients a_1..a_k
  SideSpec right;  // V side, coefficients b_1..b_l
  DominanceCertificate cert_left, cert_right;
  Spectral spec_left, spec_right;
  // Certified lower constants for the right-side prefixes (b_1..b_j),
  // j = 1..l: |b_1 beta^{m_1} + ... + b_j beta^{m_j}| > c2_prefix_right[j-1]
  // * beta^{m_1}.  Needed by the level inequalities, which divide through a
  // prefix of the right side.
  std::vector<CReal> c2_prefix_right;
  int field_degree = 0;  // D = [Q(alpha, beta) : Q]
  // The chain's inequalities are asserted for n_1 >= n_star only; smaller
  // n_1 must be enumerated directly.
  long n_star = 3;
  // Weighted mode bounds (n_1 - n_K) log alpha' and (m_1 - m_L) log beta'
  // instead of the raw gaps; this is the natural normalization for digit
  // (numeration) instances and what the reference constants refer to.
  bool weighted = false;
  // Configured uniform multiplicative-independence constant C' with
  // h(alpha^n / beta^m) >= C' max{|n|, |m|}; required when no exact
  // derivation applies to the pair (alpha, beta).
  std::optional<mpq_class> c_prime_cfg;

  long k() const { return static_cast<long>(left.coefficients.size()); }
  long ell() const { return static_cast<long>(right.coefficients.size()); }
};

// Runs dominance and spectral analysis on both sides and assembles the
// instance.  Throws Error::invalid_domain when a side (or a right-side
// prefix) is not dominant, and propagates spectral failures.  Multiplicative
// independence of (alpha, beta) is NOT checked here -- growth constants do
// not need it; derive_chain checks it.
ProblemInstance make_instance(SideSpec left, SideSpec right, long n_star = 3,
                              bool weighted = false,
                              std::optional<mpq_class> c_prime = std::nullopt);

// Growth constants: for every solution with n_1 >= n_threshold and m_1 >= 1,
//   C5 < alpha^{n_1} / beta^{m_1} < C6   and   C7 < n_1 / m_1 < C8.
// CL is the certified factor with max{n_1, m_1} <= CL * n_1 for
// n_1 >= n_star (used where the linear-form coefficient cap is expressed
// through n_1 alone).
struct GrowthData {
  CReal log_alpha, log_beta;  // logs of the dominant roots
  CReal wU, wV;               // log alpha', log beta' (gap weights)
  // Smallest indices from which |U_n| >= nuU * alpha^n (resp. V) is
  // certified, and the corresponding factors nu = |u| - C1 (max{1,|a2|}/a)^n.
  long nu_left = 1, nu_right = 1;
  CReal nuU, nuV;
  CReal C5p, C5pp, C6p, C6pp;
  CReal C5, C6, C7, C8, CL;
  long n_threshold = 1;  // normalized lower bounds certified from here on
};

GrowthData derive_growth_constants(const ProblemInstance& inst);

// Uniform multiplicative-independence constant: a certified C' > 0 with
// h(alpha^n / beta^m) >= C' max{|n|, |m|} for all (n, m) != (0, 0).
// Exactly derived when one of the pair is a rational integer of modulus
// >= 2 and the other is either also such an integer (with distinct
// prime-power-free cores) or a quadratic unit; otherwise the configured
// value is used.  Throws Error::config ("MissingCPrime") when neither
// applies, and Error::invalid_domain when the pair is multiplicatively
// dependent.
CReal mult_indep_uniform(const ProblemInstance& inst);

struct ChainEntry {
  std::string name;
  CReal value;
  std::string provenance;  // defining formula, self-describing
};

struct BoundChain {
  bool weighted = false;
  long n_star = 3;
  long k = 0, ell = 0;
  int field_degree = 0;
  GrowthData growth;
  std::vector<ChainEntry> entries;
  CReal C;  // final per-level constant

  bool has(const std::string& name) const;
  const CReal& c(const std::string& name) const;  // throws internal if absent
  // One line per constant: name, 20 significant digits, provenance.
  std::string report() const;
};

// Evaluates the whole chain.  Throws Error::invalid_domain when (alpha,
// beta) are multiplicatively dependent, Error::config when a needed C' is
// neither derivable nor configured.
BoundChain derive_chain(const ProblemInstance& inst);

// Certified N with max{n_1, m_1} <= N for every solution whose side widths
// are at most k and ell.  Uses the largest-solution lemma on
// n_1 < u0 + v (log n_1)^{k+ell-1}.
CReal finiteness_bound(const BoundChain& chain, long k, long ell);

// Stewart-style closed form: rhs = (tilde_C * M log M)^{M-1} bounds n_1 for
// every solution of joint weight <= M (numeration instances).  The expansion
// intermediates are exposed for auditing; C_override substitutes a foreign
// per-level constant (e.g. a published one) for comparison runs.
struct StewartExpansion {
  CReal c_eff;                 // per-level constant with the branch slack folded in
  CReal two_c_eff;             // leading factor of the expanded solve
  CReal log_c_eff_additive;    // additive log term of the expanded solve
  CReal tilde_C;               // final M-independent constant (n_1 form)
  CReal tilde_C_logn;          // variant bounding log n instead of n_1
  CReal rhs;                   // (tilde_C * M log M)^{M-1}
};

StewartExpansion stewart_bound(const BoundChain& chain, long M,
                               std::optional<CReal> C_override = std::nullopt);

// Per-level bound pair for level m = K + L (K, L >= 2):
//   min-gap bound (C log n1)^{m-3},  max-gap bound (C log n1)^{m-4}.
struct LevelBound {
  long m = 4, K = 2, L = 2;
  CReal min_bound, max_bound;
};

LevelBound level_bound(const BoundChain& chain, long K, long L,
                       const CReal& log_n1);

}  // namespace recsolve
