#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recsolve/recurrence.hpp"

namespace recsolve {

// One side of a linear equation between sequence members: a recurrence
// together with the nonzero integer coefficients a_1..a_k applied to its
// terms, plus the coefficient-size bound A = max |a_i|.
struct SideSpec {
  Recurrence rec;
  std::vector<mpz_class> coefficients;
  mpz_class A;

  SideSpec(Recurrence r, std::vector<mpz_class> coeffs);
};

enum class Verdict { Dominant, NotDominant };

// Outcome of the dominance decision.  Exactly one of `witness` and the
// constant pair (c2, c3) is populated, matching the verdict:
//   - NotDominant: `witness` holds exponents n_1 > ... > n_K >= 0 with
//     a_1 alpha^{n_1} + ... + a_K alpha^{n_K} = 0, verified exactly.
//   - Dominant: c2, c3 > 0 certified, with
//       |a_1 alpha^{n_1} + ... + a_k alpha^{n_k}| >  c2 * alpha^{n_1}
//       |a_1 U_{n_1}     + ... + a_k U_{n_k}    | >  c3 * |U_{n_1}|
//     for every strictly decreasing exponent tuple (>= instead of > in the
//     single-coefficient case k = 1, where equality is attained).
struct DominanceCertificate {
  Verdict verdict = Verdict::Dominant;
  std::optional<std::vector<long>> witness;
  std::optional<CReal> c2, c3;
  // Exceptional gap tuples per level: exceptional_sets[K-2] lists the
  // level-K tuples (m_2, ..., m_K) whose partial sums needed an exact check.
  std::vector<std::vector<std::vector<long>>> exceptional_sets;
  // Certified level constants C2^(2) .. C2^(k), non-increasing.
  std::vector<CReal> per_level_c2;
  bool fast_path = false;
  std::string c3_formula;

  std::string report() const;
};

// Decide dominance for the coefficient tuple by the level-by-level
// construction of exceptional sets: level 2 collects the first gaps m where
// |a_1| - A alpha^{-m+1}/(alpha-1) < 1/2; level K extends each surviving
// tuple by the gaps m_K where the partial-sum modulus minus the full
// remaining-tail bound stays below C2^(K-1)/2.  Vanishing relations are
// searched exactly at every level; all threshold comparisons are decided by
// exact field arithmetic (ties enlarge the sets, which is conservative).
DominanceCertificate check_dominance(const SideSpec& side);

// Find m > last gap with  a_1 + sum_i a_i alpha^{-gaps[i-1]} + aK alpha^{-m}
// = 0, if one exists.  prefix_coeffs = (a_1..a_{K-1}) pairs with
// prefix_gaps = (m_2..m_{K-1}); the candidate m comes from a certified
// logarithm and is confirmed by exact field arithmetic.
std::optional<long> relation_solve(const NFElem& alpha,
                                   const std::vector<mpz_class>& prefix_coeffs,
                                   const std::vector<long>& prefix_gaps,
                                   const mpz_class& aK);

// Certified proxies for the infimum / supremum of |sum a_i U_{n_i}|
// normalized by the leading term: lower = C3 from the dominance
// certificate, upper = A(|u|+C1)|alpha| / ((|alpha|-1)|u|)  (geometric-tail
// bound; the single-term case k=1 drops the geometric factor).
// Throws when the tuple is not dominant.
std::pair<CReal, CReal> infimum_supremum_proxies(const SideSpec& side);

}  // namespace recsolve
