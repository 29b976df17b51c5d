#pragma once
// Certified continued fractions and the reduction toolkit that shrinks a
// finiteness bound down to enumerable size:
//   * ContinuedFraction -- partial quotients of a certified real, each floor
//     certified by interval refinement, convergents kept exactly;
//   * bd_reduce -- the Baker--Davenport lemma: for 0 < |n tau - m + mu| <
//     A B^{-k} with n <= M, a convergent denominator q > 6M with
//     eps = ||mu q|| - M ||tau q|| > 0 caps k by log(A q / eps) / log B;
//   * detect_dependence -- small-height integer relations a tau + b + c mu
//     = 0, numerically filtered and (optionally) confirmed exactly;
//   * legendre_reduce -- when the relation turns the inequality into
//     |tau - m'/n'| < (A'/n') B^{-k}, the Legendre criterion forces m'/n'
//     to be a convergent and a_{j+1} caps the quality of approximation.

#include <gmpxx.h>

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "recsolve/interval.hpp"
#include "recsolve/number_field.hpp"

namespace recsolve {

// Continued-fraction expansion with certified partial quotients and exact
// convergents.  Quotients are verified lazily and cached; extending the
// expansion is serialized (single writer), already-verified values can be
// read from any thread.
//
// Each partial quotient is certified directly against fresh enclosures of
// the source value: the j-th complete quotient is evaluated as
//   z_j = (p_{j-2} - x q_{j-2}) / (x q_{j-1} - p_{j-1})
// with exact convergents, and the working precision grows until floor(z_j)
// is a single unambiguous integer.  A rational source given exactly expands
// by the Euclidean algorithm and terminates.
class ContinuedFraction {
 public:
  // Expansion of a value assumed irrational.  A rational source fed through
  // this constructor cannot certify the quotient at its termination point
  // and eventually throws Error::precision (the configurable ceiling).
  explicit ContinuedFraction(CReal x, mpfr_prec_t prec_ceiling = 1 << 22);
  // Exact terminating expansion of a rational.
  explicit ContinuedFraction(const mpq_class& x);

  ContinuedFraction(const ContinuedFraction&) = delete;
  ContinuedFraction& operator=(const ContinuedFraction&) = delete;

  // Partial quotient a_j / convergent numerator p_j / denominator q_j,
  // extending the expansion on demand.  Throws Error::invalid_domain when
  // the expansion terminated before index j, Error::precision when the
  // certification ceiling is reached.
  mpz_class a(size_t j);
  mpz_class p(size_t j);
  mpz_class q(size_t j);

  // Number of certified partial quotients (indices 0 .. count-1).
  size_t verified_count() const;
  // True when the source was rational and fully expanded.
  bool terminated() const;

  // Extends the expansion to at least `count` quotients (stops early if the
  // expansion terminates).
  void ensure_count(size_t count);
  // Smallest index j with q_j > threshold, extending as needed.  Throws
  // Error::invalid_domain when a terminated expansion never exceeds it.
  size_t first_q_above(const mpz_class& threshold);

 private:
  void extend_one();  // caller holds mu_
  void need(size_t j);

  CReal x_;
  bool rational_ = false;
  bool terminated_ = false;
  mpfr_prec_t ceiling_ = 1 << 22;
  mpfr_prec_t cur_prec_ = 256;
  std::vector<mpz_class> a_, p_, q_;
  mutable std::mutex mu_;
};

// One instance of the Baker--Davenport inequality
//   0 < |n tau - m + mu| < A B^{-k},  1 <= n <= M.
// A is consumed through certified upper bounds, B through certified lower
// bounds, so the emitted cap on k is sound under rounding.
struct ReductionProblem {
  CReal tau;    // slope, assumed irrational
  CReal mu;     // shift
  CReal A;      // scale, A > 0
  CReal B;      // base, B > 1
  mpz_class M;  // range bound on n, M >= 1
};

enum class ReductionMethod { BakerDavenport, Legendre, Failed };

struct ReductionOutcome {
  ReductionMethod method = ReductionMethod::Failed;
  // Certified cap: every solution of the inequality has k <= new_k_bound.
  long new_k_bound = 0;
  mpz_class q_used;              // convergent denominator that produced the cap
  std::optional<CReal> epsilon;  // Baker--Davenport only; certified positive
  mpz_class S;                   // Legendre only: max a_{j+1}, j = 0..J
  std::vector<mpz_class> trace;  // denominators inspected, in order
};

// Line-delimited trace record: "<mu_id>\t<method>\t<q>\t<eps-or-S>\t<bound>".
std::string trace_record(const ReductionOutcome& out, const std::string& mu_id);

// Baker--Davenport reduction.  Starts at the smallest convergent denominator
// q > 6M of tau and walks forward; a certified eps > 0 yields
// new_k_bound = floor(upper(log(A q / eps) / log B)), which caps k for every
// solution.  A sign that stays non-positive (or undecidable at the refinement
// cap) advances to the next denominator; after 26 denominators the walk stops
// with Error::unresolved ("DependenceSuspected") -- run detect_dependence.
// The overload taking a ContinuedFraction reuses a shared expansion of
// prob.tau (it must be the expansion of that value); bd_reduce itself only
// extends it, so concurrent reductions against one expansion are safe.
ReductionOutcome bd_reduce(ContinuedFraction& cf, const ReductionProblem& prob);
ReductionOutcome bd_reduce(const ReductionProblem& prob);

// Exact witnesses for dependence confirmation: tau = log(x)/log(base) and
// mu = log(y)/log(base) with x, y in one number field, both embedding to
// positive reals under the marked root, and base a rational > 1.  A
// numerically suspected relation a tau + b + c mu = 0 is then confirmed or
// refuted exactly through x^a base^b y^c = 1.
struct LogWitness {
  NFElem x;
  NFElem y;
  mpq_class base;
};

// Searches integer relations a tau + b + c mu = 0 with
// max{|a|, |b|, |c|} <= height (height <= 1000), scanning shells of
// increasing max{|a|, |c|} and normalizing to a >= 0, gcd(a, b, c) = 1.
// A candidate is reported only when the enclosure of a tau + b + c mu
// contains zero at more than twice `height` bits of working precision; with
// a witness, only exactly confirmed relations are returned.  Returns the
// coefficient triple or nullopt when no relation passes.
std::optional<std::array<mpz_class, 3>> detect_dependence(
    const CReal& tau, const CReal& mu, long height = 1000,
    const std::optional<LogWitness>& witness = std::nullopt);

// Legendre-criterion reduction for |tau - m'/n'| < (A'/n') B^{-k} with
// 1 <= n' <= N'.  Computes J = min{j : q_{j+1} > N'} and
// S = max{a_{j+1} : j = 0..J}; every solution then has
//   k <= max{ ceil(upper(log(2 N' A') / log B)),
//             ceil(upper(log((S+2) q_J A') / log B)) },
// the first branch covering k below the criterion's applicability threshold
// and the second the convergents themselves (via the classical lower bound
// 1/((a_{j+1}+2) q_j^2) < |tau - p_j/q_j|).  The relation that produced the
// transformed inequality may be passed for the trace; it is not used in the
// computation.  The ContinuedFraction overload reuses a shared expansion of
// the same tau.
ReductionOutcome legendre_reduce(
    ContinuedFraction& cf,
    const std::optional<std::array<mpz_class, 3>>& relation, const CReal& A_prime,
    const CReal& B, const mpz_class& N_prime);
ReductionOutcome legendre_reduce(
    const CReal& tau, const std::optional<std::array<mpz_class, 3>>& relation,
    const CReal& A_prime, const CReal& B, const mpz_class& N_prime);

}  // namespace recsolve
