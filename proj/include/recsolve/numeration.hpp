#pragma once
// Positional numeration systems built on admissible linear recurrences:
// greedy digit expansions, the regularity (prefix-sum) test, Hamming
// weights, and enumeration of integers whose two expansions have small
// combined weight.

#include <gmpxx.h>

#include <memory>
#include <vector>

#include "recsolve/interval.hpp"
#include "recsolve/recurrence.hpp"

namespace recsolve {

// A base sequence G_0 < G_1 < G_2 < ... suitable for positional expansion:
// G_0 = 1; the seed terms carry the +1 correction
// (G_k = c_1 G_{k-1} + ... + c_k G_0 + 1 for 0 < k < d); the plain
// recurrence holds from index d on; all coefficients are nonnegative
// integers with c_d >= 1 (and c_1 >= 2 when d = 1, otherwise the sequence
// stalls).  Any violation throws Error(config).  Every positive integer
// then has a unique regular expansion, found by the greedy algorithm.
//
// Copies share one growing term cache (single writer, many readers).
class NumerationSystem {
 public:
  explicit NumerationSystem(Recurrence base);

  const Recurrence& base() const { return base_; }
  // G_k (k >= 0), from the shared cache.
  mpz_class term(long k) const;
  // Largest K with G_K <= n; requires n >= 1.
  long top_index(const mpz_class& n) const;
  // Copy of G_0..G_k for lock-free hot loops.
  std::vector<mpz_class> terms_prefix(long k) const;

 private:
  struct Cache;
  Recurrence base_;
  std::shared_ptr<Cache> cache_;
};

// Digits eps_k of one expansion, least significant first; the trailing
// entry of a greedy expansion is nonzero.
struct DigitExpansion {
  std::vector<long> digits;

  // Number of nonzero digits.
  long weight() const;
  // Reconstruction sum(eps_k G_k) in the given system.
  mpz_class value(const NumerationSystem& sys) const;
};

// The unique regular expansion of n >= 1 (Error(invalid_domain) otherwise).
DigitExpansion greedy_expand(const NumerationSystem& sys, const mpz_class& n);

// Weight of the regular expansion of n >= 1.
long hamming_weight(const NumerationSystem& sys, const mpz_class& n);

// The regularity condition: sum_{k<K} eps_k G_k < G_K for every K >= 1
// (negative digits never qualify; the empty sequence represents zero and is
// vacuously regular).  For the Fibonacci-like base this is exactly "no two
// adjacent nonzero digits".
bool is_regular(const NumerationSystem& sys, const std::vector<long>& digits);

// Exhaustive scan: every n in [1, bound] with combined weight
// H_G(n) + H_H(n) <= M, ascending.  Ranges are split across `jobs` workers
// and merged deterministically.
struct BruteStrategy {
  mpz_class bound;
  int jobs = 1;
};

// Single-term sweep: the values H_m for 1 <= m <= m1_max whose G-expansion
// has weight <= M - 1 (the H-side weight is exactly 1) and top index
// <= n1_max, ascending.  This is the final-sweep shape: enumerate the side
// with fewer terms, test the other side's weight.
struct DigitSearchStrategy {
  long n1_max;
  long m1_max;
};

std::vector<mpz_class> enumerate_low_weight(const NumerationSystem& sysG,
                                            const NumerationSystem& sysH,
                                            long M, const BruteStrategy& st);
std::vector<mpz_class> enumerate_low_weight(const NumerationSystem& sysG,
                                            const NumerationSystem& sysH,
                                            long M,
                                            const DigitSearchStrategy& st);

}  // namespace recsolve
