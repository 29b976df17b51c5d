#pragma once
// Small lifting helpers: build CReal expressions from Interval combinators.
// Internal to the library implementation files.

#include <gmpxx.h>

#include <utility>

#include "recsolve/interval.hpp"

namespace recsolve {
namespace crutil {

inline CReal cr_si(long v) { return CReal::constant(mpq_class(v)); }
inline CReal cr_z(const mpz_class& v) { return CReal::constant(mpq_class(v)); }
inline CReal cr_q(const mpq_class& v) { return CReal::constant(v); }

inline CReal cr_abs(const CReal& x) {
  return CReal([x](mpfr_prec_t p) { return x.at(p).abs(); });
}

inline CReal cr_neg(const CReal& x) {
  return CReal([x](mpfr_prec_t p) { return -x.at(p); });
}

inline CReal cr_max(const CReal& a, const CReal& b) {
  return CReal([a, b](mpfr_prec_t p) { return imax(a.at(p), b.at(p)); });
}

inline CReal cr_min(const CReal& a, const CReal& b) {
  return CReal([a, b](mpfr_prec_t p) { return imin(a.at(p), b.at(p)); });
}

// max{0, x}
inline CReal cr_pos(const CReal& x) {
  return CReal([x](mpfr_prec_t p) { return imax(x.at(p), Interval::exact_si(0, p)); });
}

inline CReal cr_pow_si(const CReal& x, long e) {
  return CReal([x, e](mpfr_prec_t p) { return x.at(p).pow_si(e); });
}

// Certify x > 0 by refining at the given precisions; false when every
// attempt still straddles zero.
inline bool certify_positive(const CReal& x, std::initializer_list<mpfr_prec_t> precs) {
  for (mpfr_prec_t p : precs) {
    if (x.at(p).is_positive()) return true;
  }
  return false;
}

}  // namespace crutil
}  // namespace recsolve
