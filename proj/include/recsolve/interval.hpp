#pragma once
// Directed-rounding interval arithmetic on top of MPFR.
//
// An Interval is a pair [lo, hi] of MPFR numbers with lo <= hi; every
// operation rounds the lower endpoint with MPFR_RNDD and the upper endpoint
// with MPFR_RNDU, so the exact real result of an expression is always
// contained in the computed interval.  Certified decisions (signs, floors,
// comparisons) are made only when the interval proves them; otherwise the
// caller refines at higher precision.
//
// CReal is a lazily refinable real number: a generator producing an
// enclosure at any requested precision, with a monotone cache (refining
// never widens, because new enclosures are intersected with the cache).

#include <mpfr.h>
#include <gmpxx.h>

#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace recsolve {

// Typed error used across the library.  `code` maps onto CLI exit codes.
struct Error : std::runtime_error {
  enum class Code {
    config,         // malformed configuration / input
    invalid_domain, // precondition on operation arguments violated
    precision,      // could not certify at the precision budget
    unresolved,     // a computation step could not be completed soundly
    checkpoint,     // corrupt or mismatched checkpoint data
    internal,       // invariant failure inside the library
  };
  Code code;
  Error(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

class Interval {
 public:
  Interval();
  explicit Interval(mpfr_prec_t prec);
  Interval(const Interval& o);
  Interval(Interval&& o) noexcept;
  Interval& operator=(const Interval& o);
  Interval& operator=(Interval&& o) noexcept;
  ~Interval();

  static Interval exact_si(long v, mpfr_prec_t prec);
  static Interval exact_z(const mpz_class& v, mpfr_prec_t prec);
  static Interval from_q(const mpq_class& q, mpfr_prec_t prec);
  // Interval spanning two rationals (lo_q <= hi_q required).
  static Interval span_q(const mpq_class& lo, const mpq_class& hi,
                         mpfr_prec_t prec);

  mpfr_prec_t prec() const { return mpfr_get_prec(lo_); }

  // Endpoint access.
  double lo_d() const { return mpfr_get_d(lo_, MPFR_RNDD); }
  double hi_d() const { return mpfr_get_d(hi_, MPFR_RNDU); }
  mpq_class lo_q() const;  // exact value of the dyadic endpoint
  mpq_class hi_q() const;

  // Exact sign certification: +1 if lo > 0, -1 if hi < 0, 0 if 0 is inside
  // or touches the interval.
  int sign() const;
  bool contains_zero() const { return sign() == 0; }
  bool is_positive() const { return sign() > 0; }
  bool is_negative() const { return sign() < 0; }
  // True iff every point of *this is strictly below every point of o.
  bool certainly_lt(const Interval& o) const;
  bool certainly_le(const Interval& o) const;
  // True iff the rational q lies inside [lo, hi].
  bool contains_q(const mpq_class& q) const;

  Interval operator-() const;
  friend Interval operator+(const Interval& a, const Interval& b);
  friend Interval operator-(const Interval& a, const Interval& b);
  friend Interval operator*(const Interval& a, const Interval& b);
  // Division throws Error::precision if b contains zero.
  friend Interval operator/(const Interval& a, const Interval& b);

  Interval abs() const;
  Interval recip() const;
  Interval sqrt() const;  // requires lo >= 0 (throws precision otherwise)
  Interval log() const;   // requires lo > 0
  Interval exp() const;
  Interval pow_si(long e) const;  // integer power (negative allowed if 0 not inside)
  Interval mul_2si(long e) const;

  // Width as an upper bound double; infinity when endpoints are not finite.
  double width_d() const;

  // If floor(x) is the same integer for every x in the interval, return it.
  bool floor_certain(mpz_class& out) const;
  // Distance to the nearest integer, ||x||, as an enclosure.  Certified only
  // when the interval determines the nearest integer; `ok` reports that.
  Interval dist_to_nearest_int(bool& ok) const;

  std::string str(int digits = 10) const;

  // Raw endpoint handles for the implementation files.
  mpfr_srcptr lo_raw() const { return lo_; }
  mpfr_srcptr hi_raw() const { return hi_; }
  mpfr_ptr lo_raw() { return lo_; }
  mpfr_ptr hi_raw() { return hi_; }

 private:
  mpfr_t lo_, hi_;
};

Interval imin(const Interval& a, const Interval& b);
Interval imax(const Interval& a, const Interval& b);
// Smallest interval containing both arguments.
Interval ihull(const Interval& a, const Interval& b);

// Rectangular complex interval; used for certified root enclosures.
struct CInterval {
  Interval re, im;

  CInterval() = default;
  CInterval(Interval r, Interval i) : re(std::move(r)), im(std::move(i)) {}
  static CInterval exact_si(long r, long i, mpfr_prec_t prec);

  friend CInterval operator+(const CInterval& a, const CInterval& b);
  friend CInterval operator-(const CInterval& a, const CInterval& b);
  friend CInterval operator*(const CInterval& a, const CInterval& b);
  friend CInterval operator/(const CInterval& a, const CInterval& b);
  CInterval operator-() const;

  Interval modulus() const;      // |z| enclosure
  Interval modulus_sq() const;   // re^2 + im^2
  bool contains_zero() const { return re.contains_zero() && im.contains_zero(); }
};

// Lazily refinable real number with a monotone enclosure cache.
// Thread-safe: concurrent at() calls are serialized per CReal.
class CReal {
 public:
  using Gen = std::function<Interval(mpfr_prec_t)>;

  CReal() = default;
  explicit CReal(Gen gen);
  static CReal constant(const mpq_class& q);

  // Enclosure at (at least) the requested precision.  The result is the
  // intersection of all enclosures produced so far, so refinement is
  // monotone: at(p2) is contained in at(p1) whenever p2 >= p1 was called
  // after p1.
  Interval at(mpfr_prec_t prec) const;

  bool valid() const { return state_ != nullptr; }

  friend CReal operator+(const CReal& a, const CReal& b);
  friend CReal operator-(const CReal& a, const CReal& b);
  friend CReal operator*(const CReal& a, const CReal& b);
  friend CReal operator/(const CReal& a, const CReal& b);
  CReal log() const;
  CReal exp() const;
  CReal sqrt() const;

 private:
  struct State {
    Gen gen;
    std::mutex mu;
    bool has_cache = false;
    mpfr_prec_t cache_prec = 0;
    Interval cache;
  };
  std::shared_ptr<State> state_;
};

// Intersection; throws Error::internal if the intervals are disjoint
// (that would prove an enclosure bug).
Interval intersect(const Interval& a, const Interval& b);

}  // namespace recsolve
