#include "recsolve/interval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace recsolve {

namespace {
constexpr mpfr_prec_t kDefaultPrec = 128;

mpfr_prec_t join_prec(const Interval& a, const Interval& b) {
  return std::max(a.prec(), b.prec());
}
}  // namespace

Interval::Interval() : Interval(kDefaultPrec) {}

Interval::Interval(mpfr_prec_t prec) {
  mpfr_init2(lo_, prec);
  mpfr_init2(hi_, prec);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

Interval::Interval(const Interval& o) {
  mpfr_init2(lo_, o.prec());
  mpfr_init2(hi_, o.prec());
  mpfr_set(lo_, o.lo_, MPFR_RNDD);
  mpfr_set(hi_, o.hi_, MPFR_RNDU);
}

Interval::Interval(Interval&& o) noexcept {
  mpfr_init2(lo_, o.prec());
  mpfr_init2(hi_, o.prec());
  mpfr_swap(lo_, o.lo_);
  mpfr_swap(hi_, o.hi_);
}

Interval& Interval::operator=(const Interval& o) {
  if (this != &o) {
    mpfr_set_prec(lo_, o.prec());
    mpfr_set_prec(hi_, o.prec());
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }
  return *this;
}

Interval& Interval::operator=(Interval&& o) noexcept {
  if (this != &o) {
    mpfr_swap(lo_, o.lo_);
    mpfr_swap(hi_, o.hi_);
  }
  return *this;
}

Interval::~Interval() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

Interval Interval::exact_si(long v, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_si(r.lo_, v, MPFR_RNDD);
  mpfr_set_si(r.hi_, v, MPFR_RNDU);
  return r;
}

Interval Interval::exact_z(const mpz_class& v, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_z(r.lo_, v.get_mpz_t(), MPFR_RNDD);
  mpfr_set_z(r.hi_, v.get_mpz_t(), MPFR_RNDU);
  return r;
}

Interval Interval::from_q(const mpq_class& q, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_q(r.lo_, q.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(r.hi_, q.get_mpq_t(), MPFR_RNDU);
  return r;
}

Interval Interval::span_q(const mpq_class& lo, const mpq_class& hi,
                          mpfr_prec_t prec) {
  if (cmp(lo, hi) > 0)
    throw Error(Error::Code::internal, "span_q: lo > hi");
  Interval r(prec);
  mpfr_set_q(r.lo_, lo.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(r.hi_, hi.get_mpq_t(), MPFR_RNDU);
  return r;
}

mpq_class Interval::lo_q() const {
  if (!mpfr_number_p(lo_))
    throw Error(Error::Code::precision, "lo endpoint not finite");
  if (mpfr_zero_p(lo_)) return mpq_class(0);
  mpz_class m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), lo_);
  mpq_class r(m);
  if (e >= 0) {
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(),
                 static_cast<mp_bitcnt_t>(e));
  } else {
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(),
                 static_cast<mp_bitcnt_t>(-e));
  }
  r.canonicalize();
  return r;
}

mpq_class Interval::hi_q() const {
  if (!mpfr_number_p(hi_))
    throw Error(Error::Code::precision, "hi endpoint not finite");
  if (mpfr_zero_p(hi_)) return mpq_class(0);
  mpz_class m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), hi_);
  mpq_class r(m);
  if (e >= 0) {
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(),
                 static_cast<mp_bitcnt_t>(e));
  } else {
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(),
                 static_cast<mp_bitcnt_t>(-e));
  }
  r.canonicalize();
  return r;
}

int Interval::sign() const {
  if (mpfr_sgn(lo_) > 0) return 1;
  if (mpfr_sgn(hi_) < 0) return -1;
  return 0;
}

bool Interval::certainly_lt(const Interval& o) const {
  return mpfr_cmp(hi_, o.lo_) < 0;
}

bool Interval::certainly_le(const Interval& o) const {
  return mpfr_cmp(hi_, o.lo_) <= 0;
}

bool Interval::contains_q(const mpq_class& q) const {
  return mpfr_cmp_q(lo_, q.get_mpq_t()) <= 0 &&
         mpfr_cmp_q(hi_, q.get_mpq_t()) >= 0;
}

Interval Interval::operator-() const {
  Interval r(prec());
  mpfr_neg(r.lo_, hi_, MPFR_RNDD);
  mpfr_neg(r.hi_, lo_, MPFR_RNDU);
  return r;
}

Interval operator+(const Interval& a, const Interval& b) {
  Interval r(join_prec(a, b));
  mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
  mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
  return r;
}

Interval operator-(const Interval& a, const Interval& b) {
  Interval r(join_prec(a, b));
  mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
  mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
  return r;
}

Interval operator*(const Interval& a, const Interval& b) {
  mpfr_prec_t p = join_prec(a, b);
  Interval r(p);
  mpfr_t t;
  mpfr_init2(t, p);
  // lo = min of the four directed-down products, hi = max of directed-up.
  mpfr_mul(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
  mpfr_mul(t, a.lo_, b.hi_, MPFR_RNDD);
  mpfr_min(r.lo_, r.lo_, t, MPFR_RNDD);
  mpfr_mul(t, a.hi_, b.lo_, MPFR_RNDD);
  mpfr_min(r.lo_, r.lo_, t, MPFR_RNDD);
  mpfr_mul(t, a.hi_, b.hi_, MPFR_RNDD);
  mpfr_min(r.lo_, r.lo_, t, MPFR_RNDD);

  mpfr_mul(r.hi_, a.lo_, b.lo_, MPFR_RNDU);
  mpfr_mul(t, a.lo_, b.hi_, MPFR_RNDU);
  mpfr_max(r.hi_, r.hi_, t, MPFR_RNDU);
  mpfr_mul(t, a.hi_, b.lo_, MPFR_RNDU);
  mpfr_max(r.hi_, r.hi_, t, MPFR_RNDU);
  mpfr_mul(t, a.hi_, b.hi_, MPFR_RNDU);
  mpfr_max(r.hi_, r.hi_, t, MPFR_RNDU);
  mpfr_clear(t);
  return r;
}

Interval Interval::recip() const {
  if (contains_zero())
    throw Error(Error::Code::precision, "reciprocal of interval containing 0");
  Interval r(prec());
  mpfr_ui_div(r.lo_, 1, hi_, MPFR_RNDD);
  mpfr_ui_div(r.hi_, 1, lo_, MPFR_RNDU);
  return r;
}

Interval operator/(const Interval& a, const Interval& b) {
  return a * b.recip();
}

Interval Interval::abs() const {
  Interval r(prec());
  if (sign() > 0) return *this;
  if (sign() < 0) return -*this;
  // Straddles zero: [0, max(|lo|, |hi|)].
  mpfr_set_zero(r.lo_, 1);
  mpfr_t t;
  mpfr_init2(t, prec());
  mpfr_abs(t, lo_, MPFR_RNDU);
  mpfr_abs(r.hi_, hi_, MPFR_RNDU);
  mpfr_max(r.hi_, r.hi_, t, MPFR_RNDU);
  mpfr_clear(t);
  return r;
}

Interval Interval::sqrt() const {
  if (mpfr_sgn(lo_) < 0)
    throw Error(Error::Code::precision, "sqrt of interval below 0");
  Interval r(prec());
  mpfr_sqrt(r.lo_, lo_, MPFR_RNDD);
  mpfr_sqrt(r.hi_, hi_, MPFR_RNDU);
  return r;
}

Interval Interval::log() const {
  if (mpfr_sgn(lo_) <= 0)
    throw Error(Error::Code::precision, "log of interval touching 0");
  Interval r(prec());
  mpfr_log(r.lo_, lo_, MPFR_RNDD);
  mpfr_log(r.hi_, hi_, MPFR_RNDU);
  return r;
}

Interval Interval::exp() const {
  Interval r(prec());
  mpfr_exp(r.lo_, lo_, MPFR_RNDD);
  mpfr_exp(r.hi_, hi_, MPFR_RNDU);
  return r;
}

Interval Interval::pow_si(long e) const {
  if (e == 0) return exact_si(1, prec());
  if (e < 0) return recip().pow_si(-e);
  // Square-and-multiply on intervals (each step outward rounded).
  Interval acc = exact_si(1, prec());
  Interval base = *this;
  unsigned long n = static_cast<unsigned long>(e);
  while (n) {
    if (n & 1) acc = acc * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return acc;
}

Interval Interval::mul_2si(long e) const {
  Interval r(prec());
  mpfr_mul_2si(r.lo_, lo_, e, MPFR_RNDD);
  mpfr_mul_2si(r.hi_, hi_, e, MPFR_RNDU);
  return r;
}

double Interval::width_d() const {
  if (!mpfr_number_p(lo_) || !mpfr_number_p(hi_))
    return std::numeric_limits<double>::infinity();
  mpfr_t w;
  mpfr_init2(w, 64);
  mpfr_sub(w, hi_, lo_, MPFR_RNDU);
  double d = mpfr_get_d(w, MPFR_RNDU);
  mpfr_clear(w);
  return d;
}

bool Interval::floor_certain(mpz_class& out) const {
  if (!mpfr_number_p(lo_) || !mpfr_number_p(hi_)) return false;
  mpfr_t fl, fh;
  mpfr_init2(fl, prec());
  mpfr_init2(fh, prec());
  mpfr_floor(fl, lo_);
  mpfr_floor(fh, hi_);
  bool ok = mpfr_cmp(fl, fh) == 0;
  if (ok) mpfr_get_z(out.get_mpz_t(), fl, MPFR_RNDN);
  mpfr_clear(fl);
  mpfr_clear(fh);
  return ok;
}

Interval Interval::dist_to_nearest_int(bool& ok) const {
  // Round both endpoints to nearest integers; if they agree the nearest
  // integer n is determined and ||x|| = |x - n| (also correct on the
  // half-integer boundary since both candidates give the same distance).
  ok = false;
  Interval r(prec());
  if (!mpfr_number_p(lo_) || !mpfr_number_p(hi_)) return r;
  mpfr_t nl, nh;
  mpfr_init2(nl, prec());
  mpfr_init2(nh, prec());
  mpfr_round(nl, lo_);
  mpfr_round(nh, hi_);
  if (mpfr_cmp(nl, nh) == 0) {
    mpz_class n;
    mpfr_get_z(n.get_mpz_t(), nl, MPFR_RNDN);
    Interval diff = *this - Interval::exact_z(n, prec());
    r = diff.abs();
    ok = true;
  }
  mpfr_clear(nl);
  mpfr_clear(nh);
  return r;
}

std::string Interval::str(int digits) const {
  auto one = [&](mpfr_srcptr x, mpfr_rnd_t rnd) {
    char* s = nullptr;
    mpfr_asprintf(&s, "%.*R*g", digits, rnd, x);
    std::string out(s);
    mpfr_free_str(s);
    return out;
  };
  return "[" + one(lo_, MPFR_RNDD) + ", " + one(hi_, MPFR_RNDU) + "]";
}

Interval imin(const Interval& a, const Interval& b) {
  Interval r(std::max(a.prec(), b.prec()));
  mpfr_min(r.lo_raw(), a.lo_raw(), b.lo_raw(), MPFR_RNDD);
  mpfr_min(r.hi_raw(), a.hi_raw(), b.hi_raw(), MPFR_RNDU);
  return r;
}

Interval imax(const Interval& a, const Interval& b) {
  Interval r(std::max(a.prec(), b.prec()));
  mpfr_max(r.lo_raw(), a.lo_raw(), b.lo_raw(), MPFR_RNDD);
  mpfr_max(r.hi_raw(), a.hi_raw(), b.hi_raw(), MPFR_RNDU);
  return r;
}

Interval ihull(const Interval& a, const Interval& b) {
  Interval r(std::max(a.prec(), b.prec()));
  mpfr_min(r.lo_raw(), a.lo_raw(), b.lo_raw(), MPFR_RNDD);
  mpfr_max(r.hi_raw(), a.hi_raw(), b.hi_raw(), MPFR_RNDU);
  return r;
}

Interval intersect(const Interval& a, const Interval& b) {
  Interval r(std::max(a.prec(), b.prec()));
  mpfr_max(r.lo_raw(), a.lo_raw(), b.lo_raw(), MPFR_RNDD);
  mpfr_min(r.hi_raw(), a.hi_raw(), b.hi_raw(), MPFR_RNDU);
  if (mpfr_cmp(r.lo_raw(), r.hi_raw()) > 0)
    throw Error(Error::Code::internal,
                "disjoint enclosures of the same real number");
  return r;
}

// ---------------------------------------------------------------------------
// CInterval

CInterval CInterval::exact_si(long r, long i, mpfr_prec_t prec) {
  return CInterval(Interval::exact_si(r, prec), Interval::exact_si(i, prec));
}

CInterval operator+(const CInterval& a, const CInterval& b) {
  return CInterval(a.re + b.re, a.im + b.im);
}

CInterval operator-(const CInterval& a, const CInterval& b) {
  return CInterval(a.re - b.re, a.im - b.im);
}

CInterval operator*(const CInterval& a, const CInterval& b) {
  return CInterval(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}

CInterval CInterval::operator-() const { return CInterval(-re, -im); }

Interval CInterval::modulus_sq() const {
  // abs() first so a factor straddling zero squares to [0, max^2] instead of
  // picking up a spurious negative lower bound from the generic product.
  Interval ra = re.abs(), ia = im.abs();
  return ra * ra + ia * ia;
}

Interval CInterval::modulus() const { return modulus_sq().sqrt(); }

CInterval operator/(const CInterval& a, const CInterval& b) {
  Interval d = b.modulus_sq();
  if (d.contains_zero())
    throw Error(Error::Code::precision,
                "complex division by interval containing 0");
  return CInterval((a.re * b.re + a.im * b.im) / d,
                   (a.im * b.re - a.re * b.im) / d);
}

// ---------------------------------------------------------------------------
// CReal

CReal::CReal(Gen gen) : state_(std::make_shared<State>()) {
  state_->gen = std::move(gen);
}

CReal CReal::constant(const mpq_class& q) {
  return CReal([q](mpfr_prec_t p) { return Interval::from_q(q, p); });
}

Interval CReal::at(mpfr_prec_t prec) const {
  if (!state_) throw Error(Error::Code::internal, "empty CReal");
  std::lock_guard<std::mutex> lock(state_->mu);
  if (state_->has_cache && state_->cache_prec >= prec) return state_->cache;
  Interval fresh = state_->gen(prec);
  if (state_->has_cache) {
    state_->cache = intersect(state_->cache, fresh);
  } else {
    state_->cache = fresh;
    state_->has_cache = true;
  }
  state_->cache_prec = prec;
  return state_->cache;
}

CReal operator+(const CReal& a, const CReal& b) {
  return CReal([a, b](mpfr_prec_t p) { return a.at(p) + b.at(p); });
}

CReal operator-(const CReal& a, const CReal& b) {
  return CReal([a, b](mpfr_prec_t p) { return a.at(p) - b.at(p); });
}

CReal operator*(const CReal& a, const CReal& b) {
  return CReal([a, b](mpfr_prec_t p) { return a.at(p) * b.at(p); });
}

CReal operator/(const CReal& a, const CReal& b) {
  return CReal([a, b](mpfr_prec_t p) { return a.at(p) / b.at(p); });
}

CReal CReal::log() const {
  CReal self = *this;
  return CReal([self](mpfr_prec_t p) { return self.at(p).log(); });
}

CReal CReal::exp() const {
  CReal self = *this;
  return CReal([self](mpfr_prec_t p) { return self.at(p).exp(); });
}

CReal CReal::sqrt() const {
  CReal self = *this;
  return CReal([self](mpfr_prec_t p) { return self.at(p).sqrt(); });
}

}  // namespace recsolve
