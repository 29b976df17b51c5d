#include "recsolve/reduction.hpp"

#include <mpfr.h>

#include <algorithm>
#include <sstream>
#include <utility>

#include "cr_util.hpp"

namespace recsolve {

using crutil::certify_positive;
using crutil::cr_si;

namespace {

constexpr int kBdRetryBudget = 25;  // further convergents after the first

mpq_class pow_q(const mpq_class& base, long e) {
  if (e == 0) return mpq_class(1);
  unsigned long mag = static_cast<unsigned long>(e < 0 ? -e : e);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), mag);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), mag);
  mpq_class r(num, den);
  r.canonicalize();
  if (e < 0) r = 1 / r;
  return r;
}

long floor_of_upper(const Interval& x, const char* what) {
  mpq_class hi = x.hi_q();
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), hi.get_num().get_mpz_t(),
             hi.get_den().get_mpz_t());
  if (!fl.fits_slong_p())
    throw Error(Error::Code::precision,
                std::string(what) + ": bound does not fit a machine integer");
  return fl.get_si();
}

long ceil_of_upper(const Interval& x, const char* what) {
  mpq_class hi = x.hi_q();
  mpz_class cl;
  mpz_cdiv_q(cl.get_mpz_t(), hi.get_num().get_mpz_t(),
             hi.get_den().get_mpz_t());
  if (!cl.fits_slong_p())
    throw Error(Error::Code::precision,
                std::string(what) + ": bound does not fit a machine integer");
  return cl.get_si();
}

void require_scale_and_base(const CReal& A, const CReal& B, const char* who) {
  if (!certify_positive(A, {128, 512, 2048}))
    throw Error(Error::Code::invalid_domain,
                std::string(who) + ": scale A must be certified positive");
  if (!certify_positive(B - cr_si(1), {128, 512, 2048}))
    throw Error(Error::Code::invalid_domain,
                std::string(who) + ": base B must be certified above 1");
}

// eps(q) = ||mu q|| - M ||tau q|| as a refinable value.  When an enclosure
// cannot pin the nearest integer yet, the universally valid range [0, 1/2]
// of ||.|| stands in, so the generator is total at every precision.
CReal make_eps(const CReal& tau, const CReal& mu, const mpz_class& M,
               const mpz_class& q) {
  return CReal([tau, mu, M, q](mpfr_prec_t p) {
    Interval qi = Interval::exact_z(q, p);
    bool okt = false, okm = false;
    Interval dt = (tau.at(p) * qi).dist_to_nearest_int(okt);
    Interval dm = (mu.at(p) * qi).dist_to_nearest_int(okm);
    Interval half_range =
        ihull(Interval::exact_si(0, p), Interval::from_q(mpq_class(1, 2), p));
    if (!okt) dt = half_range;
    if (!okm) dm = half_range;
    return dm - Interval::exact_z(M, p) * dt;
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// ContinuedFraction
// ---------------------------------------------------------------------------

ContinuedFraction::ContinuedFraction(CReal x, mpfr_prec_t prec_ceiling)
    : x_(std::move(x)), ceiling_(prec_ceiling) {}

ContinuedFraction::ContinuedFraction(const mpq_class& x) : rational_(true) {
  mpz_class num = x.get_num(), den = x.get_den();
  mpz_class pm1 = 1, pm2 = 0, qm1 = 0, qm2 = 1;
  while (den != 0) {
    mpz_class aj;
    mpz_fdiv_q(aj.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    mpz_class rem = num - aj * den;
    mpz_class pj = aj * pm1 + pm2;
    mpz_class qj = aj * qm1 + qm2;
    a_.push_back(aj);
    p_.push_back(pj);
    q_.push_back(qj);
    pm2 = pm1;
    pm1 = pj;
    qm2 = qm1;
    qm1 = qj;
    num = den;
    den = rem;
  }
  terminated_ = true;
}

void ContinuedFraction::extend_one() {
  const size_t j = a_.size();
  const mpz_class pm1 = (j >= 1) ? p_[j - 1] : mpz_class(1);
  const mpz_class qm1 = (j >= 1) ? q_[j - 1] : mpz_class(0);
  const mpz_class pm2 =
      (j >= 2) ? p_[j - 2] : ((j == 1) ? mpz_class(1) : mpz_class(0));
  const mpz_class qm2 =
      (j >= 2) ? q_[j - 2] : ((j == 1) ? mpz_class(0) : mpz_class(1));

  // The quotient certification needs roughly 2 log2(q_{j-1}) bits before it
  // can possibly succeed; skip the futile attempts below that.
  if (j >= 1) {
    mpfr_prec_t want = static_cast<mpfr_prec_t>(
        2 * mpz_sizeinbase(qm1.get_mpz_t(), 2) + 128);
    if (cur_prec_ < want) cur_prec_ = std::min(want, ceiling_);
  }

  for (;;) {
    Interval X = x_.at(cur_prec_);
    mpz_class aj;
    bool certified = false;
    if (j == 0) {
      certified = X.floor_certain(aj);
    } else {
      Interval den = X * Interval::exact_z(qm1, cur_prec_) -
                     Interval::exact_z(pm1, cur_prec_);
      if (!den.contains_zero()) {
        Interval num = Interval::exact_z(pm2, cur_prec_) -
                       X * Interval::exact_z(qm2, cur_prec_);
        certified = (num / den).floor_certain(aj);
      }
    }
    if (certified) {
      if (j >= 1 && aj < 1)
        throw Error(Error::Code::internal,
                    "complete quotient certified below 1");
      a_.push_back(aj);
      p_.push_back(aj * pm1 + pm2);
      q_.push_back(aj * qm1 + qm2);
      return;
    }
    if (cur_prec_ >= ceiling_)
      throw Error(Error::Code::precision,
                  "continued-fraction certification reached the precision "
                  "ceiling (rational source, or ceiling too low)");
    cur_prec_ = std::min<mpfr_prec_t>(cur_prec_ * 2, ceiling_);
  }
}

void ContinuedFraction::need(size_t j) {
  while (!terminated_ && a_.size() <= j) extend_one();
  if (a_.size() <= j)
    throw Error(Error::Code::invalid_domain,
                "continued fraction terminated after " +
                    std::to_string(a_.size()) + " partial quotients");
}

mpz_class ContinuedFraction::a(size_t j) {
  std::lock_guard<std::mutex> lk(mu_);
  need(j);
  return a_[j];
}

mpz_class ContinuedFraction::p(size_t j) {
  std::lock_guard<std::mutex> lk(mu_);
  need(j);
  return p_[j];
}

mpz_class ContinuedFraction::q(size_t j) {
  std::lock_guard<std::mutex> lk(mu_);
  need(j);
  return q_[j];
}

size_t ContinuedFraction::verified_count() const {
  std::lock_guard<std::mutex> lk(mu_);
  return a_.size();
}

bool ContinuedFraction::terminated() const {
  std::lock_guard<std::mutex> lk(mu_);
  return terminated_;
}

void ContinuedFraction::ensure_count(size_t count) {
  std::lock_guard<std::mutex> lk(mu_);
  while (!terminated_ && a_.size() < count) extend_one();
}

size_t ContinuedFraction::first_q_above(const mpz_class& threshold) {
  std::lock_guard<std::mutex> lk(mu_);
  for (size_t j = 0;; ++j) {
    while (a_.size() <= j) {
      if (terminated_)
        throw Error(Error::Code::invalid_domain,
                    "no convergent denominator exceeds the threshold "
                    "(terminating expansion)");
      extend_one();
    }
    if (q_[j] > threshold) return j;
  }
}

// ---------------------------------------------------------------------------
// Baker--Davenport
// ---------------------------------------------------------------------------

ReductionOutcome bd_reduce(ContinuedFraction& cf, const ReductionProblem& prob) {
  if (prob.M < 1)
    throw Error(Error::Code::invalid_domain, "bd_reduce: M must be >= 1");
  require_scale_and_base(prob.A, prob.B, "bd_reduce");

  const size_t j0 = cf.first_q_above(6 * prob.M);
  ReductionOutcome out;
  for (int attempt = 0; attempt <= kBdRetryBudget; ++attempt) {
    mpz_class qj = cf.q(j0 + attempt);
    out.trace.push_back(qj);
    CReal eps = make_eps(prob.tau, prob.mu, prob.M, qj);

    // Certify the sign of eps, escalating precision from the scale the
    // denominator demands.  Undecided after the cap counts as non-positive.
    mpfr_prec_t p0 = static_cast<mpfr_prec_t>(
        mpz_sizeinbase(qj.get_mpz_t(), 2) + 192);
    int sign = 0;
    for (mpfr_prec_t p = p0; p <= 16 * p0; p *= 2) {
      Interval e = eps.at(p);
      if (e.is_positive()) {
        sign = 1;
        break;
      }
      if (e.is_negative()) {
        sign = -1;
        break;
      }
    }
    if (sign != 1) continue;

    CReal bound = CReal([A = prob.A, B = prob.B, eps, qj](mpfr_prec_t p) {
      Interval aq = A.at(p) * Interval::exact_z(qj, p);
      return (aq / eps.at(p)).log() / B.at(p).log();
    });
    out.method = ReductionMethod::BakerDavenport;
    out.new_k_bound = floor_of_upper(bound.at(std::max<mpfr_prec_t>(p0, 320)),
                                     "bd_reduce");
    out.q_used = qj;
    out.epsilon = eps;
    return out;
  }
  throw Error(Error::Code::unresolved,
              "DependenceSuspected: eps stayed non-positive for " +
                  std::to_string(kBdRetryBudget + 1) +
                  " consecutive convergent denominators; check for a linear "
                  "relation between tau, 1 and mu");
}

ReductionOutcome bd_reduce(const ReductionProblem& prob) {
  ContinuedFraction cf(prob.tau);
  return bd_reduce(cf, prob);
}

// ---------------------------------------------------------------------------
// Dependence detection
// ---------------------------------------------------------------------------

std::optional<std::array<mpz_class, 3>> detect_dependence(
    const CReal& tau, const CReal& mu, long height,
    const std::optional<LogWitness>& witness) {
  if (height < 1 || height > 1000)
    throw Error(Error::Code::config,
                "dependence search height must lie in [1, 1000]");
  if (witness) {
    if (witness->base <= 1)
      throw Error(Error::Code::config,
                  "dependence witness base must be a rational > 1");
    if (exact_sign(witness->x) <= 0 || exact_sign(witness->y) <= 0)
      throw Error(Error::Code::config,
                  "dependence witness elements must embed to positive reals");
  }

  const long H = height;
  // Candidate filter: |a tau + b + c mu| below 2^-thrbits, evaluated with
  // enough working precision that the enclosure width is far below the
  // threshold itself.
  const long thrbits = std::max(2 * H, 96L);
  const mpfr_prec_t scanp = static_cast<mpfr_prec_t>(thrbits + 96);
  const Interval thr = Interval::exact_si(1, scanp).mul_2si(-thrbits);
  const Interval half = Interval::from_q(mpq_class(1, 2), scanp);

  Interval T = tau.at(scanp);
  Interval U = mu.at(scanp);
  std::vector<Interval> AT, CU;  // a*T for a=0..H; c*U for c=-H..H (offset H)
  AT.reserve(H + 1);
  CU.reserve(2 * H + 1);
  AT.push_back(Interval::exact_si(0, scanp));
  for (long a = 1; a <= H; ++a)
    AT.push_back(AT.back() + T);
  CU.push_back(-(U * Interval::exact_si(H, scanp)));
  for (long c = -H + 1; c <= H; ++c)
    CU.push_back(CU.back() + U);

  auto try_candidate =
      [&](long a, long c) -> std::optional<std::array<mpz_class, 3>> {
    Interval s = AT[a] + CU[c + H];
    mpz_class r;
    if (!(s + half).floor_certain(r)) return std::nullopt;
    if (r > H || r < -H) return std::nullopt;
    Interval resid = (s - Interval::exact_z(r, scanp)).abs();
    if (!resid.certainly_lt(thr)) return std::nullopt;
    mpz_class az(a), bz(-r), cz(c);
    if (witness) {
      NFElem prod = witness->x.pow(a) * witness->y.pow(c);
      prod = prod * witness->x.field().from_q(pow_q(witness->base, bz.get_si()));
      if (!(prod == witness->x.field().one())) return std::nullopt;
    }
    mpz_class g = gcd(gcd(abs(az), abs(bz)), abs(cz));
    if (g > 1) {
      az /= g;
      bz /= g;
      cz /= g;
    }
    return std::array<mpz_class, 3>{az, bz, cz};
  };

  // Shells of increasing max{|a|, |c|}, a >= 0 (the sign-flipped half is
  // equivalent), so the smallest relation is found first.
  for (long h = 1; h <= H; ++h) {
    for (long c = -h; c <= h; ++c) {
      if (auto hit = try_candidate(h, c)) return hit;
    }
    if (auto hit = try_candidate(0, h)) return hit;
    for (long a = 1; a < h; ++a) {
      if (auto hit = try_candidate(a, h)) return hit;
      if (auto hit = try_candidate(a, -h)) return hit;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Legendre criterion
// ---------------------------------------------------------------------------

ReductionOutcome legendre_reduce(
    ContinuedFraction& cf,
    const std::optional<std::array<mpz_class, 3>>& relation,
    const CReal& A_prime, const CReal& B, const mpz_class& N_prime) {
  (void)relation;  // context for the caller's trace; not part of the bound
  if (N_prime < 1)
    throw Error(Error::Code::invalid_domain, "legendre_reduce: N' must be >= 1");
  require_scale_and_base(A_prime, B, "legendre_reduce");

  // J = min{j : q_{j+1} > N'}; every candidate m'/n' with n' <= N' is a
  // convergent p_j/q_j with j <= J.
  const size_t J = cf.first_q_above(N_prime) - 1;
  ReductionOutcome out;
  out.method = ReductionMethod::Legendre;
  mpz_class S = 0;
  for (size_t j = 0; j <= J + 1; ++j) {
    out.trace.push_back(cf.q(j));
    if (j >= 1) S = std::max(S, cf.a(j));
  }
  mpz_class qJ = cf.q(J);

  // k <= max{ threshold branch, convergent branch }, both rounded up from
  // certified upper bounds.
  CReal threshold_branch = CReal([A_prime, B, N_prime](mpfr_prec_t p) {
    Interval v = Interval::exact_si(2, p) * Interval::exact_z(N_prime, p) *
                 A_prime.at(p);
    return v.log() / B.at(p).log();
  });
  CReal convergent_branch = CReal([A_prime, B, S, qJ](mpfr_prec_t p) {
    Interval v = Interval::exact_z(S + 2, p) * Interval::exact_z(qJ, p) *
                 A_prime.at(p);
    return v.log() / B.at(p).log();
  });
  mpfr_prec_t p = static_cast<mpfr_prec_t>(
      mpz_sizeinbase(qJ.get_mpz_t(), 2) + 192);
  long b1 = ceil_of_upper(threshold_branch.at(p), "legendre_reduce");
  long b2 = ceil_of_upper(convergent_branch.at(p), "legendre_reduce");
  out.new_k_bound = std::max(b1, b2);
  out.q_used = qJ;
  out.S = S;
  return out;
}

ReductionOutcome legendre_reduce(
    const CReal& tau, const std::optional<std::array<mpz_class, 3>>& relation,
    const CReal& A_prime, const CReal& B, const mpz_class& N_prime) {
  ContinuedFraction cf(tau);
  return legendre_reduce(cf, relation, A_prime, B, N_prime);
}

// ---------------------------------------------------------------------------
// Trace records
// ---------------------------------------------------------------------------

std::string trace_record(const ReductionOutcome& out, const std::string& mu_id) {
  std::ostringstream os;
  os << mu_id << '\t';
  switch (out.method) {
    case ReductionMethod::BakerDavenport:
      os << "baker-davenport";
      break;
    case ReductionMethod::Legendre:
      os << "legendre";
      break;
    case ReductionMethod::Failed:
      os << "failed";
      break;
  }
  os << '\t' << out.q_used.get_str() << '\t';
  if (out.epsilon)
    os << out.epsilon->at(192).str(12);
  else if (out.method == ReductionMethod::Legendre)
    os << out.S.get_str();
  else
    os << '-';
  os << '\t' << out.new_k_bound;
  return os.str();
}

}  // namespace recsolve
