#include "recsolve/poly.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace recsolve {

QPoly::QPoly(std::vector<mpq_class> coeffs) : c_(std::move(coeffs)) {
  normalize();
}

void QPoly::normalize() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

QPoly QPoly::from_z(const std::vector<mpz_class>& coeffs) {
  std::vector<mpq_class> q(coeffs.begin(), coeffs.end());
  return QPoly(std::move(q));
}

QPoly QPoly::x_power(int n) {
  std::vector<mpq_class> c(n + 1, mpq_class(0));
  c[n] = 1;
  return QPoly(std::move(c));
}

QPoly QPoly::constant(const mpq_class& c) { return QPoly({c}); }

int QPoly::degree() const { return static_cast<int>(c_.size()) - 1; }

const mpq_class& QPoly::coeff(int i) const {
  static const mpq_class zero(0);
  if (i < 0 || i >= static_cast<int>(c_.size())) return zero;
  return c_[i];
}

mpq_class QPoly::leading() const {
  if (is_zero()) return 0;
  return c_.back();
}

bool QPoly::is_monic() const { return !is_zero() && c_.back() == 1; }

QPoly operator+(const QPoly& a, const QPoly& b) {
  std::vector<mpq_class> c(std::max(a.c_.size(), b.c_.size()), mpq_class(0));
  for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
  for (size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
  return QPoly(std::move(c));
}

QPoly operator-(const QPoly& a, const QPoly& b) {
  std::vector<mpq_class> c(std::max(a.c_.size(), b.c_.size()), mpq_class(0));
  for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
  for (size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
  return QPoly(std::move(c));
}

QPoly operator*(const QPoly& a, const QPoly& b) {
  if (a.is_zero() || b.is_zero()) return QPoly();
  std::vector<mpq_class> c(a.c_.size() + b.c_.size() - 1, mpq_class(0));
  for (size_t i = 0; i < a.c_.size(); ++i)
    for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return QPoly(std::move(c));
}

QPoly QPoly::operator-() const {
  std::vector<mpq_class> c(c_);
  for (auto& x : c) x = -x;
  return QPoly(std::move(c));
}

QPoly QPoly::scale(const mpq_class& s) const {
  std::vector<mpq_class> c(c_);
  for (auto& x : c) x *= s;
  return QPoly(std::move(c));
}

bool QPoly::operator==(const QPoly& o) const { return c_ == o.c_; }

void QPoly::divmod(const QPoly& a, const QPoly& b, QPoly& q, QPoly& r) {
  if (b.is_zero()) throw Error(Error::Code::internal, "division by zero poly");
  std::vector<mpq_class> rem = a.c_;
  int db = b.degree();
  int da = static_cast<int>(rem.size()) - 1;
  if (da < db) {
    q = QPoly();
    r = a;
    return;
  }
  std::vector<mpq_class> quot(da - db + 1, mpq_class(0));
  mpq_class lead = b.c_.back();
  for (int i = da; i >= db; --i) {
    if (rem[i] == 0) continue;
    mpq_class f = rem[i] / lead;
    quot[i - db] = f;
    for (int j = 0; j <= db; ++j) rem[i - db + j] -= f * b.c_[j];
  }
  q = QPoly(std::move(quot));
  r = QPoly(std::move(rem));
}

QPoly QPoly::divexact(const QPoly& b) const {
  QPoly q, r;
  divmod(*this, b, q, r);
  if (!r.is_zero())
    throw Error(Error::Code::internal, "divexact: nonzero remainder");
  return q;
}

QPoly QPoly::derivative() const {
  if (degree() <= 0) return QPoly();
  std::vector<mpq_class> c(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) c[i - 1] = c_[i] * (long)i;
  return QPoly(std::move(c));
}

mpq_class QPoly::eval_q(const mpq_class& x) const {
  mpq_class acc(0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Interval QPoly::eval_i(const Interval& x) const {
  Interval acc = Interval::exact_si(0, x.prec());
  for (auto it = c_.rbegin(); it != c_.rend(); ++it)
    acc = acc * x + Interval::from_q(*it, x.prec());
  return acc;
}

CInterval QPoly::eval_ci(const CInterval& x) const {
  mpfr_prec_t p = x.re.prec();
  CInterval acc(Interval::exact_si(0, p), Interval::exact_si(0, p));
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    acc = acc * x;
    acc.re = acc.re + Interval::from_q(*it, p);
  }
  return acc;
}

QPoly QPoly::gcd(const QPoly& a, const QPoly& b) {
  QPoly f = a, g = b;
  while (!g.is_zero()) {
    QPoly q, r;
    divmod(f, g, q, r);
    f = g;
    g = r;
  }
  if (f.is_zero()) return f;
  return f.monic();
}

bool QPoly::squarefree() const {
  if (degree() <= 0) return true;
  return gcd(*this, derivative()).degree() == 0;
}

QPoly QPoly::squarefree_part() const {
  if (degree() <= 0) return *this;
  QPoly g = gcd(*this, derivative());
  if (g.degree() == 0) return monic();
  return divexact(g).monic();
}

QPoly QPoly::monic() const {
  if (is_zero()) return *this;
  return scale(mpq_class(1) / c_.back());
}

std::vector<mpz_class> QPoly::primitive_z() const {
  if (is_zero()) return {};
  mpz_class den(1);
  for (const auto& q : c_) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(),
                                   q.get_den().get_mpz_t());
  std::vector<mpz_class> z(c_.size());
  mpz_class content(0);
  for (size_t i = 0; i < c_.size(); ++i) {
    mpq_class t = c_[i] * den;
    z[i] = t.get_num();  // exact: denominator divides den
    mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), z[i].get_mpz_t());
  }
  if (content == 0) content = 1;
  if (z.back() < 0) content = -content;
  for (auto& v : z) v /= content;
  return z;
}

QPoly QPoly::reciprocal() const {
  std::vector<mpq_class> c(c_.rbegin(), c_.rend());
  return QPoly(std::move(c));
}

QPoly QPoly::compose_scale(const mpq_class& s) const {
  std::vector<mpq_class> c(c_);
  mpq_class p(1);
  for (size_t i = 1; i < c.size(); ++i) {
    p *= s;
    c[i] *= p;
  }
  return QPoly(std::move(c));
}

namespace {

// Fraction-free Bareiss determinant of a square rational matrix after
// clearing denominators row by row; exact.
mpq_class bareiss_det(std::vector<std::vector<mpq_class>> m) {
  size_t n = m.size();
  if (n == 0) return 1;
  // Clear denominators per row, tracking the product pulled out.
  mpq_class pulled(1);
  std::vector<std::vector<mpz_class>> a(n, std::vector<mpz_class>(n));
  for (size_t i = 0; i < n; ++i) {
    mpz_class den(1);
    for (size_t j = 0; j < n; ++j)
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(),
              m[i][j].get_den().get_mpz_t());
    for (size_t j = 0; j < n; ++j) {
      mpq_class t = m[i][j] * mpq_class(den);
      a[i][j] = t.get_num();
    }
    pulled /= mpq_class(den);
  }
  mpz_class prev(1);
  int sign = 1;
  for (size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      size_t piv = k + 1;
      while (piv < n && a[piv][k] == 0) ++piv;
      if (piv == n) return 0;
      std::swap(a[k], a[piv]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i) {
      for (size_t j = k + 1; j < n; ++j) {
        mpz_class t = a[k][k] * a[i][j] - a[i][k] * a[k][j];
        mpz_divexact(a[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      a[i][k] = 0;
    }
    prev = a[k][k];
  }
  mpq_class det(a[n - 1][n - 1]);
  if (sign < 0) det = -det;
  return det * pulled;
}

}  // namespace

mpq_class QPoly::resultant(const QPoly& a, const QPoly& b) {
  int da = a.degree(), db = b.degree();
  if (da < 0 || db < 0) return 0;
  if (da == 0) {
    mpq_class r(1);
    for (int i = 0; i < db; ++i) r *= a.c_[0];
    return r;
  }
  if (db == 0) {
    mpq_class r(1);
    for (int i = 0; i < da; ++i) r *= b.c_[0];
    return r;
  }
  size_t n = static_cast<size_t>(da + db);
  std::vector<std::vector<mpq_class>> s(n, std::vector<mpq_class>(n, 0));
  for (int i = 0; i < db; ++i)
    for (int j = 0; j <= da; ++j) s[i][i + j] = a.c_[da - j];
  for (int i = 0; i < da; ++i)
    for (int j = 0; j <= db; ++j) s[db + i][i + j] = b.c_[db - j];
  return bareiss_det(std::move(s));
}

std::string QPoly::str() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    if (c_[i] == 0) continue;
    if (!first) os << (c_[i] > 0 ? " + " : " - ");
    else if (c_[i] < 0) os << "-";
    mpq_class v = ::abs(c_[i]);
    if (v != 1 || i == 0) os << v.get_str();
    if (i > 0) {
      if (v != 1) os << "*";
      os << "x";
      if (i > 1) os << "^" << i;
    }
    first = false;
  }
  return os.str();
}

unsigned totient(unsigned m) {
  unsigned r = m;
  for (unsigned p = 2; p * p <= m; ++p) {
    if (m % p == 0) {
      r -= r / p;
      while (m % p == 0) m /= p;
    }
  }
  if (m > 1) r -= r / m;
  return r;
}

QPoly cyclotomic(unsigned m) {
  static std::map<unsigned, QPoly> memo;
  auto it = memo.find(m);
  if (it != memo.end()) return it->second;
  // x^m - 1 divided by all lower-order cyclotomics.
  std::vector<mpq_class> c(m + 1, mpq_class(0));
  c[0] = -1;
  c[m] = 1;
  QPoly num{std::move(c)};
  for (unsigned d = 1; d < m; ++d)
    if (m % d == 0) num = num.divexact(cyclotomic(d));
  memo[m] = num;
  return num;
}

// ---------------------------------------------------------------------------
// Sturm sequences / real root isolation

namespace {

std::vector<QPoly> sturm_chain(const QPoly& f) {
  std::vector<QPoly> chain;
  chain.push_back(f);
  chain.push_back(f.derivative());
  while (!chain.back().is_zero() && chain.back().degree() > 0) {
    QPoly q, r;
    QPoly::divmod(chain[chain.size() - 2], chain.back(), q, r);
    if (r.is_zero()) break;
    chain.push_back(-r);
  }
  return chain;
}

int sign_changes(const std::vector<QPoly>& chain, const mpq_class& x) {
  int changes = 0, prev = 0;
  for (const auto& p : chain) {
    mpq_class v = p.eval_q(x);
    int s = sgn(v);
    if (s != 0) {
      if (prev != 0 && s != prev) ++changes;
      prev = s;
    }
  }
  return changes;
}

mpq_class cauchy_root_bound(const QPoly& f) {
  // All roots satisfy |z| < 1 + max |c_i| / |c_n|.
  mpq_class m(0);
  mpq_class lead = abs(f.leading());
  for (int i = 0; i < f.degree(); ++i) {
    mpq_class v = abs(f.coeff(i)) / lead;
    if (v > m) m = v;
  }
  return m + 1;
}

}  // namespace

int sturm_count(const QPoly& f, const mpq_class& a, const mpq_class& b) {
  QPoly sf = f.squarefree_part();
  auto chain = sturm_chain(sf);
  return sign_changes(chain, a) - sign_changes(chain, b);
}

std::vector<std::pair<mpq_class, mpq_class>> isolate_real_roots(
    const QPoly& f, const mpq_class& tol) {
  std::vector<std::pair<mpq_class, mpq_class>> out;
  QPoly sf = f.squarefree_part();
  if (sf.degree() <= 0) return out;
  auto chain = sturm_chain(sf);
  mpq_class bound = cauchy_root_bound(sf);
  // Nudge the outer bounds so they are not roots themselves.
  mpq_class lo = -bound - 1, hi = bound + 1;

  struct Seg {
    mpq_class a, b;
    int count;
  };
  std::vector<Seg> work;
  int total = sign_changes(chain, lo) - sign_changes(chain, hi);
  if (total <= 0) return out;
  work.push_back({lo, hi, total});
  while (!work.empty()) {
    Seg s = work.back();
    work.pop_back();
    if (s.count == 0) continue;
    if (s.count == 1 && (s.b - s.a) <= tol) {
      out.emplace_back(s.a, s.b);
      continue;
    }
    mpq_class mid = (s.a + s.b) / 2;
    if (sf.eval_q(mid) == 0) {
      // Exact rational root at the midpoint.
      if (s.count == 1 || (s.b - s.a) <= tol) {
        out.emplace_back(mid, mid);
        // Remaining roots (if any) are strictly inside the halves; shrink
        // around mid by a hair so the endpoint is not a root.
        mpq_class eps = (s.b - s.a) / 1024;
        int cl = sign_changes(chain, s.a) - sign_changes(chain, mid - eps);
        int cr = sign_changes(chain, mid + eps) - sign_changes(chain, s.b);
        if (cl > 0) work.push_back({s.a, mid - eps, cl});
        if (cr > 0) work.push_back({mid + eps, s.b, cr});
        continue;
      }
      mpq_class eps = (s.b - s.a) / 1024;
      int cl = sign_changes(chain, s.a) - sign_changes(chain, mid - eps);
      int cr = sign_changes(chain, mid + eps) - sign_changes(chain, s.b);
      out.emplace_back(mid, mid);
      if (cl > 0) work.push_back({s.a, mid - eps, cl});
      if (cr > 0) work.push_back({mid + eps, s.b, cr});
      continue;
    }
    int cl = sign_changes(chain, s.a) - sign_changes(chain, mid);
    int cr = s.count - cl;
    if (cl > 0) work.push_back({s.a, mid, cl});
    if (cr > 0) work.push_back({mid, s.b, cr});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

std::vector<mpq_class> rational_roots(const QPoly& f) {
  std::vector<mpq_class> out;
  if (f.is_zero()) return out;
  auto z = f.primitive_z();
  // Trailing nonzero coefficient.
  size_t low = 0;
  while (low < z.size() && z[low] == 0) ++low;
  if (low > 0 && f.eval_q(0) == 0) out.push_back(0);
  mpz_class a0 = z[low], an = z.back();
  auto divisors = [](mpz_class v) {
    v = abs(v);
    std::vector<mpz_class> ds;
    for (mpz_class i = 1; i * i <= v; ++i) {
      if (v % i == 0) {
        ds.push_back(i);
        if (i * i != v) ds.push_back(v / i);
      }
    }
    return ds;
  };
  auto ps = divisors(a0);
  auto qs = divisors(an);
  for (const auto& p : ps)
    for (const auto& q : qs) {
      mpq_class c1(p, q), c2(-p, q);
      c1.canonicalize();
      c2.canonicalize();
      if (f.eval_q(c1) == 0) out.push_back(c1);
      if (f.eval_q(c2) == 0) out.push_back(c2);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Certified complex roots

namespace {

// Plain complex point arithmetic on mpfr (round-to-nearest); only used to
// produce Durand-Kerner approximations whose quality is then certified.
struct CPoint {
  mpfr_t re, im;
  explicit CPoint(mpfr_prec_t p) {
    mpfr_init2(re, p);
    mpfr_init2(im, p);
    mpfr_set_zero(re, 1);
    mpfr_set_zero(im, 1);
  }
  CPoint(const CPoint& o) {
    mpfr_init2(re, mpfr_get_prec(o.re));
    mpfr_init2(im, mpfr_get_prec(o.im));
    mpfr_set(re, o.re, MPFR_RNDN);
    mpfr_set(im, o.im, MPFR_RNDN);
  }
  CPoint& operator=(const CPoint& o) {
    mpfr_set(re, o.re, MPFR_RNDN);
    mpfr_set(im, o.im, MPFR_RNDN);
    return *this;
  }
  ~CPoint() {
    mpfr_clear(re);
    mpfr_clear(im);
  }
};

void cmul(CPoint& r, const CPoint& a, const CPoint& b, mpfr_t t1, mpfr_t t2) {
  // r = a*b; r may not alias a or b.
  mpfr_mul(t1, a.re, b.re, MPFR_RNDN);
  mpfr_mul(t2, a.im, b.im, MPFR_RNDN);
  mpfr_sub(t1, t1, t2, MPFR_RNDN);
  mpfr_mul(t2, a.re, b.im, MPFR_RNDN);
  mpfr_set(r.re, t1, MPFR_RNDN);
  mpfr_mul(t1, a.im, b.re, MPFR_RNDN);
  mpfr_add(r.im, t1, t2, MPFR_RNDN);
}

void cdiv(CPoint& r, const CPoint& a, const CPoint& b, mpfr_t t1, mpfr_t t2,
          mpfr_t t3) {
  // r = a/b.
  mpfr_mul(t1, b.re, b.re, MPFR_RNDN);
  mpfr_mul(t2, b.im, b.im, MPFR_RNDN);
  mpfr_add(t3, t1, t2, MPFR_RNDN);  // |b|^2
  mpfr_mul(t1, a.re, b.re, MPFR_RNDN);
  mpfr_mul(t2, a.im, b.im, MPFR_RNDN);
  mpfr_add(t1, t1, t2, MPFR_RNDN);
  mpfr_div(t1, t1, t3, MPFR_RNDN);
  mpfr_mul(t2, a.im, b.re, MPFR_RNDN);
  mpfr_set(r.re, t1, MPFR_RNDN);
  mpfr_mul(t1, a.re, b.im, MPFR_RNDN);
  mpfr_sub(t2, t2, t1, MPFR_RNDN);
  mpfr_div(r.im, t2, t3, MPFR_RNDN);
}

}  // namespace

std::vector<RootDisk> certified_roots(const QPoly& fin, mpfr_prec_t prec) {
  QPoly f = fin.monic();
  int n = f.degree();
  if (n <= 0) return {};
  if (!fin.squarefree())
    throw Error(Error::Code::invalid_domain,
                "certified_roots requires a squarefree polynomial");
  QPoly fd = f.derivative();

  // --- Durand-Kerner iteration at working precision.
  mpfr_prec_t wp = prec + 64;
  std::vector<CPoint> z(n, CPoint(wp));
  mpfr_t t1, t2, t3;
  mpfr_init2(t1, wp);
  mpfr_init2(t2, wp);
  mpfr_init2(t3, wp);
  // Start points: r * (0.4 + 0.9i)^(j+1) with r from the Cauchy bound.
  mpq_class bound = cauchy_root_bound(f);
  CPoint seed(wp), cur(wp);
  mpfr_set_d(seed.re, 0.4, MPFR_RNDN);
  mpfr_set_d(seed.im, 0.9, MPFR_RNDN);
  mpfr_set_ui(cur.re, 1, MPFR_RNDN);
  mpfr_set_zero(cur.im, 1);
  for (int j = 0; j < n; ++j) {
    CPoint nxt(wp);
    cmul(nxt, cur, seed, t1, t2);
    cur = nxt;
    mpfr_set_q(t3, bound.get_mpq_t(), MPFR_RNDN);
    mpfr_mul(z[j].re, cur.re, t3, MPFR_RNDN);
    mpfr_mul(z[j].im, cur.im, t3, MPFR_RNDN);
  }
  // Horner evaluation of f at a CPoint.
  auto evalf = [&](const CPoint& x, CPoint& out) {
    CPoint acc(wp), tmp(wp);
    mpfr_set_zero(acc.re, 1);
    mpfr_set_zero(acc.im, 1);
    for (int i = f.degree(); i >= 0; --i) {
      cmul(tmp, acc, x, t1, t2);
      mpfr_set_q(t3, f.coeff(i).get_mpq_t(), MPFR_RNDN);
      mpfr_add(tmp.re, tmp.re, t3, MPFR_RNDN);
      acc = tmp;
    }
    out = acc;
  };
  long max_iter = 60 + static_cast<long>(prec / 2);
  for (long iter = 0; iter < max_iter; ++iter) {
    bool moved = false;
    for (int j = 0; j < n; ++j) {
      CPoint num(wp), den(wp), diff(wp), tmp(wp);
      evalf(z[j], num);
      mpfr_set_ui(den.re, 1, MPFR_RNDN);
      mpfr_set_zero(den.im, 1);
      for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        mpfr_sub(diff.re, z[j].re, z[i].re, MPFR_RNDN);
        mpfr_sub(diff.im, z[j].im, z[i].im, MPFR_RNDN);
        cmul(tmp, den, diff, t1, t2);
        den = tmp;
      }
      CPoint step(wp);
      cdiv(step, num, den, t1, t2, t3);
      // Convergence check: |step| relative to max(1, |z|).
      mpfr_hypot(t1, step.re, step.im, MPFR_RNDN);
      mpfr_hypot(t2, z[j].re, z[j].im, MPFR_RNDN);
      if (mpfr_cmp_ui(t2, 1) < 0) mpfr_set_ui(t2, 1, MPFR_RNDN);
      mpfr_mul_2si(t2, t2, -(long)prec - 8, MPFR_RNDN);
      if (mpfr_cmp(t1, t2) > 0) moved = true;
      mpfr_sub(z[j].re, z[j].re, step.re, MPFR_RNDN);
      mpfr_sub(z[j].im, z[j].im, step.im, MPFR_RNDN);
    }
    if (!moved) break;
  }

  // --- Rigorous inclusion disks around the approximations.
  std::vector<RootDisk> disks(n);
  std::vector<Interval> radius(n, Interval(prec));
  std::vector<CInterval> centers;
  centers.reserve(n);
  for (int j = 0; j < n; ++j) {
    Interval re(prec), im(prec);
    mpfr_set(re.lo_raw(), z[j].re, MPFR_RNDD);
    mpfr_set(re.hi_raw(), z[j].re, MPFR_RNDU);
    mpfr_set(im.lo_raw(), z[j].im, MPFR_RNDD);
    mpfr_set(im.hi_raw(), z[j].im, MPFR_RNDU);
    centers.emplace_back(re, im);
  }
  mpfr_clear(t1);
  mpfr_clear(t2);
  mpfr_clear(t3);
  for (int j = 0; j < n; ++j) {
    Interval fv = f.eval_ci(centers[j]).modulus();
    Interval dv = fd.eval_ci(centers[j]).modulus();
    if (!dv.is_positive())
      throw Error(Error::Code::precision,
                  "root certification: derivative modulus not separated");
    // dist(z, nearest root) <= n * |f(z)| / |f'(z)|.
    radius[j] = Interval::exact_si(n, prec) * fv / dv;
  }
  // Disjointness: |z_i - z_j| > r_i + r_j certified.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Interval d = (centers[i] - centers[j]).modulus();
      if (!(radius[i] + radius[j]).certainly_lt(d))
        throw Error(Error::Code::precision,
                    "root certification: inclusion disks overlap");
    }

  // Realness via Sturm counts on the disks that touch the real axis.
  QPoly sf = f;  // already squarefree
  std::vector<std::pair<mpq_class, mpq_class>> real_brackets;
  std::vector<int> bracket_owner;
  for (int j = 0; j < n; ++j) {
    RootDisk& d = disks[j];
    Interval rubI = radius[j];
    Interval imlo = centers[j].im - rubI;
    Interval imhi = centers[j].im + rubI;
    bool touches = !(imhi.is_negative() || imlo.is_positive());
    d.real = false;
    if (touches) {
      mpq_class a = (centers[j].re - rubI).lo_q();
      mpq_class b = (centers[j].re + rubI).hi_q();
      // Endpoints must not be roots for a clean Sturm count; nudge outward.
      // The pad has a positive floor so an exactly-hit root (zero-width
      // bracket) still gets a genuine interval around it.
      mpz_class denom(1);
      denom <<= std::max<long>(32, prec / 2);
      mpq_class w = (b - a) / 16 + mpq_class(mpz_class(1), denom);
      a -= w;
      b += w;
      int cnt = sturm_count(sf, a, b);
      if (cnt == 1) {
        d.real = true;
        d.real_lo = a;
        d.real_hi = b;
        real_brackets.emplace_back(a, b);
        bracket_owner.push_back(j);
      } else if (cnt > 1) {
        throw Error(Error::Code::precision,
                    "root certification: bracket holds several real roots");
      }
      // cnt == 0: a conjugate pair pinched against the axis; not real.
    }
    Interval r_re = ihull(centers[j].re - rubI, centers[j].re + rubI);
    Interval r_im = ihull(imlo, imhi);
    d.center = CInterval(r_re, r_im);
    d.modulus = d.center.modulus();
    disks[j] = d;
  }
  // Distinct real brackets must not overlap (they would double-count).
  std::sort(real_brackets.begin(), real_brackets.end());
  for (size_t i = 1; i < real_brackets.size(); ++i)
    if (real_brackets[i].first < real_brackets[i - 1].second)
      throw Error(Error::Code::precision,
                  "root certification: real brackets overlap");
  return disks;
}

QPoly min_poly_of_root(const QPoly& fin, const Interval& where) {
  QPoly f = fin.monic();
  if (!f.is_monic() || f.degree() < 1)
    throw Error(Error::Code::invalid_domain, "min_poly_of_root: bad input");
  // Work on the squarefree part: same roots, and monic integer again
  // because the squarefree part of a monic integer polynomial is monic
  // integer (gcd over Q of monic integer polys divides in Z[x]).
  QPoly sf = f.squarefree_part();
  for (const auto& c : sf.coeffs())
    if (c.get_den() != 1)
      throw Error(Error::Code::invalid_domain,
                  "min_poly_of_root expects an integer polynomial");
  int n = sf.degree();
  for (mpfr_prec_t prec = 192; prec <= 1 << 14; prec *= 2) {
    std::vector<RootDisk> roots;
    try {
      roots = certified_roots(sf, prec);
    } catch (const Error& e) {
      if (e.code == Error::Code::precision) continue;
      throw;
    }
    // Locate the target root: a real disk overlapping `where`.
    int target = -1;
    for (int j = 0; j < n; ++j) {
      if (!roots[j].real) continue;
      const Interval& re = roots[j].center.re;
      bool overlaps = !(re.certainly_lt(where) || where.certainly_lt(re));
      if (overlaps) {
        if (target != -1) { target = -2; break; }
        target = j;
      }
    }
    if (target == -2) continue;  // ambiguous at this precision
    if (target == -1)
      throw Error(Error::Code::invalid_domain,
                  "min_poly_of_root: no real root in the given range");
    // Try all subsets containing the target, smallest first; a subset forms
    // a factor iff the product of (x - root) has integer coefficients and
    // divides f exactly.
    bool ambiguous = false;
    for (int size = 1; size <= n && !ambiguous; ++size) {
      std::vector<int> idx;
      std::function<std::optional<QPoly>(int, int)> search =
          [&](int start, int need) -> std::optional<QPoly> {
        if (need == 0) {
          if (std::find(idx.begin(), idx.end(), target) == idx.end())
            return std::nullopt;
          // Multiply out (x - root_i) with interval coefficients.
          mpfr_prec_t p = prec;
          std::vector<CInterval> coef{
              CInterval::exact_si(1, 0, p)};  // leading 1
          for (int id : idx) {
            std::vector<CInterval> next(coef.size() + 1,
                                        CInterval::exact_si(0, 0, p));
            for (size_t i = 0; i < coef.size(); ++i) {
              next[i + 1] = next[i + 1] + coef[i];                    // x * c
              next[i] = next[i] - coef[i] * roots[id].center;          // -r*c
            }
            coef = std::move(next);
          }
          // coef is low-to-high; extract the unique integer from each
          // coefficient enclosure.
          std::vector<mpq_class> cand(coef.size());
          for (size_t i = 0; i < coef.size(); ++i) {
            const CInterval& ci = coef[i];
            if (!ci.im.contains_zero()) return std::nullopt;
            mpq_class lo = ci.re.lo_q(), hi = ci.re.hi_q();
            // Integers inside [lo, hi] form [ceil(lo), floor(hi)].
            mpz_class il, ih;
            mpz_cdiv_q(il.get_mpz_t(), lo.get_num().get_mpz_t(),
                       lo.get_den().get_mpz_t());
            mpz_fdiv_q(ih.get_mpz_t(), hi.get_num().get_mpz_t(),
                       hi.get_den().get_mpz_t());
            if (il > ih) return std::nullopt;  // no integer inside
            if (il < ih) { ambiguous = true; return std::nullopt; }
            cand[i] = mpq_class(il);
          }
          QPoly g(std::move(cand));
          QPoly q, r;
          QPoly::divmod(sf, g, q, r);
          if (r.is_zero()) return g;
          return std::nullopt;
        }
        for (int i = start; i <= n - need; ++i) {
          idx.push_back(i);
          auto got = search(i + 1, need - 1);
          if (got) return got;
          idx.pop_back();
        }
        return std::nullopt;
      };
      auto got = search(0, size);
      if (got) return *got;
    }
    // ambiguous: retry at higher precision
  }
  throw Error(Error::Code::precision,
              "min_poly_of_root: precision budget exhausted");
}

}  // namespace recsolve
