#include "recsolve/number_field.hpp"

#include <algorithm>
#include <sstream>

namespace recsolve {

std::shared_ptr<const NumberField> NumberField::create(
    QPoly g, const Interval& real_root) {
  if (!g.is_monic() || g.degree() < 1)
    throw Error(Error::Code::invalid_domain, "field modulus must be monic");
  for (const auto& c : g.coeffs())
    if (c.get_den() != 1)
      throw Error(Error::Code::invalid_domain, "field modulus must be integral");
  auto f = std::shared_ptr<NumberField>(new NumberField());
  f->g_ = g;
  f->marked_ = real_root;
  int d = g.degree();
  // powtab_[k - d] = coordinates of theta^k for k = d .. 2d-2.
  f->powtab_.resize(std::max(0, d - 1));
  std::vector<mpq_class> cur(d);
  // theta^d = -(g - x^d)
  for (int i = 0; i < d; ++i) cur[i] = -g.coeff(i);
  for (int k = d; k <= 2 * d - 2; ++k) {
    f->powtab_[k - d] = cur;
    if (k == 2 * d - 2) break;
    // multiply by theta
    std::vector<mpq_class> nxt(d, mpq_class(0));
    for (int i = 0; i < d - 1; ++i) nxt[i + 1] = cur[i];
    if (cur[d - 1] != 0)
      for (int i = 0; i < d; ++i) nxt[i] += cur[d - 1] * -g.coeff(i);
    cur = std::move(nxt);
  }
  // Anchor the root ordering once so it stays stable.
  f->roots(192);
  return f;
}

const std::vector<RootDisk>& NumberField::roots(mpfr_prec_t prec) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (roots_prec_ >= prec && !roots_.empty()) return roots_;
  mpfr_prec_t p = std::max<mpfr_prec_t>(prec, 192);
  for (;; p *= 2) {
    if (p > (1 << 16))
      throw Error(Error::Code::precision, "field roots: precision exhausted");
    std::vector<RootDisk> rs;
    try {
      rs = certified_roots(g_, p);
    } catch (const Error& e) {
      if (e.code == Error::Code::precision) continue;
      throw;
    }
    // Put the distinguished real root first; order the rest by (real part,
    // imaginary part) of the enclosure midpoint for stability.
    int marked = -1;
    for (size_t j = 0; j < rs.size(); ++j) {
      if (!rs[j].real) continue;
      const Interval& re = rs[j].center.re;
      if (!(re.certainly_lt(marked_) || marked_.certainly_lt(re))) {
        if (marked != -1) { marked = -2; break; }
        marked = static_cast<int>(j);
      }
    }
    if (marked == -2) continue;
    if (marked == -1)
      throw Error(Error::Code::invalid_domain,
                  "field: marked real root not found");
    std::swap(rs[0], rs[marked]);
    std::sort(rs.begin() + 1, rs.end(), [](const RootDisk& a, const RootDisk& b) {
      double ar = (a.center.re.lo_d() + a.center.re.hi_d()) / 2;
      double br = (b.center.re.lo_d() + b.center.re.hi_d()) / 2;
      if (ar != br) return ar < br;
      return (a.center.im.lo_d() + a.center.im.hi_d()) / 2 <
             (b.center.im.lo_d() + b.center.im.hi_d()) / 2;
    });
    roots_ = std::move(rs);
    roots_prec_ = p;
    return roots_;
  }
}

NFElem NumberField::zero() const {
  return NFElem(shared_from_this(), std::vector<mpq_class>(degree(), 0));
}

NFElem NumberField::one() const { return from_q(1); }

NFElem NumberField::from_q(const mpq_class& q) const {
  std::vector<mpq_class> co(degree(), 0);
  co[0] = q;
  return NFElem(shared_from_this(), std::move(co));
}

NFElem NumberField::gen() const {
  std::vector<mpq_class> co(degree(), 0);
  if (degree() == 1) {
    // theta = root of x - c; theta equals the rational c.
    co[0] = -g_.coeff(0);
  } else {
    co[1] = 1;
  }
  return NFElem(shared_from_this(), std::move(co));
}

NFElem NumberField::from_coords(std::vector<mpq_class> co) const {
  co.resize(degree(), mpq_class(0));
  return NFElem(shared_from_this(), std::move(co));
}

NFElem::NFElem(std::shared_ptr<const NumberField> field,
               std::vector<mpq_class> co)
    : field_(std::move(field)), co_(std::move(co)) {
  co_.resize(field_->degree(), mpq_class(0));
}

bool NFElem::is_zero() const {
  for (const auto& c : co_)
    if (c != 0) return false;
  return true;
}

bool NFElem::is_rational() const {
  for (size_t i = 1; i < co_.size(); ++i)
    if (co_[i] != 0) return false;
  return true;
}

std::optional<mpq_class> NFElem::as_rational() const {
  if (!is_rational()) return std::nullopt;
  return co_[0];
}

NFElem operator+(const NFElem& a, const NFElem& b) {
  std::vector<mpq_class> co(a.co_);
  for (size_t i = 0; i < co.size(); ++i) co[i] += b.co_[i];
  return NFElem(a.field_, std::move(co));
}

NFElem operator-(const NFElem& a, const NFElem& b) {
  std::vector<mpq_class> co(a.co_);
  for (size_t i = 0; i < co.size(); ++i) co[i] -= b.co_[i];
  return NFElem(a.field_, std::move(co));
}

NFElem NFElem::operator-() const {
  std::vector<mpq_class> co(co_);
  for (auto& c : co) c = -c;
  return NFElem(field_, std::move(co));
}

bool NFElem::operator==(const NFElem& o) const { return co_ == o.co_; }

NFElem operator*(const NFElem& a, const NFElem& b) {
  int d = a.field_->degree();
  std::vector<mpq_class> prod(2 * d - 1, mpq_class(0));
  for (int i = 0; i < d; ++i) {
    if (a.co_[i] == 0) continue;
    for (int j = 0; j < d; ++j) {
      if (b.co_[j] == 0) continue;
      prod[i + j] += a.co_[i] * b.co_[j];
    }
  }
  std::vector<mpq_class> co(prod.begin(), prod.begin() + d);
  for (int k = d; k <= 2 * d - 2; ++k) {
    if (prod[k] == 0) continue;
    const auto& red = a.field_->powtab_[k - d];
    for (int i = 0; i < d; ++i) co[i] += prod[k] * red[i];
  }
  return NFElem(a.field_, std::move(co));
}

NFElem NFElem::inverse() const {
  if (is_zero())
    throw Error(Error::Code::invalid_domain, "inverse of zero field element");
  // Extended Euclid in Q[x]: s * a + t * g = 1  =>  a^{-1} = s mod g.
  QPoly a{std::vector<mpq_class>(co_)};
  const QPoly& g = field_->g_;
  QPoly r0 = g, r1 = a;
  QPoly s0 = QPoly::constant(0), s1 = QPoly::constant(1);
  while (!r1.is_zero()) {
    QPoly q, r;
    QPoly::divmod(r0, r1, q, r);
    QPoly s = s0 - q * s1;
    r0 = r1; r1 = r;
    s0 = s1; s1 = s;
  }
  if (r0.degree() != 0)
    throw Error(Error::Code::internal,
                "field modulus not coprime with nonzero element");
  QPoly inv = s0.scale(mpq_class(1) / r0.coeff(0));
  QPoly q, rem;
  QPoly::divmod(inv, g, q, rem);
  std::vector<mpq_class> co(rem.coeffs());
  return NFElem(field_, std::move(co));
}

NFElem operator/(const NFElem& a, const NFElem& b) { return a * b.inverse(); }

NFElem NFElem::pow(long e) const {
  if (e == 0) return field_->one();
  if (e < 0) return inverse().pow(-e);
  NFElem acc = field_->one();
  NFElem base = *this;
  unsigned long n = static_cast<unsigned long>(e);
  while (n) {
    if (n & 1) acc = acc * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return acc;
}

mpq_class NFElem::norm() const {
  // N(p(theta)) = Res_x(g, p) for monic g.
  QPoly p{std::vector<mpq_class>(co_)};
  return QPoly::resultant(field_->g_, p);
}

CInterval NFElem::embed(int j, mpfr_prec_t prec) const {
  const auto& roots = field_->roots(prec);
  QPoly p{std::vector<mpq_class>(co_)};
  return p.eval_ci(roots[j].center);
}

Interval NFElem::embed_real(mpfr_prec_t prec) const {
  const auto& roots = field_->roots(prec);
  QPoly p{std::vector<mpq_class>(co_)};
  return p.eval_i(roots[0].center.re);
}

QPoly NFElem::min_poly() const {
  // Characteristic polynomial: charpoly(y) = Res_x(g(x), y - p(x)), a power
  // of the minimal polynomial; the squarefree part is the minimal
  // polynomial itself.
  if (is_rational()) {
    return QPoly({-co_[0], mpq_class(1)});
  }
  int d = field_->degree();
  // Compute Res_x(g, y - p(x)) by evaluation at d+1 rational points y and
  // Lagrange interpolation (the resultant has degree d in y).
  std::vector<mpq_class> ys, vals;
  QPoly p{std::vector<mpq_class>(co_)};
  for (int t = 0; ys.size() < static_cast<size_t>(d + 1); ++t) {
    mpq_class y(t);
    QPoly shifted = QPoly::constant(y) - p;
    vals.push_back(QPoly::resultant(field_->g_, shifted));
    ys.push_back(y);
  }
  // Lagrange interpolation.
  QPoly acc;
  for (int i = 0; i <= d; ++i) {
    QPoly term = QPoly::constant(1);
    mpq_class denom(1);
    for (int j = 0; j <= d; ++j) {
      if (i == j) continue;
      term = term * QPoly({-ys[j], mpq_class(1)});
      denom *= ys[i] - ys[j];
    }
    acc = acc + term.scale(vals[i] / denom);
  }
  return acc.squarefree_part();
}

std::string NFElem::str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < co_.size(); ++i) {
    if (i) os << ", ";
    os << co_[i].get_str();
  }
  os << ")";
  return os.str();
}

}  // namespace recsolve

namespace recsolve {

int exact_sign(const NFElem& x) {
  if (x.is_zero()) return 0;
  if (x.is_rational()) return sgn(*x.as_rational());
  for (mpfr_prec_t p = 96; p <= (1 << 20); p *= 2) {
    Interval e = x.embed_real(p);
    if (e.is_positive()) return 1;
    if (e.is_negative()) return -1;
  }
  throw Error(Error::Code::internal,
              "sign of a nonzero field element undecided at precision ceiling");
}

NFElem exact_abs(const NFElem& x) { return exact_sign(x) < 0 ? -x : x; }

}  // namespace recsolve
