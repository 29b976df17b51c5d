#pragma once
// Exact arithmetic in a number field Q(theta) presented as Q[x]/(g) for a
// monic irreducible integer polynomial g, together with certified embedding
// data (enclosures of the conjugates of theta) so that field elements can
// be evaluated numerically with rigorous error bounds.

#include <gmpxx.h>

#include <memory>
#include <optional>
#include <vector>

#include "recsolve/interval.hpp"
#include "recsolve/poly.hpp"

namespace recsolve {

class NumberField;

// Element of Q(theta) in the power basis 1, theta, ..., theta^(deg-1).
class NFElem {
 public:
  NFElem() = default;
  NFElem(std::shared_ptr<const NumberField> field, std::vector<mpq_class> co);

  const std::vector<mpq_class>& coords() const { return co_; }
  const NumberField& field() const { return *field_; }
  std::shared_ptr<const NumberField> field_ptr() const { return field_; }

  bool is_zero() const;
  bool is_rational() const;
  std::optional<mpq_class> as_rational() const;

  friend NFElem operator+(const NFElem& a, const NFElem& b);
  friend NFElem operator-(const NFElem& a, const NFElem& b);
  friend NFElem operator*(const NFElem& a, const NFElem& b);
  friend NFElem operator/(const NFElem& a, const NFElem& b);
  NFElem operator-() const;
  bool operator==(const NFElem& o) const;

  NFElem inverse() const;       // throws invalid_domain on zero
  NFElem pow(long e) const;     // negative e allowed for nonzero elements

  // Field norm N(a) = product of all embeddings, exact.
  mpq_class norm() const;
  // Image under the j-th embedding of theta (order as in the field's root
  // list), as a complex enclosure at the requested precision.
  CInterval embed(int j, mpfr_prec_t prec) const;
  // Image under the distinguished real embedding (the field's marked root).
  Interval embed_real(mpfr_prec_t prec) const;

  // Minimal polynomial of this element over Q, monic.
  QPoly min_poly() const;

  std::string str() const;

 private:
  std::shared_ptr<const NumberField> field_;
  std::vector<mpq_class> co_;
};

class NumberField : public std::enable_shared_from_this<NumberField> {
 public:
  // g must be monic irreducible with integer coefficients.  `real_root`
  // selects the distinguished embedding: the real root of g inside that
  // interval.  Irreducibility is the caller's responsibility (min-poly
  // construction guarantees it in this library).
  static std::shared_ptr<const NumberField> create(QPoly g,
                                                   const Interval& real_root);

  const QPoly& modulus() const { return g_; }
  int degree() const { return g_.degree(); }

  NFElem zero() const;
  NFElem one() const;
  NFElem from_q(const mpq_class& q) const;
  NFElem gen() const;  // theta
  NFElem from_coords(std::vector<mpq_class> co) const;

  // Certified enclosures of all roots of g at >= prec, consistent ordering
  // across calls (index 0 is the distinguished real root).
  const std::vector<RootDisk>& roots(mpfr_prec_t prec) const;

 private:
  friend class NFElem;
  friend NFElem operator*(const NFElem& a, const NFElem& b);
  NumberField() = default;
  QPoly g_;
  Interval marked_;
  mutable std::mutex mu_;
  mutable std::vector<RootDisk> roots_;
  mutable mpfr_prec_t roots_prec_ = 0;
  // reduction of x^k mod g for k = deg .. 2 deg - 2
  std::vector<std::vector<mpq_class>> powtab_;
};

// Sign of an element under the marked real embedding, decided rigorously:
// exact zero test first, then precision escalation (terminates for any
// nonzero element).  Returns -1, 0, or +1.
int exact_sign(const NFElem& x);

// |x| under the marked real embedding, as an exact field element.
NFElem exact_abs(const NFElem& x);

}  // namespace recsolve
