#pragma once
// Exact univariate polynomial arithmetic over Q (and Z through common
// denominators), plus certified complex root enclosures.
//
// QPoly stores coefficients low-to-high as exact rationals.  Root
// enclosures combine a Durand-Kerner iteration at MPFR precision with the
// rigorous inclusion disk  |z - root| <= deg * |f(z)| / |f'(z)|  evaluated
// in directed-rounding arithmetic: when the disks of all deg approximations
// are pairwise disjoint, each disk contains exactly one root.

#include <gmpxx.h>

#include <optional>
#include <vector>

#include "recsolve/interval.hpp"

namespace recsolve {

class QPoly {
 public:
  QPoly() = default;
  explicit QPoly(std::vector<mpq_class> coeffs);
  static QPoly from_z(const std::vector<mpz_class>& coeffs);
  static QPoly x_power(int n);  // monomial x^n
  static QPoly constant(const mpq_class& c);

  int degree() const;  // -1 for the zero polynomial
  bool is_zero() const { return degree() < 0; }
  const mpq_class& coeff(int i) const;       // 0 outside stored range
  const std::vector<mpq_class>& coeffs() const { return c_; }
  mpq_class leading() const;
  bool is_monic() const;

  friend QPoly operator+(const QPoly& a, const QPoly& b);
  friend QPoly operator-(const QPoly& a, const QPoly& b);
  friend QPoly operator*(const QPoly& a, const QPoly& b);
  QPoly operator-() const;
  QPoly scale(const mpq_class& s) const;
  bool operator==(const QPoly& o) const;

  // Division with remainder; divisor must be nonzero.
  static void divmod(const QPoly& a, const QPoly& b, QPoly& q, QPoly& r);
  // Exact division; throws Error::internal if the remainder is nonzero.
  QPoly divexact(const QPoly& b) const;

  QPoly derivative() const;
  mpq_class eval_q(const mpq_class& x) const;
  Interval eval_i(const Interval& x) const;
  CInterval eval_ci(const CInterval& x) const;

  // Monic greatest common divisor (Euclid over Q).
  static QPoly gcd(const QPoly& a, const QPoly& b);
  bool squarefree() const;
  QPoly squarefree_part() const;
  QPoly monic() const;
  // Primitive integer version: common denominator cleared, content divided
  // out, leading coefficient positive.
  std::vector<mpz_class> primitive_z() const;
  // x^deg * f(1/x), coefficient list reversed.
  QPoly reciprocal() const;
  // f(x * s) and f(x) composed with x -> x + t are not needed; substitution
  // f(c * x) with rational c:
  QPoly compose_scale(const mpq_class& s) const;

  // Resultant Res_x(a, b), exact (fraction-free Bareiss on the Sylvester
  // matrix after clearing denominators).
  static mpq_class resultant(const QPoly& a, const QPoly& b);

  std::string str() const;

 private:
  void normalize();
  std::vector<mpq_class> c_;  // c_[i] multiplies x^i
};

// m-th cyclotomic polynomial (exact, recursive division construction).
QPoly cyclotomic(unsigned m);

// Euler totient.
unsigned totient(unsigned m);

// One certified complex root enclosure.
struct RootDisk {
  CInterval center;   // enclosure of the root (half-width <= radius)
  Interval modulus;   // |root| enclosure
  bool real;          // certified real (imaginary part exactly bracketing 0)
  mpq_class real_lo, real_hi;  // rational bracket when `real`
};

// Certified enclosures of all complex roots of a squarefree polynomial.
// Radii shrink as `prec` grows; throws Error::precision if disks cannot be
// made disjoint at the requested precision (caller should retry higher).
std::vector<RootDisk> certified_roots(const QPoly& f, mpfr_prec_t prec);

// Exact real root isolation by Sturm sequences; returns disjoint rational
// intervals (lo, hi) each containing exactly one real root, refined until
// hi - lo <= tol.
std::vector<std::pair<mpq_class, mpq_class>> isolate_real_roots(
    const QPoly& f, const mpq_class& tol);

// Number of distinct real roots in (a, b] by Sturm's theorem.
int sturm_count(const QPoly& f, const mpq_class& a, const mpq_class& b);

// Rational roots of an integer polynomial (via divisor candidates of the
// trailing/leading coefficients).
std::vector<mpq_class> rational_roots(const QPoly& f);

// Minimal polynomial over Q of the root of `f` enclosed by `where`
// (monic integer `f` only: all roots are algebraic integers).  Finds the
// smallest product of root disks whose coefficients round to integers and
// divides `f` exactly; irreducibility follows from minimality.
QPoly min_poly_of_root(const QPoly& f, const Interval& where);

}  // namespace recsolve
