#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recsolve/number_field.hpp"

namespace recsolve {

// Absolute logarithmic Weil height of an algebraic number together with the
// modified height h' = max{ d*h, |log eta|, 1 } / d for the pinned ambient
// field degree d (the degree of the field generated by all numbers of the
// linear-form instance, not of the single number).
struct HeightValue {
  CReal h;
  CReal h_prime;
  int degree_used = 1;
};

// Height from the primitive integer minimal polynomial and certified
// conjugate moduli:  h = (log|a_0| + sum_j log max{|eta^(j)|, 1}) / delta.
// The one-argument form pins the ambient degree to the element's field
// degree; the two-argument form pins it explicitly.
HeightValue weil_height(const NFElem& x);
HeightValue weil_height(const NFElem& x, int ambient_degree);

// Height-inequality calculus on certified upper bounds:
//   h(a +- b)        <= h(a) + h(b) + log 2
//   h(a1 +...+ an)   <= sum h(ai) + log n
//   h(a * b^{+-1})   <= h(a) + h(b)
//   h(a^n)            = |n| h(a)
CReal height_add(const CReal& ha, const CReal& hb);
CReal height_add_n(const std::vector<CReal>& hs);
CReal height_mul(const CReal& ha, const CReal& hb);
CReal height_pow(const CReal& h, long n);

// Upper bound for the modified height from upper bounds on the plain height
// and on |log eta|:  h' <= max{ d*h_ub, logabs_ub, 1 } / d.
CReal h_prime_upper(const CReal& h_upper, const CReal& log_abs_upper, int d);

// The linear-form-in-logarithms constant
//   C(k, d) = 18 (k+1)! k^{k+1} (32 d)^{k+2} log(2 k d).
CReal bw_constant(int k, int d);

// A concrete instance of the linear form l_1 log eta_1 + ... + l_k log eta_k.
struct LinearFormInstance {
  std::vector<NFElem> etas;          // none equal to 0 or 1
  std::vector<HeightValue> heights;  // parallel to etas, ambient-degree h'
  std::vector<mpz_class> int_coeffs;
  int field_degree = 1;
  CReal L_cap;        // max{ |l_i|, e }
  mpz_class lambda_gcd;
  CReal Lambda;       // sum l_i log eta_i
  CReal Phi;          // e^Lambda - 1
};

// Assemble an instance: validates the etas (nonzero, not 1, real-positive
// embedding for the principal log), computes heights at the given ambient
// degree, the coefficient gcd, and the certified Lambda / Phi enclosures.
LinearFormInstance make_linear_form(std::vector<NFElem> etas,
                                    std::vector<mpz_class> coeffs,
                                    int field_degree);

struct BwBound {
  CReal log_lambda_lb;     // -C(k,d) h'(eta_1)...h'(eta_k) log L_cap
  CReal log_phi_lb;        // the above minus log 2
  bool phi_transfer_valid; // certified |Lambda| <= 1/2, enabling log_phi_lb
};

// Lower bound for log|Lambda|.  Requires Lambda != 0 certified (the
// enclosure excludes zero after refinement); otherwise throws with code
// `unresolved` so the caller can route to the vanishing-form branch.
BwBound bw_lower_bound(const LinearFormInstance& form);

// Lower bound for h(beta^m / alpha^n) for multiplicatively independent
// alpha, beta.  The quadratic-unit/rational-2 instance (alpha with minimal
// polynomial x^2-x-1, beta = 2) uses the direct two-case evaluation giving
// n log alpha - log 2; other pairs require a configured constant C' and
// return C' * max{|n|, |m|}.
CReal mult_indep_height_bound(const NFElem& alpha, const NFElem& beta, long n,
                              long m,
                              std::optional<mpq_class> C_prime = std::nullopt,
                              bool independence_asserted = false);

// Certified upper bound for the largest solution of x = u + v (log x)^h
// (u, v >= 0, h >= 1, v > 0):
//   max{ 2^h (u^{1/h} + v^{1/h} log(h^h v))^h,  2^h (u^{1/h} + 2 e^2)^h }.
CReal pdw_solve(const CReal& u, const CReal& v, const CReal& h);

}  // namespace recsolve
