#pragma once
// Integer linear recurrence sequences U_{n+d} = c_1 U_{n+d-1} + ... + c_d U_n,
// their terms, and certified spectral data: characteristic roots, the
// dominant root alpha with its exact minimal polynomial and number field,
// the exact leading Binet coefficient u (so that U_n = u alpha^n + tail),
// and a certified bound C1 with |U_n - u alpha^n| <= C1 * |alpha_2|^n.

#include <gmpxx.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recsolve/interval.hpp"
#include "recsolve/number_field.hpp"
#include "recsolve/poly.hpp"

namespace recsolve {

struct Recurrence {
  std::vector<mpz_class> coeffs;   // c_1 .. c_d (c_d nonzero)
  std::vector<mpz_class> initial;  // U_0 .. U_{d-1}
  std::string name;

  int order() const { return static_cast<int>(coeffs.size()); }
  // Characteristic polynomial x^d - c_1 x^{d-1} - ... - c_d.
  QPoly char_poly() const;
  // n-th term by exact iteration (n >= 0).
  mpz_class term(long n) const;
  // Terms U_0..U_n as a vector.
  std::vector<mpz_class> terms_upto(long n) const;
};

// Result of the simplicity / degeneracy screen.
struct Admissibility {
  bool simple = false;          // characteristic polynomial squarefree
  bool non_degenerate = false;  // no ratio of distinct roots is a root of unity
  // When degenerate: the order of the root of unity and a short description
  // of the witness ratio.
  std::optional<unsigned> degeneracy_order;
  std::string degeneracy_ratio;  // e.g. "-1" or "primitive 3rd root of unity"
};

Admissibility check_admissible(const Recurrence& rec);

// Certified spectral data of a simple, non-degenerate recurrence with a
// dominant root alpha > 1.
struct Spectral {
  int order = 0;
  QPoly charpoly;
  QPoly alpha_min_poly;
  std::shared_ptr<const NumberField> field;  // Q(alpha), marked root = alpha
  NFElem alpha;                              // generator as field element
  NFElem u;                                  // leading Binet coefficient
  CReal alpha_r;        // refinable enclosure of alpha
  CReal alpha2_mod;     // refinable enclosure of |alpha_2| (1/2 when d = 1)
  CReal c1_tail;        // refinable upper bound with
                        // |U_n - u alpha^n| <= c1_tail * alpha2_mod^n  (n>=0)
  CReal u_abs;          // |u| enclosure
  // Sign condition flags established during analysis.
  bool alpha_gt_one = false;

  // Convenience: enclosure of log(alpha) at precision p.
  Interval log_alpha(mpfr_prec_t p) const { return alpha_r.at(p).log(); }
};

// Throws Error::invalid_domain if the recurrence is not simple, is
// degenerate, lacks a unique dominant root, or the dominant root is not a
// real number greater than 1.
Spectral spectral_analyze(const Recurrence& rec);

}  // namespace recsolve
