#pragma once
// Versioned problem configuration: one JSON document describing the two
// recurrences, the coefficient tuples on each side (explicit, or by weight
// for all-ones digit instances), the analytic knobs, and the campaign
// policy.  Exact integers travel as decimal strings so nothing is rounded
// through floating point.  Syntax errors are reported with line:column
// positions, schema errors with the offending key path; both throw
// Error(config).

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "recsolve/campaign.hpp"
#include "recsolve/chain.hpp"
#include "recsolve/dominance.hpp"
#include "recsolve/recurrence.hpp"

namespace recsolve {

struct ProblemConfig {
  long version = 1;
  std::string label;

  Recurrence left_rec, right_rec;
  std::vector<mpz_class> left_coefficients, right_coefficients;

  // Index from which the growth/height normalizations are certified.
  long n_star = 3;
  // Weighted equation form (coefficient heights folded into the linear
  // form's constant) versus the plain form.
  bool weighted = false;
  // Right-side comparison constant for the generic (non-exactly-derived)
  // multiplicative-independence route; required only for such instances.
  std::optional<mpq_class> c_prime;
  // Explicit starting bound N; when absent the closed-form expansion at
  // M = joint weight supplies it.
  std::optional<mpz_class> start_bound;
  // Declared joint weight M; 0 means k + ell.  When tuples are explicit it
  // must agree with k + ell.
  long joint_weight = 0;

  CampaignPolicy campaign;
  std::string out_dir;
  std::string source;  // origin label used in error messages

  long k() const { return static_cast<long>(left_coefficients.size()); }
  long ell() const { return static_cast<long>(right_coefficients.size()); }
  long M() const { return joint_weight > 0 ? joint_weight : k() + ell(); }

  SideSpec left() const { return SideSpec(left_rec, left_coefficients); }
  SideSpec right() const { return SideSpec(right_rec, right_coefficients); }

  // Assemble the analyzed instance (spectral data, dominance certificates,
  // growth constants); propagates the underlying certification errors.
  ProblemInstance instance() const;
};

// Parse a JSON document against the v1 schema.
ProblemConfig parse_config(const std::string& text,
                           const std::string& origin = "config");

// Read and parse a configuration file.
ProblemConfig load_config(const std::string& path);

}  // namespace recsolve
