#pragma once
// Inductive reduction driver.  Starting from a certified finiteness bound N
// on max{n_1, m_1}, walk levels m = 4 .. k+ell+3.  Each level carries a set
// of active pairs (K, L), K + L = m, and each pair a grid of exponent-gap
// tuples; every cell yields one Baker--Davenport reduction (with a Legendre
// fallback when the cell's shift is linearly dependent on the slope).  A
// cell's cap bounds
//   min{(n_1 - n_K) log alpha, (m_1 - m_L) log beta},
// the n-side branch extending the n-gap grid (or, once every left term is
// collected, bounding n_1 itself), the m-side branch symmetric.  The driver
// ends with a bound on max{n_1, m_1} small enough for direct enumeration.
//
// Runs are deterministic: parallel execution merges cell outcomes by grid
// index and reproduces the sequential trace bitwise.  Progress is
// checkpointed as hash-chained line records; a checkpoint prefix resumes to
// the identical result, and a completed checkpoint replays without
// recomputation.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recsolve/chain.hpp"
#include "recsolve/reduction.hpp"

namespace recsolve {

// One reduction cell: the exponent gaps fixed on each side.
// n_gaps[i] = n_1 - n_{i+2} (size K-2, strictly increasing), m_gaps
// symmetric on the other side.
struct GapCell {
  std::vector<long> n_gaps;
  std::vector<long> m_gaps;

  bool operator==(const GapCell& o) const {
    return n_gaps == o.n_gaps && m_gaps == o.m_gaps;
  }
  bool operator<(const GapCell& o) const {
    if (n_gaps != o.n_gaps) return n_gaps < o.n_gaps;
    return m_gaps < o.m_gaps;
  }
  // Canonical id "K.L:r,s|g" -- also the cell's trace and checkpoint key.
  std::string id(long K, long L) const;
};

// Result of reducing one cell.
struct CellOutcome {
  long K = 0, L = 0;
  GapCell cell;
  ReductionMethod method = ReductionMethod::Failed;
  bool resolved = false;
  // Cap on min{(n_1-n_K) log alpha, (m_1-m_L) log beta} in units of the
  // branch base actually used (log alpha, or log beta when only the m side
  // remains), small-constant floor for the |Lambda| >= 1/2 branch folded in.
  long cap = 0;
  long n_candidate = 0;  // induced bound on n_1 - n_K (on n_1 when K = k+1)
  long m_candidate = 0;  // induced bound on m_1 - m_L (on m_1 when L = ell+1)
  mpz_class q_used;
  std::string detail;  // epsilon enclosure / Legendre S / failure reason
  std::string note;    // dependence relation for Legendre cells
};

// How a pair entered the active set.
enum class PairOrigin { Start, CaseOneCarry, CaseTwoCarry, ThreeA, ThreeB };

std::string to_string(PairOrigin origin);

// One successor of a pair under the level-transition case analysis.
struct LevelStep {
  PairOrigin tag = PairOrigin::ThreeA;
  long K = 0, L = 0;      // successor pair
  bool spawns = false;    // extends a grid dimension at the next level
  bool carries = false;   // pure carry: successor bound equals predecessor's
  bool terminal_n = false;  // branch bounds n_1 itself
  bool terminal_m = false;  // branch bounds m_1 itself
};

// The case analysis for a pair (K', L') on an instance with side widths
// k, ell:
//   * K' > k+1   -> single carry to (K'+1, L');
//   * L' > ell+1 -> single carry to (K', L'+1);
//   * otherwise both min-branches, n side listed first (the tie rule):
//     the n branch spawns (K'+1, L') while K' <= k and is terminal at
//     K' = k+1; the m branch symmetric.  A branch is absent when the other
//     side has no tail left to decay against (K' <= k with L' = ell+1 has
//     only the n branch, K' = k+1 with L' <= ell only the m branch; the
//     all-collected pair (k+1, ell+1) keeps both, both terminal).
std::vector<LevelStep> level_successors(long k, long ell, long Kp, long Lp);

// Per-pair summary for the campaign report.
struct LevelPairSummary {
  long level = 0, K = 0, L = 0;
  PairOrigin origin = PairOrigin::Start;
  long cells = 0;           // cells reduced (after slicing)
  long skipped = 0;         // cells dropped by slicing
  long via_bd = 0, via_legendre = 0, unresolved = 0;
  long bound = 0;           // max cap over cells
  long n_bound = 0;         // max n_candidate (0 when the branch is absent)
  long m_bound = 0;         // max m_candidate
  bool n_terminal = false, m_terminal = false;
  double seconds = 0.0;
};

struct CampaignPolicy {
  int jobs = 1;
  // Stop after this level (0 = run to completion).  Truncated runs report
  // no final bound beyond the starting N.
  long max_level = 0;
  // Hand off to enumeration instead of reducing when the starting bound is
  // already below this.
  long enumeration_threshold = 1000;
  long dependence_height = 64;
  // Keep cells with (index mod slice_den) < slice_num; the default 1/1
  // keeps everything.  Slices validate machinery on a deterministic sample;
  // a sliced bound is flagged, not certified.
  long slice_num = 1, slice_den = 1;
  // Precision ceiling for the shared continued-fraction expansion.
  mpfr_prec_t precision_ceiling = 1 << 22;
  std::string checkpoint_path;     // empty = no checkpointing
  long checkpoint_interval = 1024; // cells between mid-pair flushes
  // Retain per-pair grids in the result state (costly on big runs; meant
  // for inspection and invariant tests).
  bool keep_grids = false;

  // Digest over every result-affecting field (not jobs, not paths): a
  // checkpoint written under one digest refuses to resume under another.
  std::uint64_t digest() const;
};

// Driver state: per-index gap bounds, per-pair caps, and (optionally) the
// residual grids, exposed for inspection and invariant tests.
struct CampaignState {
  long level = 4;
  std::map<long, long> Bn;  // index K -> bound on n_1 - n_K, set once
  std::map<long, long> Bm;  // index L -> bound on m_1 - m_L, set once
  std::map<std::pair<long, long>, long> Bkl;  // pair -> cap bound
  // Populated when CampaignPolicy::keep_grids below is set.
  std::map<std::pair<long, long>, std::vector<GapCell>> grids;
  std::optional<mpz_class> final_bound;
};

struct CampaignResult {
  bool short_circuit = false;  // N already below the enumeration threshold
  bool conditional = false;    // some cell unresolved at the precision ceiling
  bool sliced = false;         // grid sampled, bound not certified
  bool truncated = false;      // stopped at max_level before completion
  mpz_class final_bound;       // on max{n_1, m_1} (= N when short-circuited
                               // or truncated)
  mpz_class n1_bound, m1_bound;
  std::vector<LevelPairSummary> levels;
  std::vector<CellOutcome> exceptions;  // Legendre and unresolved cells
  std::vector<std::string> trace;       // one line per cell, deterministic
  long resumed_cells = 0;               // outcomes replayed from a checkpoint
  double wall_seconds = 0.0;
  CampaignState state;

  std::string report() const;
};

// Parsed checkpoint: a hash-chained sequence of line records.  Any prefix
// ending on a record boundary is itself a valid checkpoint.
struct Checkpoint {
  std::uint64_t policy_digest = 0;
  std::uint64_t instance_digest = 0;
  mpz_class N;
  std::uint64_t seq_count = 0;          // records read (header included)
  std::vector<CellOutcome> cells;       // in completion order
  std::vector<LevelPairSummary> levels; // committed pair summaries
  std::optional<CampaignResult> final_result;  // set when the run completed
};

// Loads and verifies a checkpoint file: consecutive sequence numbers and an
// intact running hash chain.  Throws Error::checkpoint ("CorruptCheckpoint:
// ...") on any integrity failure.
Checkpoint load_checkpoint(const std::string& path);

// Digest of the problem instance (sides, coefficients, mode) combined with
// the starting bound; guards checkpoints against replay on a different
// problem.
std::uint64_t instance_digest(const ProblemInstance& inst, const mpz_class& N);

// Starting bound for a weight-M campaign from the Stewart-style expansion:
//   N = (two_c_eff (log(1/log alpha) + (M-1)(log(M-1) + additive)))^{M-1}
//       / log alpha,
// rounded up from a certified upper enclosure.  Requires M >= 2.
mpz_class campaign_start_bound(const BoundChain& chain, long M);

// Runs the campaign.  Short-circuits when N is below the enumeration
// threshold.  With a checkpoint path set, progress is persisted atomically
// (write-temp-then-rename) and a matching existing checkpoint is resumed
// automatically.  Throws Error::checkpoint on instance/policy digest
// mismatches against an existing checkpoint.
CampaignResult run_campaign(const ProblemInstance& inst, const mpz_class& N,
                            const CampaignPolicy& policy = {});

// Resumes explicitly from a checkpoint file: verifies integrity and the
// instance/policy digests, replays recorded cell outcomes, and computes
// only what is missing.  A completed checkpoint returns the recorded result
// without recomputation.
CampaignResult resume_campaign(const ProblemInstance& inst,
                               const std::string& checkpoint_path,
                               const CampaignPolicy& policy = {});

}  // namespace recsolve
