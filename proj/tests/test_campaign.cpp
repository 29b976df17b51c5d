// Tests for the inductive reduction driver: level-transition case analysis,
// grid construction with digit-regularity pruning, per-cell reduction with
// the Legendre fallback on dependent shifts, deterministic parallelism,
// and hash-chained checkpoint resume.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "recsolve/campaign.hpp"
#include "recsolve/chain.hpp"
#include "recsolve/interval.hpp"

using namespace recsolve;

namespace {

Recurrence fib_rec() { return Recurrence{{1, 1}, {1, 2}, "fibonacci"}; }
Recurrence pow2_rec() { return Recurrence{{2}, {1}, "binary"}; }
Recurrence trib_rec() { return Recurrence{{1, 1, 1}, {1, 2, 4}, "tribonacci"}; }

// Three Fibonacci terms against one power of two.
ProblemInstance zb3(long n_star) {
  return make_instance(SideSpec{fib_rec(), {1, 1, 1}},
                       SideSpec{pow2_rec(), {1}}, n_star, true);
}

// Four Fibonacci terms against one power of two.
ProblemInstance zb4(long n_star) {
  return make_instance(SideSpec{fib_rec(), {1, 1, 1, 1}},
                       SideSpec{pow2_rec(), {1}}, n_star, true);
}

mpz_class big_N() {  // 3.1 * 10^64
  mpz_class n;
  mpz_ui_pow_ui(n.get_mpz_t(), 10, 63);
  return 31 * n;
}

std::string tmp_dir() {
  static std::string dir = [] {
    std::string d = "/tmp/campaign_test_" + std::to_string(::getpid());
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
}

size_t count_kind(const std::vector<std::string>& lines, const std::string& kind) {
  size_t n = 0;
  for (const auto& l : lines) {
    // layout: seq \t hash \t kind \t ...
    size_t p1 = l.find('\t');
    size_t p2 = l.find('\t', p1 + 1);
    size_t p3 = l.find('\t', p2 + 1);
    std::string k = l.substr(p2 + 1, (p3 == std::string::npos ? l.size() : p3) - p2 - 1);
    if (k == kind) ++n;
  }
  return n;
}

template <typename F>
void check_throws_containing(F&& f, const std::string& needle) {
  bool threw = false;
  try {
    f();
  } catch (const Error& e) {
    threw = true;
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
  CHECK(threw);
}

bool summaries_equal(const LevelPairSummary& a, const LevelPairSummary& b) {
  return a.level == b.level && a.K == b.K && a.L == b.L && a.origin == b.origin &&
         a.cells == b.cells && a.skipped == b.skipped && a.via_bd == b.via_bd &&
         a.via_legendre == b.via_legendre && a.unresolved == b.unresolved &&
         a.bound == b.bound && a.n_bound == b.n_bound && a.m_bound == b.m_bound &&
         a.n_terminal == b.n_terminal && a.m_terminal == b.m_terminal;
}

void check_same_outcome(const CampaignResult& a, const CampaignResult& b) {
  CHECK(a.final_bound == b.final_bound);
  CHECK(a.n1_bound == b.n1_bound);
  CHECK(a.m1_bound == b.m1_bound);
  CHECK(a.conditional == b.conditional);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i] == b.trace[i]);
  REQUIRE(a.levels.size() == b.levels.size());
  for (size_t i = 0; i < a.levels.size(); ++i)
    CHECK(summaries_equal(a.levels[i], b.levels[i]));
}

}  // namespace

TEST_CASE("level transition case analysis on hand-traced pair configurations") {
  // Width-4 left side, width-1 right side.
  const long k = 4, ell = 1;

  // Pair past the left width: a single carry, bound preserved verbatim.
  auto s = level_successors(k, ell, 6, 2);
  REQUIRE(s.size() == 1);
  CHECK(s[0].tag == PairOrigin::CaseOneCarry);
  CHECK(s[0].K == 7);
  CHECK(s[0].L == 2);
  CHECK(s[0].carries);
  CHECK_FALSE(s[0].spawns);
  CHECK_FALSE(s[0].terminal_n);
  CHECK_FALSE(s[0].terminal_m);

  // Pair past the right width: the symmetric carry.
  s = level_successors(k, ell, 2, 4);
  REQUIRE(s.size() == 1);
  CHECK(s[0].tag == PairOrigin::CaseTwoCarry);
  CHECK(s[0].K == 2);
  CHECK(s[0].L == 5);
  CHECK(s[0].carries);

  // Width-1 right side fully collected from the start: only the n branch
  // exists, and it spawns a new n gap while K <= k.
  s = level_successors(k, ell, 2, 2);
  REQUIRE(s.size() == 1);
  CHECK(s[0].tag == PairOrigin::ThreeA);
  CHECK(s[0].K == 3);
  CHECK(s[0].L == 2);
  CHECK(s[0].spawns);
  CHECK_FALSE(s[0].terminal_n);

  // Everything collected on both sides: both branches, both terminal, and
  // the n branch is listed first (the tie rule).
  s = level_successors(k, ell, 5, 2);
  REQUIRE(s.size() == 2);
  CHECK(s[0].tag == PairOrigin::ThreeA);
  CHECK(s[0].terminal_n);
  CHECK_FALSE(s[0].spawns);
  CHECK(s[1].tag == PairOrigin::ThreeB);
  CHECK(s[1].terminal_m);
  CHECK_FALSE(s[1].spawns);

  // A 2x2-wide instance: the start pair branches both ways, both spawning.
  s = level_successors(2, 2, 2, 2);
  REQUIRE(s.size() == 2);
  CHECK(s[0].tag == PairOrigin::ThreeA);
  CHECK(s[0].spawns);
  CHECK(s[0].K == 3);
  CHECK(s[0].L == 2);
  CHECK(s[1].tag == PairOrigin::ThreeB);
  CHECK(s[1].spawns);
  CHECK(s[1].K == 2);
  CHECK(s[1].L == 3);

  // Left side collected, right tail remains: only the m branch.
  s = level_successors(2, 2, 3, 2);
  REQUIRE(s.size() == 1);
  CHECK(s[0].tag == PairOrigin::ThreeB);
  CHECK(s[0].spawns);
  CHECK_FALSE(s[0].terminal_m);

  // Right side collected, left tail remains: only the n branch.
  s = level_successors(2, 2, 2, 3);
  REQUIRE(s.size() == 1);
  CHECK(s[0].tag == PairOrigin::ThreeA);
  CHECK(s[0].spawns);

  // Both collected on the 2x2 instance.
  s = level_successors(2, 2, 3, 3);
  REQUIRE(s.size() == 2);
  CHECK(s[0].terminal_n);
  CHECK(s[1].terminal_m);
}

TEST_CASE("gap cell identity and ordering") {
  GapCell a{{3, 6, 9}, {}};
  CHECK(a.id(5, 2) == "5.2:3,6,9|");
  GapCell b{{}, {4}};
  CHECK(b.id(2, 3) == "2.3:|4");
  GapCell c{{}, {}};
  CHECK(c.id(2, 2) == "2.2:|");
  CHECK(GapCell{{2}, {}} < GapCell{{3}, {}});
  CHECK(GapCell{{2, 4}, {}} < GapCell{{2, 5}, {}});
  CHECK(GapCell{{2}, {1}} < GapCell{{2}, {2}});
  CHECK(a == GapCell{{3, 6, 9}, {}});
}

TEST_CASE("policy digest tracks result-affecting fields only") {
  CampaignPolicy p1, p2;
  p1.jobs = 1;
  p2.jobs = 7;
  p2.checkpoint_path = "/somewhere/else";
  p2.keep_grids = true;
  CHECK(p1.digest() == p2.digest());

  CampaignPolicy p3 = p1;
  p3.dependence_height = 65;
  CHECK(p3.digest() != p1.digest());

  CampaignPolicy p4 = p1;
  p4.precision_ceiling = 1 << 21;
  CHECK(p4.digest() != p1.digest());

  CampaignPolicy p5 = p1;
  p5.slice_den = 7;
  CHECK(p5.digest() != p1.digest());

  CampaignPolicy p6 = p1;
  p6.max_level = 5;
  CHECK(p6.digest() != p1.digest());
}

TEST_CASE("instance digest separates problems and starting bounds") {
  ProblemInstance i3 = zb3(3);
  ProblemInstance i4 = zb4(3);
  CHECK(instance_digest(i3, 1000) != instance_digest(i4, 1000));
  CHECK(instance_digest(i3, 1000) != instance_digest(i3, 1001));
  CHECK(instance_digest(i3, 1000) == instance_digest(zb3(3), 1000));
}

TEST_CASE("starting bound from the closed-form expansion") {
  BoundChain chain4 = derive_chain(zb4(101));
  mpz_class n5 = campaign_start_bound(chain4, 5);
  // Joint weight 5 on the four-against-one equation: order 10^64.
  mpz_class lo = 10, hi = 16;
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, 63);
  CHECK(n5 > lo * p);
  CHECK(n5 < hi * p);
  CHECK(campaign_start_bound(chain4, 4) < n5);

  BoundChain chain3 = derive_chain(zb3(101));
  mpz_class n4 = campaign_start_bound(chain3, 4);
  // Joint weight 4 on the three-against-one equation: order 10^47.
  mpz_ui_pow_ui(p.get_mpz_t(), 10, 47);
  CHECK(n4 > p);
  CHECK(n4 < 20 * p);

  CHECK_THROWS_AS(campaign_start_bound(chain3, 1), Error);
}

TEST_CASE("starting bound below the enumeration threshold short-circuits") {
  CampaignResult res = run_campaign(zb3(3), 10);
  CHECK(res.short_circuit);
  CHECK(res.final_bound == 10);
  CHECK(res.n1_bound == 10);
  CHECK(res.m1_bound == 10);
  CHECK(res.levels.empty());
  CHECK(res.trace.empty());
  CHECK_FALSE(res.conditional);

  CHECK_THROWS_AS(run_campaign(zb3(3), 0), Error);
  CHECK_THROWS_AS(run_campaign(zb3(3), -5), Error);
}

TEST_CASE("domain guards on the policy") {
  CampaignPolicy p;
  p.jobs = 0;
  CHECK_THROWS_AS(run_campaign(zb3(3), 100000, p), Error);
  p = CampaignPolicy{};
  p.slice_den = 0;
  CHECK_THROWS_AS(run_campaign(zb3(3), 100000, p), Error);
  p = CampaignPolicy{};
  p.slice_num = 0;
  CHECK_THROWS_AS(run_campaign(zb3(3), 100000, p), Error);
  p = CampaignPolicy{};
  p.slice_num = 3;
  p.slice_den = 2;  // would keep more than everything
  CHECK_THROWS_AS(run_campaign(zb3(3), 100000, p), Error);
}

// The four-against-one equation at the published starting bound, walked
// through the first two reducible levels.  The first level caps the top
// gap near 333, the second near 348, and exactly the two shift-degenerate
// cells r = 2 and r = 6 fall back to the convergent criterion with a cap
// below 345.
TEST_CASE("first two levels at the full starting bound match the published walk") {
  CampaignPolicy pol;
  pol.max_level = 5;
  pol.keep_grids = true;
  CampaignResult res = run_campaign(zb4(101), big_N(), pol);

  CHECK(res.truncated);
  CHECK(res.final_bound == big_N());
  CHECK_FALSE(res.conditional);
  REQUIRE(res.levels.size() == 2);

  const LevelPairSummary& l4 = res.levels[0];
  CHECK(l4.level == 4);
  CHECK(l4.K == 2);
  CHECK(l4.L == 2);
  CHECK(l4.origin == PairOrigin::Start);
  CHECK(l4.cells == 1);
  CHECK(l4.via_bd == 1);
  CHECK(l4.via_legendre == 0);
  // Published value 333 with a slightly sharper scale; our generic scale
  // shifts the cap by log(scale ratio)/log alpha, a handful of units.
  CHECK(l4.n_bound >= 312);
  CHECK(l4.n_bound <= 352);
  CHECK(l4.m_bound == 0);  // the right side has no tail to decay against
  CHECK_FALSE(l4.n_terminal);

  const LevelPairSummary& l5 = res.levels[1];
  CHECK(l5.level == 5);
  CHECK(l5.K == 3);
  CHECK(l5.L == 2);
  CHECK(l5.origin == PairOrigin::ThreeA);
  // One cell per admissible top gap r in [2, B2]: adjacent indices are
  // pruned by digit regularity, so r starts at 2.
  CHECK(l5.cells == l4.n_bound - 1);
  CHECK(l5.via_legendre == 2);
  CHECK(l5.via_bd == l5.cells - 2);
  CHECK(l5.unresolved == 0);
  // Published value 348 for the general cells.
  CHECK(l5.n_bound >= 318);
  CHECK(l5.n_bound <= 368);

  // The two dependent cells are exactly r = 2 and r = 6, resolved by the
  // convergent criterion with caps below the published 332-level value
  // plus scale slack.
  REQUIRE(res.exceptions.size() == 2);
  std::set<long> dep_r;
  for (const CellOutcome& c : res.exceptions) {
    CHECK(c.method == ReductionMethod::Legendre);
    CHECK(c.resolved);
    REQUIRE(c.cell.n_gaps.size() == 1);
    dep_r.insert(c.cell.n_gaps[0]);
    CHECK(c.cap >= 300);
    CHECK(c.cap <= 345);
    CHECK(c.note.find("relation") != std::string::npos);
  }
  CHECK(dep_r == std::set<long>{2, 6});

  // Bound maps were committed once per gap index.
  CHECK(res.state.Bn.at(2) == l4.n_bound);
  CHECK(res.state.Bn.at(3) == l5.n_bound);
  CHECK(res.state.Bkl.at({2, 2}) == l4.bound);
  CHECK(res.state.Bkl.at({3, 2}) == l5.bound);

  // Grid of the second level: exactly the regular top gaps 2..B2.
  const auto& g5 = res.state.grids.at({3, 2});
  REQUIRE(static_cast<long>(g5.size()) == l5.cells);
  CHECK(g5.front().n_gaps == std::vector<long>{2});
  CHECK(g5.back().n_gaps == std::vector<long>{l4.n_bound});
  for (const GapCell& c : g5) {
    REQUIRE(c.n_gaps.size() == 1);
    CHECK(c.n_gaps[0] >= 2);
    CHECK(c.m_gaps.empty());
  }

  // Trace: one line per reduced cell, tab-separated, cell id first.
  REQUIRE(res.trace.size() == static_cast<size_t>(l4.cells + l5.cells));
  CHECK(res.trace[0].substr(0, 5) == "2.2:|");
  for (const auto& line : res.trace)
    CHECK(std::count(line.begin(), line.end(), '\t') == 4);
}

// Complete run of the three-against-one equation from a small starting
// bound: three reducible levels, the last one terminal, and the final
// bound feeds enumeration.
TEST_CASE("complete small campaign walks to a terminal bound") {
  CampaignPolicy pol;
  pol.keep_grids = true;
  const mpz_class N = 100000;
  CampaignResult res = run_campaign(zb3(3), N, pol);

  CHECK_FALSE(res.short_circuit);
  CHECK_FALSE(res.truncated);
  CHECK_FALSE(res.conditional);
  REQUIRE(res.levels.size() == 3);

  CHECK(res.levels[0].K == 2);
  CHECK(res.levels[1].K == 3);
  CHECK(res.levels[2].K == 4);
  CHECK(res.levels[2].L == 2);
  CHECK(res.levels[2].n_terminal);
  CHECK(res.levels[2].m_terminal);
  CHECK_FALSE(res.levels[0].n_terminal);
  CHECK_FALSE(res.levels[1].n_terminal);

  // Terminal caps at this range: a few dozen.  The final bound is the
  // larger of the two side bounds.
  CHECK(res.n1_bound > 10);
  CHECK(res.n1_bound < 200);
  CHECK(res.m1_bound > 5);
  CHECK(res.m1_bound < 200);
  CHECK(res.final_bound == std::max(res.n1_bound, res.m1_bound));
  CHECK(res.final_bound < N);

  // Grid invariant: the terminal level's grid is exactly the set of
  // regular gap pairs consistent with the committed bounds.
  long B2 = res.state.Bn.at(2);
  long B3 = res.state.Bn.at(3);
  std::vector<GapCell> expect;
  for (long r = 2; r <= B2; ++r)
    for (long s = r + 2; s <= B3; ++s) expect.push_back(GapCell{{r, s}, {}});
  std::sort(expect.begin(), expect.end());
  const auto& g6 = res.state.grids.at({4, 2});
  REQUIRE(g6.size() == expect.size());
  for (size_t i = 0; i < g6.size(); ++i) CHECK(g6[i] == expect[i]);

  // Every reduced cell appears in the trace, in deterministic order.
  size_t total = 0;
  for (const auto& l : res.levels) total += static_cast<size_t>(l.cells);
  CHECK(res.trace.size() == total);

  // Dependent cells at the middle level: again exactly r = 2 and r = 6.
  std::set<long> dep_r;
  for (const CellOutcome& c : res.exceptions)
    if (c.K == 3 && c.method == ReductionMethod::Legendre)
      dep_r.insert(c.cell.n_gaps[0]);
  CHECK(dep_r == std::set<long>{2, 6});

  // State records the final bound.
  REQUIRE(res.state.final_bound.has_value());
  CHECK(*res.state.final_bound == res.final_bound);
}

TEST_CASE("parallel execution reproduces the sequential trace bitwise") {
  const mpz_class N = 100000;
  CampaignPolicy seq;
  seq.jobs = 1;
  CampaignPolicy par;
  par.jobs = 3;
  CampaignResult a = run_campaign(zb3(3), N, seq);
  CampaignResult b = run_campaign(zb3(3), N, par);
  CHECK(a.trace.size() > 400);  // hundreds of cells exercise the pool
  check_same_outcome(a, b);
}

TEST_CASE("slicing keeps a deterministic sample and flags the result") {
  const mpz_class N = 10000;
  CampaignResult full = run_campaign(zb3(3), N);

  CampaignPolicy pol;
  pol.slice_num = 1;
  pol.slice_den = 7;
  CampaignResult s1 = run_campaign(zb3(3), N, pol);
  CampaignResult s2 = run_campaign(zb3(3), N, pol);

  CHECK(s1.sliced);
  CHECK_FALSE(full.sliced);
  check_same_outcome(s1, s2);

  REQUIRE(s1.levels.size() == full.levels.size());
  // The entry level has a single cell, kept by every slice.
  CHECK(s1.levels[0].cells == 1);
  CHECK(s1.levels[0].skipped == 0);
  // Second level: parents identical, so kept plus skipped is the full grid.
  CHECK(s1.levels[1].cells + s1.levels[1].skipped == full.levels[1].cells);
  CHECK(s1.levels[1].cells < full.levels[1].cells);
  // Later levels extend only the kept cells: never more than the full grid.
  for (size_t i = 2; i < s1.levels.size(); ++i) {
    CHECK(s1.levels[i].cells + s1.levels[i].skipped <= full.levels[i].cells);
    CHECK(s1.levels[i].cells < full.levels[i].cells);
  }

  // Every sampled cell reproduces its outcome from the full run: sliced
  // grids are subsets, and per-cell reductions are deterministic.
  std::set<std::string> full_lines(full.trace.begin(), full.trace.end());
  for (const std::string& line : s1.trace)
    CHECK(full_lines.count(line) == 1);
}

TEST_CASE("checkpoint resume from a prefix reaches the identical result") {
  const std::string path = tmp_dir() + "/resume.ckpt";
  std::filesystem::remove(path);

  const mpz_class N = 10000;
  CampaignPolicy pol;
  pol.checkpoint_path = path;
  CampaignResult full = run_campaign(zb3(3), N, pol);
  CHECK_FALSE(full.trace.empty());

  // The finished file replays without recomputation.
  CampaignResult replay = resume_campaign(zb3(3), path, pol);
  CHECK(replay.resumed_cells == static_cast<long>(full.trace.size()));
  check_same_outcome(full, replay);

  // Truncate to a prefix: the header plus 40% of the cell records.
  std::vector<std::string> lines = read_lines(path);
  size_t cell_total = count_kind(lines, "cell");
  REQUIRE(cell_total == full.trace.size());
  size_t keep_cells = cell_total * 2 / 5;
  std::vector<std::string> prefix;
  size_t kept = 0;
  for (const auto& l : lines) {
    bool is_cell = false, is_other = false;
    {
      std::vector<std::string> one{l};
      is_cell = count_kind(one, "cell") == 1;
      is_other = count_kind(one, "hdr") + count_kind(one, "lvl") +
                     count_kind(one, "fin") ==
                 1;
    }
    if (is_cell) {
      if (kept == keep_cells) break;
      ++kept;
      prefix.push_back(l);
    } else if (is_other) {
      prefix.push_back(l);
    }
  }
  const std::string part = tmp_dir() + "/resume_prefix.ckpt";
  write_lines(part, prefix);

  Checkpoint ck = load_checkpoint(part);
  CHECK(ck.cells.size() == keep_cells);
  CHECK_FALSE(ck.final_result.has_value());

  CampaignPolicy pol2;
  pol2.checkpoint_path = part;
  CampaignResult resumed = resume_campaign(zb3(3), part, pol2);
  CHECK(resumed.resumed_cells == static_cast<long>(keep_cells));
  check_same_outcome(full, resumed);

  // After resuming, the file is complete again and replays directly.
  CampaignResult replay2 = resume_campaign(zb3(3), part, pol2);
  CHECK(replay2.resumed_cells == static_cast<long>(full.trace.size()));
  check_same_outcome(full, replay2);

  // run_campaign with a checkpoint path resumes an existing file
  // automatically instead of starting over.
  const std::string part2 = tmp_dir() + "/resume_prefix2.ckpt";
  write_lines(part2, prefix);
  CampaignPolicy pol3;
  pol3.checkpoint_path = part2;
  CampaignResult auto_resumed = run_campaign(zb3(3), N, pol3);
  CHECK(auto_resumed.resumed_cells == static_cast<long>(keep_cells));
  check_same_outcome(full, auto_resumed);
}

TEST_CASE("checkpoint guards: policy, instance, and integrity") {
  const std::string path = tmp_dir() + "/guards.ckpt";
  std::filesystem::remove(path);

  const mpz_class N = 10000;
  CampaignPolicy pol;
  pol.checkpoint_path = path;
  run_campaign(zb3(3), N, pol);

  // Changed reduction policy: refused.
  CampaignPolicy other = pol;
  other.dependence_height = 65;
  check_throws_containing([&] { resume_campaign(zb3(3), path, other); },
                          "policy digest");
  other = pol;
  other.precision_ceiling = 1 << 21;
  check_throws_containing([&] { resume_campaign(zb3(3), path, other); },
                          "policy digest");

  // Different instance or starting bound: refused.
  check_throws_containing([&] { resume_campaign(zb4(3), path, pol); },
                          "instance digest");

  // Flipping one character breaks the hash chain.
  std::vector<std::string> lines = read_lines(path);
  REQUIRE(lines.size() > 4);
  std::vector<std::string> bad = lines;
  std::string& target = bad[bad.size() / 2];
  size_t digit = target.find_last_of("0123456789");
  REQUIRE(digit != std::string::npos);
  target[digit] = target[digit] == '5' ? '6' : '5';
  const std::string bad_path = tmp_dir() + "/corrupt.ckpt";
  write_lines(bad_path, bad);
  check_throws_containing([&] { load_checkpoint(bad_path); },
                          "CorruptCheckpoint");

  // Dropping a middle record breaks the sequence numbering.
  std::vector<std::string> gappy = lines;
  gappy.erase(gappy.begin() + 2);
  const std::string gap_path = tmp_dir() + "/gappy.ckpt";
  write_lines(gap_path, gappy);
  check_throws_containing([&] { load_checkpoint(gap_path); },
                          "CorruptCheckpoint");

  // Garbage file.
  const std::string junk_path = tmp_dir() + "/junk.ckpt";
  write_lines(junk_path, {"not a checkpoint"});
  check_throws_containing([&] { load_checkpoint(junk_path); },
                          "CorruptCheckpoint");

  // Missing file.
  CHECK_THROWS_AS(load_checkpoint(tmp_dir() + "/absent.ckpt"), Error);
}

// A width-1 left side against a width-2 right side exercises the m-side
// branch: the start pair has only the m branch (the left side is already
// fully collected), and the next level is terminal on both sides.
TEST_CASE("right-side branching on a one-against-two instance") {
  ProblemInstance inst =
      make_instance(SideSpec{fib_rec(), {1}}, SideSpec{trib_rec(), {1, 1}}, 3,
                    false, mpq_class(1, 100));
  CampaignPolicy pol;
  pol.keep_grids = true;
  CampaignResult res = run_campaign(inst, 20000, pol);

  CHECK_FALSE(res.truncated);
  REQUIRE(res.levels.size() == 2);

  const LevelPairSummary& l4 = res.levels[0];
  CHECK(l4.K == 2);
  CHECK(l4.L == 2);
  CHECK(l4.cells == 1);
  CHECK(l4.n_bound == 0);  // no n branch: the left side has no tail
  CHECK(l4.m_bound > 0);
  CHECK_FALSE(l4.m_terminal);

  const LevelPairSummary& l5 = res.levels[1];
  CHECK(l5.K == 2);
  CHECK(l5.L == 3);
  CHECK(l5.origin == PairOrigin::ThreeB);
  CHECK(l5.n_terminal);
  CHECK(l5.m_terminal);

  // The right-side grid starts at gap 1: adjacent indices are admissible
  // in this digit system.
  const auto& g5 = res.state.grids.at({2, 3});
  REQUIRE(static_cast<long>(g5.size()) == l5.cells);
  CHECK(g5.front().m_gaps == std::vector<long>{1});
  CHECK(g5.back().m_gaps == std::vector<long>{l4.m_bound});
  for (const GapCell& c : g5) CHECK(c.n_gaps.empty());

  CHECK(res.final_bound == std::max(res.n1_bound, res.m1_bound));
  CHECK(res.final_bound > 0);
  CHECK(res.final_bound < 2000);
}

TEST_CASE("campaign report renders the level table and final bound") {
  CampaignResult res = run_campaign(zb3(3), 10000);
  std::string rep = res.report();
  CHECK(rep.find("final bound") != std::string::npos);
  CHECK(rep.find("4.2") != std::string::npos);
  std::ostringstream want;
  want << res.final_bound;
  CHECK(rep.find(want.str()) != std::string::npos);
}
