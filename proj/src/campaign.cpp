#include "recsolve/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "cr_util.hpp"
#include "recsolve/numeration.hpp"

namespace recsolve {

using namespace crutil;

namespace {

// ---------------------------------------------------------------------------
// Hash chain (FNV-1a) and record formatting helpers.

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv_update(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string join_csv(const std::vector<long>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string gap_field(const std::vector<long>& v) {
  return v.empty() ? std::string("-") : join_csv(v);
}

// Strips characters that would break the line-record format.
std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  if (s.empty()) s = "-";
  return s;
}

[[noreturn]] void corrupt(const std::string& why) {
  throw Error(Error::Code::checkpoint, "CorruptCheckpoint: " + why);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

long parse_long(const std::string& s) {
  if (s.empty()) corrupt("empty numeric field");
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || end == nullptr || *end != '\0')
    corrupt("bad numeric field '" + s + "'");
  return v;
}

mpz_class parse_mpz(const std::string& s) {
  if (s.empty()) corrupt("empty integer field");
  try {
    return mpz_class(s);
  } catch (const std::exception&) {
    corrupt("bad integer field '" + s + "'");
  }
}

std::vector<long> parse_gaps(const std::string& s) {
  std::vector<long> out;
  if (s == "-" || s.empty()) return out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(',', start);
    std::string tok =
        pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start);
    out.push_back(parse_long(tok));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

char method_letter(ReductionMethod m) {
  switch (m) {
    case ReductionMethod::BakerDavenport: return 'B';
    case ReductionMethod::Legendre: return 'L';
    default: return 'F';
  }
}

ReductionMethod method_from(const std::string& s) {
  if (s == "B") return ReductionMethod::BakerDavenport;
  if (s == "L") return ReductionMethod::Legendre;
  if (s == "F") return ReductionMethod::Failed;
  corrupt("bad method field '" + s + "'");
}

// Record payloads (everything after "<seq>\t<hash>\t").

std::string cell_payload(const CellOutcome& c) {
  std::string s = "cell";
  s += '\t'; s += std::to_string(c.K);
  s += '\t'; s += std::to_string(c.L);
  s += '\t'; s += gap_field(c.cell.n_gaps);
  s += '\t'; s += gap_field(c.cell.m_gaps);
  s += '\t'; s += method_letter(c.method);
  s += '\t'; s += c.resolved ? '1' : '0';
  s += '\t'; s += std::to_string(c.cap);
  s += '\t'; s += std::to_string(c.n_candidate);
  s += '\t'; s += std::to_string(c.m_candidate);
  s += '\t'; s += c.q_used.get_str();
  s += '\t'; s += sanitize(c.detail);
  s += '\t'; s += sanitize(c.note);
  return s;
}

CellOutcome parse_cell(const std::vector<std::string>& f) {
  // f = fields of the whole line: seq, hash, "cell", 12 payload fields.
  if (f.size() != 15) corrupt("cell record has wrong field count");
  CellOutcome c;
  c.K = parse_long(f[3]);
  c.L = parse_long(f[4]);
  c.cell.n_gaps = parse_gaps(f[5]);
  c.cell.m_gaps = parse_gaps(f[6]);
  c.method = method_from(f[7]);
  if (f[8] != "0" && f[8] != "1") corrupt("bad resolved flag");
  c.resolved = f[8] == "1";
  c.cap = parse_long(f[9]);
  c.n_candidate = parse_long(f[10]);
  c.m_candidate = parse_long(f[11]);
  c.q_used = parse_mpz(f[12]);
  c.detail = f[13];
  c.note = f[14] == "-" ? std::string() : f[14];
  return c;
}

std::string lvl_payload(const LevelPairSummary& l) {
  std::string s = "lvl";
  s += '\t'; s += std::to_string(l.level);
  s += '\t'; s += std::to_string(l.K);
  s += '\t'; s += std::to_string(l.L);
  s += '\t'; s += std::to_string(static_cast<int>(l.origin));
  s += '\t'; s += std::to_string(l.cells);
  s += '\t'; s += std::to_string(l.skipped);
  s += '\t'; s += std::to_string(l.via_bd);
  s += '\t'; s += std::to_string(l.via_legendre);
  s += '\t'; s += std::to_string(l.unresolved);
  s += '\t'; s += std::to_string(l.bound);
  s += '\t'; s += std::to_string(l.n_bound);
  s += '\t'; s += std::to_string(l.m_bound);
  s += '\t'; s += l.n_terminal ? '1' : '0';
  s += '\t'; s += l.m_terminal ? '1' : '0';
  return s;
}

LevelPairSummary parse_lvl(const std::vector<std::string>& f) {
  if (f.size() != 17) corrupt("lvl record has wrong field count");
  LevelPairSummary l;
  l.level = parse_long(f[3]);
  l.K = parse_long(f[4]);
  l.L = parse_long(f[5]);
  long o = parse_long(f[6]);
  if (o < 0 || o > 4) corrupt("bad origin field");
  l.origin = static_cast<PairOrigin>(o);
  l.cells = parse_long(f[7]);
  l.skipped = parse_long(f[8]);
  l.via_bd = parse_long(f[9]);
  l.via_legendre = parse_long(f[10]);
  l.unresolved = parse_long(f[11]);
  l.bound = parse_long(f[12]);
  l.n_bound = parse_long(f[13]);
  l.m_bound = parse_long(f[14]);
  l.n_terminal = f[15] == "1";
  l.m_terminal = f[16] == "1";
  return l;
}

// Atomic line-record writer: keeps the whole record sequence in memory and
// rewrites the file (temp + rename) on each flush, so any on-disk state is a
// valid record-boundary prefix of the run.
class RecordWriter {
 public:
  void configure(std::string path) { path_ = std::move(path); }
  bool active() const { return !path_.empty(); }

  void append(const std::string& payload) {
    if (!active()) return;
    hash_ = fnv_update(hash_, std::to_string(seq_) + "|" + payload);
    lines_.push_back(std::to_string(seq_) + "\t" + hex16(hash_) + "\t" + payload);
    ++seq_;
    ++dirty_;
  }

  void maybe_flush(long interval) {
    if (active() && dirty_ >= interval) flush();
  }

  void flush() {
    if (!active() || dirty_ == 0) return;
    const std::string tmp = path_ + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      for (const auto& l : lines_) out << l << '\n';
      out.close();
      if (!out)
        throw Error(Error::Code::checkpoint,
                    "cannot write checkpoint file: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_, ec);
    if (ec)
      throw Error(Error::Code::checkpoint,
                  "cannot move checkpoint into place: " + path_);
    dirty_ = 0;
  }

 private:
  std::string path_;
  std::vector<std::string> lines_;
  std::uint64_t hash_ = kFnvOffset;
  std::uint64_t seq_ = 0;
  long dirty_ = 0;
};

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

NFElem nf_const(const std::shared_ptr<const NumberField>& f,
                const mpq_class& q) {
  std::vector<mpq_class> co(static_cast<size_t>(f->degree()), mpq_class(0));
  co[0] = q;
  return NFElem(f, co);
}

// Smallest admissible gap between consecutive exponent indices on one side.
// For an all-ones coefficient side whose recurrence is a valid digit base,
// digit regularity prunes the grid: the gap must keep a two-index pattern
// regular (Fibonacci-like bases exclude adjacent indices).  Otherwise only
// strict index decrease is known, gap 1.
long side_min_gap(const SideSpec& side) {
  for (const mpz_class& c : side.coefficients)
    if (c != 1) return 1;
  try {
    NumerationSystem sys(side.rec);
    const long T = 40;
    for (long g = 1; g <= 8; ++g) {
      std::vector<long> digits(static_cast<size_t>(T + 1), 0);
      digits[static_cast<size_t>(T)] = 1;
      digits[static_cast<size_t>(T - g)] = 1;
      if (is_regular(sys, digits)) return g;
    }
  } catch (const Error&) {
    // Not a digit base: no pruning beyond distinctness.
  }
  return 1;
}

struct PairRes {
  long n_bound = 0, m_bound = 0, bound = 0;
  std::vector<GapCell> kept;
};

}  // namespace

// ---------------------------------------------------------------------------
// Public helpers.

std::string GapCell::id(long K, long L) const {
  return std::to_string(K) + "." + std::to_string(L) + ":" + join_csv(n_gaps) +
         "|" + join_csv(m_gaps);
}

std::string to_string(PairOrigin origin) {
  switch (origin) {
    case PairOrigin::Start: return "start";
    case PairOrigin::CaseOneCarry: return "carry-left";
    case PairOrigin::CaseTwoCarry: return "carry-right";
    case PairOrigin::ThreeA: return "extend-left";
    case PairOrigin::ThreeB: return "extend-right";
  }
  return "?";
}

std::vector<LevelStep> level_successors(long k, long ell, long Kp, long Lp) {
  if (k < 1 || ell < 1 || Kp < 2 || Lp < 2)
    throw Error(Error::Code::invalid_domain,
                "level_successors: need k, ell >= 1 and K, L >= 2");
  if (Kp > k + 1) {
    LevelStep s;
    s.tag = PairOrigin::CaseOneCarry;
    s.K = Kp + 1;
    s.L = Lp;
    s.carries = true;
    return {s};
  }
  if (Lp > ell + 1) {
    LevelStep s;
    s.tag = PairOrigin::CaseTwoCarry;
    s.K = Kp;
    s.L = Lp + 1;
    s.carries = true;
    return {s};
  }
  std::vector<LevelStep> out;
  // The n branch decays against the uncollected left tail; it is absent
  // exactly when the left side is fully collected (K' = k+1) while the
  // right still has real terms to supply the decay (L' <= ell) -- there the
  // left residue folds into the m branch's constant.  Symmetric for m.
  const bool n_present = Kp <= k || Lp == ell + 1;
  const bool m_present = Lp <= ell || Kp == k + 1;
  if (n_present) {
    LevelStep s;
    s.tag = PairOrigin::ThreeA;
    s.K = Kp + 1;
    s.L = Lp;
    if (Kp <= k)
      s.spawns = true;
    else
      s.terminal_n = true;
    out.push_back(s);
  }
  if (m_present) {
    LevelStep s;
    s.tag = PairOrigin::ThreeB;
    s.K = Kp;
    s.L = Lp + 1;
    if (Lp <= ell)
      s.spawns = true;
    else
      s.terminal_m = true;
    out.push_back(s);
  }
  return out;
}

std::uint64_t CampaignPolicy::digest() const {
  std::uint64_t h = kFnvOffset;
  h = fnv_update(h, "campaign-policy-v1");
  h = fnv_update(h, "|" + std::to_string(max_level));
  h = fnv_update(h, "|" + std::to_string(enumeration_threshold));
  h = fnv_update(h, "|" + std::to_string(dependence_height));
  h = fnv_update(h, "|" + std::to_string(slice_num) + "/" +
                        std::to_string(slice_den));
  h = fnv_update(h, "|" + std::to_string(static_cast<long>(precision_ceiling)));
  return h;
}

std::uint64_t instance_digest(const ProblemInstance& inst, const mpz_class& N) {
  std::uint64_t h = kFnvOffset;
  h = fnv_update(h, "campaign-instance-v1");
  auto add_side = [&h](const SideSpec& s) {
    h = fnv_update(h, "|rec");
    for (const mpz_class& c : s.rec.coeffs) h = fnv_update(h, "," + c.get_str());
    h = fnv_update(h, "|init");
    for (const mpz_class& c : s.rec.initial)
      h = fnv_update(h, "," + c.get_str());
    h = fnv_update(h, "|co");
    for (const mpz_class& c : s.coefficients)
      h = fnv_update(h, "," + c.get_str());
  };
  add_side(inst.left);
  h = fnv_update(h, "|vs");
  add_side(inst.right);
  h = fnv_update(h, "|ns" + std::to_string(inst.n_star));
  h = fnv_update(h, inst.weighted ? "|w1" : "|w0");
  if (inst.c_prime_cfg)
    h = fnv_update(h, "|cp" + inst.c_prime_cfg->get_str());
  h = fnv_update(h, "|N" + N.get_str());
  return h;
}

mpz_class campaign_start_bound(const BoundChain& chain, long M) {
  if (M < 2)
    throw Error(Error::Code::invalid_domain,
                "campaign_start_bound: joint weight M must be >= 2");
  StewartExpansion se = stewart_bound(chain, M);
  const CReal& la = chain.growth.log_alpha;
  CReal inner = (cr_si(1) / la).log() +
                cr_si(M - 1) * (cr_si(M - 1).log() + se.log_c_eff_additive);
  CReal val = cr_pow_si(se.two_c_eff * inner, M - 1) / la;
  Interval iv = val.at(512);
  mpq_class hi = iv.hi_q();
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), hi.get_num().get_mpz_t(),
             hi.get_den().get_mpz_t());
  return fl + 1;
}

// ---------------------------------------------------------------------------
// Checkpoint loading.

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) corrupt("cannot open '" + path + "'");
  Checkpoint ck;
  std::uint64_t hash = kFnvOffset;
  std::string line;
  std::uint64_t idx = 0;
  bool have_hdr = false;
  bool have_fin = false;
  while (std::getline(in, line)) {
    std::vector<std::string> f = split_tabs(line);
    if (f.size() < 3) corrupt("short record at line " + std::to_string(idx));
    if (f[0] != std::to_string(idx))
      corrupt("sequence break at line " + std::to_string(idx));
    size_t p1 = line.find('\t');
    size_t p2 = line.find('\t', p1 + 1);
    const std::string payload = line.substr(p2 + 1);
    hash = fnv_update(hash, std::to_string(idx) + "|" + payload);
    if (f[1] != hex16(hash))
      corrupt("hash chain break at line " + std::to_string(idx));
    const std::string& kind = f[2];
    if (kind == "hdr") {
      if (have_hdr || idx != 0) corrupt("duplicate or misplaced header");
      if (f.size() != 7 || f[3] != "v1")
        corrupt("missing or unsupported header");
      try {
        ck.policy_digest = std::stoull(f[4], nullptr, 16);
        ck.instance_digest = std::stoull(f[5], nullptr, 16);
      } catch (const std::exception&) {
        corrupt("bad digest field");
      }
      ck.N = parse_mpz(f[6]);
      have_hdr = true;
    } else if (idx == 0) {
      corrupt("missing or unsupported header");
    } else if (have_fin) {
      corrupt("records after the final record");
    } else if (kind == "cell") {
      ck.cells.push_back(parse_cell(f));
    } else if (kind == "lvl") {
      ck.levels.push_back(parse_lvl(f));
    } else if (kind == "fin") {
      if (f.size() != 8) corrupt("fin record has wrong field count");
      CampaignResult r;
      r.final_bound = parse_mpz(f[3]);
      r.n1_bound = parse_mpz(f[4]);
      r.m1_bound = parse_mpz(f[5]);
      r.conditional = f[6] == "1";
      r.sliced = f[7] == "1";
      ck.final_result = std::move(r);
      have_fin = true;
    } else {
      corrupt("unknown record kind '" + kind + "'");
    }
    ++idx;
  }
  if (!have_hdr) corrupt("empty file");
  ck.seq_count = idx;
  return ck;
}

namespace {

std::string hdr_payload(std::uint64_t policy, std::uint64_t instance,
                        const mpz_class& N) {
  return "hdr\tv1\t" + hex16(policy) + "\t" + hex16(instance) + "\t" +
         N.get_str();
}

}  // namespace

// ---------------------------------------------------------------------------
// The campaign engine.

namespace {

using Key = std::pair<long, long>;

struct Engine {
  const ProblemInstance& inst;
  CampaignPolicy pol;
  mpz_class N;
  BoundChain chain;
  long k, ell;

  CReal log_alpha, log_beta, tau;
  CReal alpha_r, beta_r, u_abs, v_abs;
  CReal A_base, A_step;  // linear-form scales: first level / later levels
  std::unique_ptr<ContinuedFraction> cf;
  long min_gap_n = 1, min_gap_m = 1;

  // Exact-witness ingredients (available when the right side is order 1
  // with a rational dominant root, so both logs live over one field).
  bool witness_ok = false;
  mpq_class base_q, v_rat;

  std::map<std::pair<long, int>, long> floor_caps;
  std::mutex floor_mu;

  std::map<std::string, CellOutcome> memo;
  RecordWriter writer;

  CampaignResult res;
  std::map<Key, PairRes> done;
  std::vector<long> n_terminals, m_terminals;

  Engine(const ProblemInstance& i, const CampaignPolicy& p, mpz_class n)
      : inst(i), pol(p), N(std::move(n)), chain(derive_chain(i)),
        k(i.k()), ell(i.ell()) {
    log_alpha = chain.growth.log_alpha;
    log_beta = chain.growth.log_beta;
    tau = log_alpha / log_beta;
    alpha_r = inst.spec_left.alpha_r;
    beta_r = inst.spec_right.alpha_r;
    u_abs = inst.spec_left.u_abs;
    v_abs = inst.spec_right.u_abs;
    // |e^Lambda - 1| < 2 C B^{-x} gives |Lambda| < 4 C B^{-x} once the
    // right side is below 1/2; dividing by log beta matches the slope
    // normalization of the reduction inequality.
    A_base = cr_si(4) * chain.c("C11") / log_beta;
    A_step = cr_si(4) * chain.c("C20") / log_beta;
    cf = std::make_unique<ContinuedFraction>(tau, pol.precision_ceiling);
    min_gap_n = side_min_gap(inst.left);
    min_gap_m = side_min_gap(inst.right);
    if (inst.spec_right.order == 1) {
      auto b = inst.spec_right.alpha.as_rational();
      auto v = inst.spec_right.u.as_rational();
      if (b && v && *b > 1 && *v != 0) {
        witness_ok = true;
        base_q = *b;
        v_rat = *v;
      }
    }
  }

  // ---- constants -----------------------------------------------------

  const CReal& level_scale(long level) const {
    return level == 4 ? A_base : A_step;
  }

  // Floor for the cap: once x exceeds log(4C)/log(base) the linear-form
  // passage above is valid; smaller x is admitted outright.
  long floor_cap(long level, bool m_only) {
    std::lock_guard<std::mutex> lock(floor_mu);
    auto key = std::make_pair(level == 4 ? 4L : 5L, m_only ? 1 : 0);
    auto it = floor_caps.find(key);
    if (it != floor_caps.end()) return it->second;
    const CReal& C = level_scale(key.first) ;
    // level_scale already folds the 4/log beta factor; rebuild 4C from it.
    CReal fourC = C * log_beta;
    CReal denom = m_only ? log_beta : log_alpha;
    long v = std::max(floor_of_upper((fourC.log() / denom).at(320),
                                     "campaign floor cap"),
                      0L);
    floor_caps.emplace(key, v);
    return v;
  }

  long cap_to_m_gap(long cap) {
    CReal v = cr_si(cap + 1) * log_alpha / log_beta;
    return std::max(floor_of_upper(v.at(320), "campaign gap conversion"), 0L);
  }

  long m_from_n(long n) {
    CReal v = ((chain.growth.C6pp / chain.growth.C5pp).log() +
               cr_si(n) * log_alpha) /
              log_beta;
    return std::max(floor_of_upper(v.at(320), "campaign growth conversion"),
                    1L);
  }

  long n_from_m(long m) {
    CReal v = ((chain.growth.C6p / chain.growth.C5p).log() +
               cr_si(m) * log_beta) /
              log_alpha;
    return std::max(floor_of_upper(v.at(320), "campaign growth conversion"),
                    1L);
  }

  // ---- per-cell reduction ---------------------------------------------

  CReal cell_gamma(const GapCell& cell) const {
    CReal SU = cr_z(inst.left.coefficients[0]);
    for (size_t i = 0; i < cell.n_gaps.size(); ++i)
      SU = SU + cr_z(inst.left.coefficients[i + 1]) *
                    cr_pow_si(alpha_r, -cell.n_gaps[i]);
    CReal SV = cr_z(inst.right.coefficients[0]);
    for (size_t i = 0; i < cell.m_gaps.size(); ++i)
      SV = SV + cr_z(inst.right.coefficients[i + 1]) *
                    cr_pow_si(beta_r, -cell.m_gaps[i]);
    return (u_abs * cr_abs(SU)) / (v_abs * cr_abs(SV));
  }

  std::optional<LogWitness> make_witness(const GapCell& cell) const {
    if (!witness_ok) return std::nullopt;
    const auto& field = inst.spec_left.field;
    NFElem su = nf_const(field, mpq_class(inst.left.coefficients[0]));
    for (size_t i = 0; i < cell.n_gaps.size(); ++i)
      su = su + nf_const(field, mpq_class(inst.left.coefficients[i + 1])) *
                    inst.spec_left.alpha.pow(-cell.n_gaps[i]);
    mpq_class sv = mpq_class(inst.right.coefficients[0]);
    for (size_t i = 0; i < cell.m_gaps.size(); ++i)
      sv += mpq_class(inst.right.coefficients[i + 1]) *
            pow_q(base_q, -cell.m_gaps[i]);
    sv *= v_rat;
    if (sv == 0) return std::nullopt;
    NFElem y = inst.spec_left.u * su * nf_const(field, 1 / sv);
    int sgn = exact_sign(y);
    if (sgn == 0) return std::nullopt;
    if (sgn < 0) y = -y;
    return LogWitness{inst.spec_left.alpha, y, base_q};
  }

  CellOutcome reduce_cell(long level, long K, long L, const GapCell& cell,
                          bool n_tail, bool m_tail) {
    CellOutcome out;
    out.K = K;
    out.L = L;
    out.cell = cell;
    const bool m_only = !n_tail;
    CReal A = level_scale(level);
    CReal B = m_only ? beta_r : alpha_r;
    CReal mu;
    try {
      mu = cell_gamma(cell).log() / log_beta;
      ReductionProblem prob{tau, mu, A, B, N};
      ReductionOutcome ro = bd_reduce(*cf, prob);
      out.method = ReductionMethod::BakerDavenport;
      out.resolved = true;
      out.cap = ro.new_k_bound;
      out.q_used = ro.q_used;
      char buf[40];
      std::snprintf(buf, sizeof buf, "eps>=%.6g",
                    ro.epsilon ? ro.epsilon->at(128).lo_d() : 0.0);
      out.detail = buf;
    } catch (const Error& e) {
      if (e.code == Error::Code::unresolved &&
          std::string(e.what()).find("DependenceSuspected") !=
              std::string::npos) {
        resolve_dependent(cell, mu, A, B, out);
      } else if (e.code == Error::Code::precision ||
                 e.code == Error::Code::unresolved ||
                 e.code == Error::Code::invalid_domain) {
        out.method = ReductionMethod::Failed;
        out.resolved = false;
        out.detail = sanitize(e.what());
      } else {
        throw;
      }
    }
    if (out.resolved) {
      out.cap = std::max(out.cap, floor_cap(level, m_only));
      if (out.cap < 0) out.cap = 0;
      if (m_only) {
        out.m_candidate = out.cap;
      } else {
        out.n_candidate = out.cap;
        if (m_tail) out.m_candidate = cap_to_m_gap(out.cap);
      }
    }
    return out;
  }

  void resolve_dependent(const GapCell& cell, const CReal& mu, const CReal& A,
                         const CReal& B, CellOutcome& out) {
    try {
      auto rel = detect_dependence(tau, mu, pol.dependence_height,
                                   make_witness(cell));
      if (!rel) {
        out.method = ReductionMethod::Failed;
        out.resolved = false;
        out.detail = "dependence suspected, no relation at height " +
                     std::to_string(pol.dependence_height);
        return;
      }
      const mpz_class& a = (*rel)[0];
      const mpz_class& b = (*rel)[1];
      const mpz_class& c = (*rel)[2];
      if (c == 0) {
        out.method = ReductionMethod::Failed;
        out.resolved = false;
        out.detail = "degenerate relation with zero shift coefficient";
        return;
      }
      mpz_class cabs = abs(c);
      CReal A_prime = cr_z(cabs) * A;
      mpz_class N_prime = cabs * N + abs(a);
      ReductionOutcome ro = legendre_reduce(*cf, rel, A_prime, B, N_prime);
      out.method = ReductionMethod::Legendre;
      out.resolved = true;
      out.cap = ro.new_k_bound;
      out.q_used = ro.q_used;
      out.detail = "S=" + ro.S.get_str();
      out.note = "relation " + a.get_str() + "," + b.get_str() + "," +
                 c.get_str();
    } catch (const Error& e) {
      out.method = ReductionMethod::Failed;
      out.resolved = false;
      out.detail = sanitize(e.what());
    }
  }

  // ---- grid construction ----------------------------------------------

  std::vector<GapCell> build_grid(long level, long K, long L) {
    if (level == 4) return {GapCell{}};
    std::set<GapCell> s;
    auto extend_n = [&](const PairRes& parent) {
      for (const GapCell& cell : parent.kept) {
        long lo = cell.n_gaps.empty() ? min_gap_n
                                      : cell.n_gaps.back() + min_gap_n;
        for (long r = lo; r <= parent.n_bound; ++r) {
          GapCell e = cell;
          e.n_gaps.push_back(r);
          s.insert(std::move(e));
        }
      }
    };
    auto extend_m = [&](const PairRes& parent) {
      for (const GapCell& cell : parent.kept) {
        long lo = cell.m_gaps.empty() ? min_gap_m
                                      : cell.m_gaps.back() + min_gap_m;
        for (long g = lo; g <= parent.m_bound; ++g) {
          GapCell e = cell;
          e.m_gaps.push_back(g);
          s.insert(std::move(e));
        }
      }
    };
    if (auto it = done.find({K - 1, L}); it != done.end()) {
      for (const LevelStep& st : level_successors(k, ell, K - 1, L))
        if (st.spawns && st.tag == PairOrigin::ThreeA && st.K == K && st.L == L)
          extend_n(it->second);
    }
    if (auto it = done.find({K, L - 1}); it != done.end()) {
      for (const LevelStep& st : level_successors(k, ell, K, L - 1))
        if (st.spawns && st.tag == PairOrigin::ThreeB && st.K == K && st.L == L)
          extend_m(it->second);
    }
    return std::vector<GapCell>(s.begin(), s.end());
  }

  // ---- pair processing --------------------------------------------------

  void process_pair(long level, long K, long L, PairOrigin origin) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<GapCell> grid = build_grid(level, K, L);

    LevelPairSummary sum;
    sum.level = level;
    sum.K = K;
    sum.L = L;
    sum.origin = origin;

    std::vector<GapCell> kept;
    kept.reserve(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
      if (static_cast<long>(i % static_cast<size_t>(pol.slice_den)) <
          pol.slice_num)
        kept.push_back(grid[i]);
      else
        ++sum.skipped;
    }
    sum.cells = static_cast<long>(kept.size());

    std::vector<LevelStep> steps = level_successors(k, ell, K, L);
    bool n_tail = false, m_tail = false;
    for (const LevelStep& st : steps) {
      if (st.tag == PairOrigin::ThreeA) n_tail = true;
      if (st.tag == PairOrigin::ThreeB) m_tail = true;
      if (st.terminal_n) sum.n_terminal = true;
      if (st.terminal_m) sum.m_terminal = true;
    }

    // Replay recorded outcomes; compute the rest (in parallel if asked).
    std::vector<CellOutcome> outs(kept.size());
    std::vector<char> have(kept.size(), 0);
    std::vector<size_t> todo;
    for (size_t i = 0; i < kept.size(); ++i) {
      auto it = memo.find(kept[i].id(K, L));
      if (it != memo.end()) {
        outs[i] = it->second;
        have[i] = 1;
        ++res.resumed_cells;
      } else {
        todo.push_back(i);
      }
    }
    const int jobs =
        static_cast<int>(std::min<size_t>(todo.size(),
                                          static_cast<size_t>(pol.jobs)));
    if (jobs <= 1) {
      for (size_t i : todo) {
        outs[i] = reduce_cell(level, K, L, kept[i], n_tail, m_tail);
        // Mid-pair persistence keeps long sequential pairs resumable.
        writer_append_cell(outs[i]);
        have[i] = 2;
      }
    } else {
      std::atomic<size_t> next{0};
      std::exception_ptr ep;
      std::mutex ep_mu;
      auto work = [&] {
        while (true) {
          size_t t = next.fetch_add(1);
          if (t >= todo.size()) break;
          size_t i = todo[t];
          try {
            outs[i] = reduce_cell(level, K, L, kept[i], n_tail, m_tail);
          } catch (...) {
            std::lock_guard<std::mutex> lock(ep_mu);
            if (!ep) ep = std::current_exception();
            break;
          }
        }
      };
      std::vector<std::thread> pool;
      for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
      for (auto& th : pool) th.join();
      if (ep) std::rethrow_exception(ep);
    }

    // Commit outcomes in grid order: trace, checkpoint, summary.
    PairRes pr;
    for (size_t i = 0; i < kept.size(); ++i) {
      const CellOutcome& o = outs[i];
      if (have[i] != 2) writer_append_cell(o);  // replayed or parallel cells
      res.trace.push_back(trace_line(o));
      if (o.resolved) {
        if (o.method == ReductionMethod::BakerDavenport)
          ++sum.via_bd;
        else
          ++sum.via_legendre;
        sum.bound = std::max(sum.bound, o.cap);
        pr.n_bound = std::max(pr.n_bound, o.n_candidate);
        pr.m_bound = std::max(pr.m_bound, o.m_candidate);
      } else {
        ++sum.unresolved;
        res.conditional = true;
      }
      if (o.method == ReductionMethod::Legendre || !o.resolved)
        res.exceptions.push_back(o);
    }
    sum.n_bound = pr.n_bound;
    sum.m_bound = pr.m_bound;
    pr.bound = sum.bound;
    pr.kept = std::move(kept);

    sum.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();

    // Global maps: committed once, at the first pair bounding the index.
    for (const LevelStep& st : steps) {
      if (st.tag == PairOrigin::ThreeA && st.spawns)
        res.state.Bn.emplace(K, pr.n_bound);
      if (st.tag == PairOrigin::ThreeB && st.spawns)
        res.state.Bm.emplace(L, pr.m_bound);
      if (st.terminal_n) n_terminals.push_back(pr.n_bound);
      if (st.terminal_m) m_terminals.push_back(pr.m_bound);
    }
    res.state.Bkl[{K, L}] = sum.bound;
    if (pol.keep_grids) res.state.grids[{K, L}] = pr.kept;

    writer.append(lvl_payload(sum));
    writer.flush();
    res.levels.push_back(sum);
    done[{K, L}] = std::move(pr);
  }

  void writer_append_cell(const CellOutcome& o) {
    writer.append(cell_payload(o));
    writer.maybe_flush(pol.checkpoint_interval);
  }

  static std::string trace_line(const CellOutcome& o) {
    std::string s = o.cell.id(o.K, o.L);
    s += '\t';
    s += method_letter(o.method);
    s += '\t';
    s += o.q_used.get_str();
    s += '\t';
    s += sanitize(o.detail);
    s += '\t';
    s += std::to_string(o.cap);
    return s;
  }

  // ---- the level walk ---------------------------------------------------

  void run() {
    auto t0 = std::chrono::steady_clock::now();
    writer.append(hdr_payload(pol.digest(), instance_digest(inst, N), N));
    writer.flush();

    std::map<Key, PairOrigin> current;
    current[{2, 2}] = PairOrigin::Start;
    bool cut = false;
    long level = 4;
    for (; level <= k + ell + 2 && !current.empty(); ++level) {
      if (pol.max_level > 0 && level > pol.max_level) {
        cut = true;
        break;
      }
      // Left-extension pairs first (descending K): the tie rule, visible
      // in the trace order.
      std::map<Key, PairOrigin> next;
      for (auto it = current.rbegin(); it != current.rend(); ++it) {
        process_pair(level, it->first.first, it->first.second, it->second);
        for (const LevelStep& st : level_successors(k, ell, it->first.first,
                                                    it->first.second)) {
          if (!st.spawns) continue;
          auto [pos, inserted] = next.emplace(Key{st.K, st.L}, st.tag);
          if (!inserted && st.tag == PairOrigin::ThreeA)
            pos->second = st.tag;  // prefer the left extension label
        }
      }
      current = std::move(next);
    }

    if (cut) {
      res.truncated = true;
      res.final_bound = N;
      res.n1_bound = N;
      res.m1_bound = N;
      res.state.level = level;
    } else {
      long n1 = 1, m1 = 1;
      for (long t : n_terminals) n1 = std::max(n1, t);
      for (long t : m_terminals) n1 = std::max(n1, n_from_m(t));
      n1 = std::max({n1, chain.growth.n_threshold, inst.n_star});
      for (long t : m_terminals) m1 = std::max(m1, t);
      m1 = std::max(m1, m_from_n(n1));
      res.n1_bound = n1;
      res.m1_bound = m1;
      res.final_bound = std::max(n1, m1);
      res.state.level = k + ell + 3;
      res.state.final_bound = res.final_bound;
      std::string fin = "fin";
      fin += '\t'; fin += res.final_bound.get_str();
      fin += '\t'; fin += res.n1_bound.get_str();
      fin += '\t'; fin += res.m1_bound.get_str();
      fin += '\t'; fin += res.conditional ? '1' : '0';
      fin += '\t'; fin += res.sliced ? '1' : '0';
      writer.append(fin);
      writer.flush();
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  }
};

void validate_policy(const CampaignPolicy& pol) {
  if (pol.jobs < 1)
    throw Error(Error::Code::config, "campaign: jobs must be >= 1");
  if (pol.slice_den < 1 || pol.slice_num < 1 || pol.slice_num > pol.slice_den)
    throw Error(Error::Code::config,
                "campaign: slice must satisfy 1 <= num <= den");
  if (pol.checkpoint_interval < 1)
    throw Error(Error::Code::config,
                "campaign: checkpoint interval must be >= 1");
  if (pol.max_level < 0)
    throw Error(Error::Code::config, "campaign: max_level must be >= 0");
}

CampaignResult run_engine(const ProblemInstance& inst, const mpz_class& N,
                          const CampaignPolicy& pol,
                          std::map<std::string, CellOutcome> memo) {
  Engine eng(inst, pol, N);
  eng.res.sliced = pol.slice_num < pol.slice_den;
  eng.memo = std::move(memo);
  eng.writer.configure(pol.checkpoint_path);
  eng.run();
  return std::move(eng.res);
}

std::map<std::string, CellOutcome> memo_from(const Checkpoint& ck) {
  std::map<std::string, CellOutcome> m;
  for (const CellOutcome& c : ck.cells) m[c.cell.id(c.K, c.L)] = c;
  return m;
}

void check_digests(const Checkpoint& ck, const ProblemInstance& inst,
                   const CampaignPolicy& pol) {
  if (ck.policy_digest != pol.digest())
    throw Error(Error::Code::checkpoint,
                "policy digest mismatch: checkpoint was written under a "
                "different campaign policy");
  if (ck.instance_digest != instance_digest(inst, ck.N))
    throw Error(Error::Code::checkpoint,
                "instance digest mismatch: checkpoint belongs to a different "
                "problem or starting bound");
}

}  // namespace

CampaignResult run_campaign(const ProblemInstance& inst, const mpz_class& N,
                            const CampaignPolicy& policy) {
  validate_policy(policy);
  if (N < 1)
    throw Error(Error::Code::invalid_domain,
                "campaign: starting bound must be >= 1");
  if (N <= policy.enumeration_threshold) {
    CampaignResult res;
    res.short_circuit = true;
    res.final_bound = N;
    res.n1_bound = N;
    res.m1_bound = N;
    res.state.final_bound = N;
    return res;
  }
  std::map<std::string, CellOutcome> memo;
  if (!policy.checkpoint_path.empty() &&
      std::filesystem::exists(policy.checkpoint_path)) {
    Checkpoint ck = load_checkpoint(policy.checkpoint_path);
    check_digests(ck, inst, policy);
    if (ck.N != N)
      throw Error(Error::Code::checkpoint,
                  "instance digest mismatch: checkpoint starting bound "
                  "differs");
    memo = memo_from(ck);
  }
  return run_engine(inst, N, policy, std::move(memo));
}

CampaignResult resume_campaign(const ProblemInstance& inst,
                               const std::string& checkpoint_path,
                               const CampaignPolicy& policy) {
  validate_policy(policy);
  Checkpoint ck = load_checkpoint(checkpoint_path);
  check_digests(ck, inst, policy);
  CampaignPolicy pol = policy;
  pol.checkpoint_path = checkpoint_path;
  return run_engine(inst, ck.N, pol, memo_from(ck));
}

std::string CampaignResult::report() const {
  std::ostringstream os;
  if (short_circuit) {
    os << "campaign: starting bound " << final_bound
       << " already below the enumeration threshold\n";
    return os.str();
  }
  for (const LevelPairSummary& l : levels) {
    os << "level " << l.level << " pair " << l.K << "." << l.L << " ["
       << to_string(l.origin) << "] cells=" << l.cells;
    if (l.skipped) os << " skipped=" << l.skipped;
    os << " bd=" << l.via_bd << " legendre=" << l.via_legendre;
    if (l.unresolved) os << " unresolved=" << l.unresolved;
    os << " cap=" << l.bound;
    if (l.n_bound)
      os << (l.n_terminal ? " n1<=" : " ngap<=") << l.n_bound;
    if (l.m_bound)
      os << (l.m_terminal ? " m1<=" : " mgap<=") << l.m_bound;
    char buf[32];
    std::snprintf(buf, sizeof buf, " (%.2fs)", l.seconds);
    os << buf << "\n";
  }
  if (truncated) {
    os << "campaign: truncated at level cut; final bound " << final_bound
       << " (unchanged starting bound)\n";
  } else {
    os << "campaign: final bound " << final_bound << " (n1 <= " << n1_bound
       << ", m1 <= " << m1_bound << ")";
    if (conditional) os << " [conditional: unresolved cells]";
    if (sliced) os << " [sliced: not a certified bound]";
    os << "\n";
  }
  if (resumed_cells) os << "resumed cells: " << resumed_cells << "\n";
  return os.str();
}

}  // namespace recsolve
