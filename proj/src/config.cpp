#include "recsolve/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace recsolve {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& msg) {
  throw Error(Error::Code::config, origin + ": " + path + ": " + msg);
}

// Byte offset -> "line:column" for parse errors.
std::string line_col(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

class Schema {
 public:
  Schema(const std::string& origin) : origin_(origin) {}

  void reject_unknown(const json& j, const std::string& path,
                      const std::set<std::string>& known) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!known.count(it.key()))
        fail(origin_, path + "." + it.key(), "unknown key");
  }

  const json& require(const json& j, const std::string& path,
                      const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(origin_, path, std::string("missing key '") + key + "'");
    return *it;
  }

  std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(origin_, path, "expected a string");
    return j.get<std::string>();
  }

  bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(origin_, path, "expected true or false");
    return j.get<bool>();
  }

  long get_long(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<long>();
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      errno = 0;
      char* end = nullptr;
      long v = std::strtol(s.c_str(), &end, 10);
      if (errno != 0 || end == nullptr || *end != '\0' || s.empty())
        fail(origin_, path, "expected an integer, got '" + s + "'");
      return v;
    }
    fail(origin_, path, "expected an integer (number or decimal string)");
  }

  // Exact integers: canonically decimal strings; small integral JSON
  // numbers are accepted for convenience.
  mpz_class get_mpz(const json& j, const std::string& path) {
    if (j.is_number_integer()) return mpz_class(j.get<long>());
    if (j.is_string()) {
      try {
        return mpz_class(j.get<std::string>());
      } catch (const std::exception&) {
        fail(origin_, path,
             "expected a decimal integer string, got '" +
                 j.get<std::string>() + "'");
      }
    }
    fail(origin_, path, "expected a decimal integer string");
  }

  mpq_class get_mpq(const json& j, const std::string& path) {
    if (!j.is_string())
      fail(origin_, path, "expected a rational string \"p\" or \"p/q\"");
    const std::string s = j.get<std::string>();
    mpq_class q;
    try {
      q = mpq_class(s);
    } catch (const std::exception&) {
      fail(origin_, path, "cannot parse rational '" + s + "'");
    }
    if (q.get_den() == 0) fail(origin_, path, "zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  }

  std::vector<mpz_class> get_mpz_array(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
      fail(origin_, path, "expected a non-empty array of integers");
    std::vector<mpz_class> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i)
      out.push_back(get_mpz(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  Recurrence get_recurrence(const json& j, const std::string& path) {
    if (!j.is_object()) fail(origin_, path, "expected an object");
    reject_unknown(j, path, {"coefficients", "initial", "label"});
    Recurrence rec;
    rec.coeffs = get_mpz_array(require(j, path, "coefficients"),
                               path + ".coefficients");
    rec.initial = get_mpz_array(require(j, path, "initial"), path + ".initial");
    if (rec.coeffs.size() != rec.initial.size())
      fail(origin_, path,
           "coefficient and initial-term lists must have equal length");
    if (auto it = j.find("label"); it != j.end())
      rec.name = get_string(*it, path + ".label");
    return rec;
  }

  void get_side(const json& j, const std::string& path, Recurrence& rec,
                std::vector<mpz_class>& coeffs) {
    if (!j.is_object()) fail(origin_, path, "expected an object");
    reject_unknown(j, path, {"recurrence", "coefficients", "weight"});
    rec = get_recurrence(require(j, path, "recurrence"), path + ".recurrence");
    const bool has_co = j.contains("coefficients");
    const bool has_w = j.contains("weight");
    if (has_co == has_w)
      fail(origin_, path, "give exactly one of 'coefficients' or 'weight'");
    if (has_co) {
      coeffs = get_mpz_array(j["coefficients"], path + ".coefficients");
      for (size_t i = 0; i < coeffs.size(); ++i)
        if (coeffs[i] == 0)
          fail(origin_, path + ".coefficients[" + std::to_string(i) + "]",
               "coefficients must be nonzero");
    } else {
      long w = get_long(j["weight"], path + ".weight");
      if (w < 1) fail(origin_, path + ".weight", "weight must be >= 1");
      coeffs.assign(static_cast<size_t>(w), mpz_class(1));
    }
  }

  void get_campaign(const json& j, const std::string& path,
                    CampaignPolicy& pol) {
    if (!j.is_object()) fail(origin_, path, "expected an object");
    reject_unknown(j, path,
                   {"jobs", "max_level", "enumeration_threshold",
                    "dependence_height", "slice", "checkpoint",
                    "checkpoint_interval", "keep_grids"});
    if (auto it = j.find("jobs"); it != j.end()) {
      long v = get_long(*it, path + ".jobs");
      if (v < 1) fail(origin_, path + ".jobs", "jobs must be >= 1");
      pol.jobs = static_cast<int>(v);
    }
    if (auto it = j.find("max_level"); it != j.end()) {
      long v = get_long(*it, path + ".max_level");
      if (v < 0) fail(origin_, path + ".max_level", "max_level must be >= 0");
      pol.max_level = v;
    }
    if (auto it = j.find("enumeration_threshold"); it != j.end()) {
      long v = get_long(*it, path + ".enumeration_threshold");
      if (v < 0)
        fail(origin_, path + ".enumeration_threshold", "must be >= 0");
      pol.enumeration_threshold = v;
    }
    if (auto it = j.find("dependence_height"); it != j.end()) {
      long v = get_long(*it, path + ".dependence_height");
      if (v < 1 || v > 1000)
        fail(origin_, path + ".dependence_height", "must be in [1, 1000]");
      pol.dependence_height = v;
    }
    if (auto it = j.find("slice"); it != j.end()) {
      const std::string p = path + ".slice";
      const std::string s = get_string(*it, p);
      size_t pos = s.find('/');
      if (pos == std::string::npos)
        fail(origin_, p, "expected \"num/den\", got '" + s + "'");
      long num = 0, den = 0;
      try {
        num = std::stol(s.substr(0, pos));
        den = std::stol(s.substr(pos + 1));
      } catch (const std::exception&) {
        fail(origin_, p, "expected \"num/den\", got '" + s + "'");
      }
      if (num < 1 || den < 1 || num > den)
        fail(origin_, p, "slice must satisfy 1 <= num <= den");
      pol.slice_num = num;
      pol.slice_den = den;
    }
    if (auto it = j.find("checkpoint"); it != j.end())
      pol.checkpoint_path = get_string(*it, path + ".checkpoint");
    if (auto it = j.find("checkpoint_interval"); it != j.end()) {
      long v = get_long(*it, path + ".checkpoint_interval");
      if (v < 1)
        fail(origin_, path + ".checkpoint_interval", "must be >= 1");
      pol.checkpoint_interval = v;
    }
    if (auto it = j.find("keep_grids"); it != j.end())
      pol.keep_grids = get_bool(*it, path + ".keep_grids");
  }

 private:
  const std::string& origin_;
};

}  // namespace

ProblemInstance ProblemConfig::instance() const {
  return make_instance(left(), right(), n_star, weighted, c_prime);
}

ProblemConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Error::Code::config,
                origin + ":" + line_col(text, e.byte > 0 ? e.byte - 1 : 0) +
                    ": " + e.what());
  }
  if (!j.is_object())
    throw Error(Error::Code::config,
                origin + ": top level must be an object");

  Schema s(origin);
  ProblemConfig cfg;
  cfg.source = origin;
  const std::string top = "$";
  s.reject_unknown(j, top,
                   {"version", "label", "left", "right", "n_star", "weighted",
                    "c_prime", "start_bound", "joint_weight", "precision",
                    "campaign", "out"});

  cfg.version = s.get_long(s.require(j, top, "version"), top + ".version");
  if (cfg.version != 1)
    fail(origin, top + ".version",
         "unsupported schema version " + std::to_string(cfg.version));

  if (auto it = j.find("label"); it != j.end())
    cfg.label = s.get_string(*it, top + ".label");

  s.get_side(s.require(j, top, "left"), top + ".left", cfg.left_rec,
             cfg.left_coefficients);
  s.get_side(s.require(j, top, "right"), top + ".right", cfg.right_rec,
             cfg.right_coefficients);

  if (auto it = j.find("n_star"); it != j.end()) {
    cfg.n_star = s.get_long(*it, top + ".n_star");
    if (cfg.n_star < 1) fail(origin, top + ".n_star", "must be >= 1");
  }
  if (auto it = j.find("weighted"); it != j.end())
    cfg.weighted = s.get_bool(*it, top + ".weighted");
  if (auto it = j.find("c_prime"); it != j.end()) {
    mpq_class q = s.get_mpq(*it, top + ".c_prime");
    if (q <= 0) fail(origin, top + ".c_prime", "must be positive");
    cfg.c_prime = q;
  }
  if (auto it = j.find("start_bound"); it != j.end()) {
    mpz_class n = s.get_mpz(*it, top + ".start_bound");
    if (n < 1) fail(origin, top + ".start_bound", "must be >= 1");
    cfg.start_bound = n;
  }
  if (auto it = j.find("joint_weight"); it != j.end()) {
    cfg.joint_weight = s.get_long(*it, top + ".joint_weight");
    if (cfg.joint_weight < 2)
      fail(origin, top + ".joint_weight", "must be >= 2");
    if (cfg.joint_weight != cfg.k() + cfg.ell())
      fail(origin, top + ".joint_weight",
           "declared weight " + std::to_string(cfg.joint_weight) +
               " does not match the tuple widths k + ell = " +
               std::to_string(cfg.k() + cfg.ell()));
  }
  if (auto it = j.find("precision"); it != j.end()) {
    long p = s.get_long(*it, top + ".precision");
    if (p < 64) fail(origin, top + ".precision", "must be >= 64 bits");
    cfg.campaign.precision_ceiling = static_cast<mpfr_prec_t>(p);
  }
  if (auto it = j.find("campaign"); it != j.end())
    s.get_campaign(*it, top + ".campaign", cfg.campaign);
  if (auto it = j.find("out"); it != j.end())
    cfg.out_dir = s.get_string(*it, top + ".out");

  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Error::Code::config, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace recsolve
