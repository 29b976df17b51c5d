#include "recsolve/numeration.hpp"

#include <algorithm>
#include <shared_mutex>
#include <thread>
#include <utility>

namespace recsolve {

struct NumerationSystem::Cache {
  std::vector<mpz_class> terms;
  mutable std::shared_mutex mu;
};

namespace {

// Weight of the greedy expansion of n against a materialized term prefix
// whose last entry exceeds n, bailing out once the count passes `cap`.
long greedy_weight_capped(const std::vector<mpz_class>& G, mpz_class rem,
                          long cap) {
  long w = 0;
  size_t k = G.size();
  while (rem > 0 && k-- > 0) {
    if (G[k] <= rem) {
      mpz_class q = rem / G[k];
      rem -= q * G[k];
      if (++w > cap) return w;
    }
  }
  return w;
}

}  // namespace

NumerationSystem::NumerationSystem(Recurrence base)
    : base_(std::move(base)), cache_(std::make_shared<Cache>()) {
  const size_t d = base_.coeffs.size();
  if (d == 0 || base_.initial.size() != d)
    throw Error(Error::Code::config,
                "numeration base needs coefficients c_1..c_d and seed terms "
                "G_0..G_{d-1}");
  for (const mpz_class& c : base_.coeffs)
    if (c < 0)
      throw Error(Error::Code::config,
                  "numeration base coefficients must be nonnegative");
  if (base_.coeffs.back() < 1)
    throw Error(Error::Code::config,
                "numeration base needs c_d >= 1 (order would collapse)");
  if (d == 1 && base_.coeffs[0] < 2)
    throw Error(Error::Code::config,
                "order-1 numeration base needs c_1 >= 2 to grow");
  if (base_.initial[0] != 1)
    throw Error(Error::Code::config, "numeration base requires G_0 = 1");
  for (size_t k = 1; k < d; ++k) {
    mpz_class expect = 1;
    for (size_t j = 1; j <= k; ++j)
      expect += base_.coeffs[j - 1] * base_.initial[k - j];
    if (base_.initial[k] != expect)
      throw Error(Error::Code::config,
                  "numeration base seed G_" + std::to_string(k) +
                      " must equal c_1 G_" + std::to_string(k - 1) +
                      " + ... + c_" + std::to_string(k) + " G_0 + 1");
  }
  // Seeds are strictly increasing by construction (each adds at least
  // c_k G_0 + 1 > 0 on top of c_1 G_{k-1} >= G_{k-1}); with nonnegative
  // coefficients and c_d >= 1 the computed terms then satisfy
  // G_{k+1} >= c_1 G_k + G_{k+1-d} > G_k, so the whole sequence increases.
  for (size_t k = 1; k < d; ++k)
    if (base_.initial[k] <= base_.initial[k - 1])
      throw Error(Error::Code::config,
                  "numeration base seeds must increase strictly");
  cache_->terms = base_.initial;
}

mpz_class NumerationSystem::term(long k) const {
  if (k < 0)
    throw Error(Error::Code::invalid_domain, "term index must be >= 0");
  {
    std::shared_lock<std::shared_mutex> lk(cache_->mu);
    if (static_cast<size_t>(k) < cache_->terms.size())
      return cache_->terms[k];
  }
  std::unique_lock<std::shared_mutex> lk(cache_->mu);
  auto& T = cache_->terms;
  const size_t d = base_.coeffs.size();
  while (T.size() <= static_cast<size_t>(k)) {
    mpz_class next = 0;
    for (size_t j = 1; j <= d; ++j)
      next += base_.coeffs[j - 1] * T[T.size() - j];
    T.push_back(next);
  }
  return T[k];
}

long NumerationSystem::top_index(const mpz_class& n) const {
  if (n < 1)
    throw Error(Error::Code::invalid_domain,
                "expansions are defined for n >= 1");
  std::unique_lock<std::shared_mutex> lk(cache_->mu);
  auto& T = cache_->terms;
  const size_t d = base_.coeffs.size();
  while (T.back() <= n) {
    mpz_class next = 0;
    for (size_t j = 1; j <= d; ++j)
      next += base_.coeffs[j - 1] * T[T.size() - j];
    T.push_back(next);
  }
  auto it = std::upper_bound(T.begin(), T.end(), n);
  return static_cast<long>(it - T.begin()) - 1;
}

std::vector<mpz_class> NumerationSystem::terms_prefix(long k) const {
  term(k);
  std::shared_lock<std::shared_mutex> lk(cache_->mu);
  return std::vector<mpz_class>(cache_->terms.begin(),
                                cache_->terms.begin() + k + 1);
}

long DigitExpansion::weight() const {
  long w = 0;
  for (long d : digits)
    if (d != 0) ++w;
  return w;
}

mpz_class DigitExpansion::value(const NumerationSystem& sys) const {
  mpz_class v = 0;
  for (size_t k = 0; k < digits.size(); ++k)
    if (digits[k] != 0) v += digits[k] * sys.term(static_cast<long>(k));
  return v;
}

DigitExpansion greedy_expand(const NumerationSystem& sys, const mpz_class& n) {
  long K = sys.top_index(n);  // validates n >= 1
  std::vector<mpz_class> G = sys.terms_prefix(K);
  DigitExpansion out;
  out.digits.assign(K + 1, 0);
  mpz_class rem = n;
  for (long k = K; k >= 0 && rem > 0; --k) {
    if (G[k] <= rem) {
      mpz_class q = rem / G[k];
      rem -= q * G[k];
      out.digits[k] = q.get_si();
    }
  }
  if (rem != 0)
    throw Error(Error::Code::internal, "greedy remainder did not vanish");
  return out;
}

long hamming_weight(const NumerationSystem& sys, const mpz_class& n) {
  return greedy_expand(sys, n).weight();
}

bool is_regular(const NumerationSystem& sys,
                const std::vector<long>& digits) {
  for (long d : digits)
    if (d < 0) return false;
  if (digits.empty()) return true;
  std::vector<mpz_class> G =
      sys.terms_prefix(static_cast<long>(digits.size()));
  mpz_class sum = 0;
  for (size_t K = 1; K <= digits.size(); ++K) {
    sum += digits[K - 1] * G[K - 1];
    if (sum >= G[K]) return false;
  }
  return true;
}

std::vector<mpz_class> enumerate_low_weight(const NumerationSystem& sysG,
                                            const NumerationSystem& sysH,
                                            long M, const BruteStrategy& st) {
  if (M < 2)
    throw Error(Error::Code::invalid_domain,
                "combined weight below 2 is impossible for n >= 1");
  if (st.bound < 1)
    throw Error(Error::Code::invalid_domain, "scan bound must be >= 1");
  if (st.jobs < 1)
    throw Error(Error::Code::config, "worker count must be >= 1");

  const std::vector<mpz_class> G = sysG.terms_prefix(sysG.top_index(st.bound));
  const std::vector<mpz_class> H = sysH.terms_prefix(sysH.top_index(st.bound));

  const int jobs = st.jobs;
  std::vector<std::vector<mpz_class>> found(jobs);
  mpz_class total = st.bound;
  auto run_range = [&](int slot, mpz_class lo, mpz_class hi) {
    std::vector<mpz_class>& out = found[slot];
    for (mpz_class n = lo; n <= hi; ++n) {
      long wg = greedy_weight_capped(G, n, M - 1);
      if (wg >= M) continue;
      if (wg + greedy_weight_capped(H, n, M - wg) <= M) out.push_back(n);
    }
  };

  if (jobs == 1) {
    run_range(0, 1, total);
  } else {
    std::vector<std::thread> workers;
    mpz_class chunk = total / jobs + 1;
    for (int i = 0; i < jobs; ++i) {
      mpz_class lo = 1 + chunk * i;
      mpz_class hi = std::min(mpz_class(chunk * (i + 1)), total);
      workers.emplace_back(run_range, i, lo, hi);
    }
    for (auto& w : workers) w.join();
  }

  std::vector<mpz_class> merged;
  for (auto& part : found)
    merged.insert(merged.end(), part.begin(), part.end());
  return merged;
}

std::vector<mpz_class> enumerate_low_weight(const NumerationSystem& sysG,
                                            const NumerationSystem& sysH,
                                            long M,
                                            const DigitSearchStrategy& st) {
  if (M < 2)
    throw Error(Error::Code::invalid_domain,
                "combined weight below 2 is impossible for n >= 1");
  if (st.m1_max < 1 || st.n1_max < 0)
    throw Error(Error::Code::invalid_domain,
                "sweep needs m1_max >= 1 and n1_max >= 0");
  std::vector<mpz_class> out;
  for (long m = 1; m <= st.m1_max; ++m) {
    mpz_class n = sysH.term(m);
    long t = sysG.top_index(n);
    if (t > st.n1_max) continue;
    std::vector<mpz_class> G = sysG.terms_prefix(t);
    if (1 + greedy_weight_capped(G, n, M - 1) <= M) out.push_back(n);
  }
  return out;
}

}  // namespace recsolve
