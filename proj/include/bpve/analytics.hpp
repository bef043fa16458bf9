#pragma once

#include <cstdint>
#include <vector>

#include "bpve/environment.hpp"

namespace bpve {

// Prefix table of the partial-sum functional
//
//   D(n) = 1 + sum_{j=1}^{n} m_j ... m_n,   D(0) = 1,
//
// built by the recursion D(n+1) = 1 + m_{n+1} D(n), together with the
// cumulative quantities every closed form below needs.  D(n) can grow
// geometrically, so log D(n) is carried alongside the direct value and all
// probability outputs switch to the log representation once the direct value
// passes 1e300.
//
// Immutable after construction; every query is a pure function.
class DTable {
 public:
  DTable(const Environment& env, std::int64_t n_max);

  std::int64_t horizon() const { return n_max_; }
  const Environment& env() const { return env_; }

  // D(n).  +inf once the direct representation has overflowed.
  double d(std::int64_t n) const;

  // log D(n); always finite.
  double log_d(std::int64_t n) const;

  // Segment value D(k,n) = 1 + sum_{j=k}^{n} m_j ... m_n, computed through
  // the product identity D(k,n) = D(n) * (1 - prod_{j=k-1}^{n} (1 - 1/D(j))).
  // Requires 1 <= k <= n <= horizon.
  double d_segment(std::int64_t k, std::int64_t n) const;
  double log_d_segment(std::int64_t k, std::int64_t n) const;

  // P(Z_n = 0) = 1/D(n).
  double prob_zero(std::int64_t n) const;

  // P(Z_n = 0 | Z_k = 0) = 1/D(k+1, n), the restart-at-k+1 convention that
  // makes the regeneration factorizations below exact.  Requires
  // 0 <= k <= n <= horizon.
  double prob_zero_given(std::int64_t k, std::int64_t n) const;

  // P(n is a k-strong regeneration time)
  //   = (prod_{i=1}^{k-1} p_{n+i}) / D(n).
  // Requires n >= 1, k >= 1, n + k - 1 <= horizon.
  double prob_regen_k(std::int64_t n, std::int64_t k) const;

  // Joint probability that both n and l are k-strong regeneration times,
  // defined for l >= n + k:
  //   [prod p_{n+i} / D(n)] * [prod p_{l+i} / D(n+k, l)],  i = 1..k-1.
  // Requires l + k - 1 <= horizon.
  double prob_pair_regen_k(std::int64_t n, std::int64_t l, std::int64_t k) const;

  // E #{ t in [0,n] : Z_t = 0 } = sum_{t=0}^{n} 1/D(t).
  double expected_regen_count(std::int64_t n) const;

  // F_n(s) = E s^{Z_n} = 1 / (1 + (D(n) - 1)(1 - s)), s in [0,1].
  double pgf_f(std::int64_t n, double s) const;

  // Survival probability at time n of the companion process without
  // immigration started from one individual:
  //   1 / (1 + sum_{j=1}^{n} m_1^{-1} ... m_j^{-1}).
  double extinction_tail(std::int64_t n) const;

  // log(m_1 ... m_n); 0 for n = 0.
  double log_mean_product(std::int64_t n) const;

  // sum_{i=1}^{n} m_1^{-1} ... m_i^{-1}; 0 for n = 0.
  double inv_mean_product_sum(std::int64_t n) const;

 private:
  void check_n(std::int64_t n) const;
  // log prod_{j=j_from}^{j_to} (1 - 1/D(j)); requires 1 <= j_from.
  double log_survival_product(std::int64_t j_from, std::int64_t j_to) const;

  Environment env_;
  std::int64_t n_max_;
  std::vector<double> d_;            // direct D(n), +inf after overflow
  std::vector<double> log_d_;        // log D(n)
  std::vector<double> inv_cumsum_;   // sum_{t=0}^{n} 1/D(t)
  std::vector<double> cumlog_m_;     // sum_{i=1}^{n} log m_i
  std::vector<double> inv_prod_;     // sum_{i=1}^{n} (m_1...m_i)^{-1}
};

// Convenience free function mirroring the table constructor.
inline DTable build_dtable(const Environment& env, std::int64_t n_max) {
  return DTable(env, n_max);
}

// Closed-form segment generating function
//
//   f_{k,n}(s) = (1 + sum_{j=k+1}^{n} m_j...m_n (1-s))
//              / (1 + sum_{j=k}^{n}   m_j...m_n (1-s)),
//
// equal to the iterated composition f_k(f_{k+1}(...f_n(s))).  Direct O(n-k)
// evaluation intended for moderate windows; requires 1 <= k <= n and
// s in [0,1].
double pgf_f_segment(const Environment& env, std::int64_t k, std::int64_t n, double s);

}  // namespace bpve
