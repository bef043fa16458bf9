#include "bpve/analytics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bpve {

namespace {

constexpr double kDirectLimit = 1e300;

// Kahan-compensated accumulator for the long cumulative sums.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

DTable::DTable(const Environment& env, std::int64_t n_max) : env_(env), n_max_(n_max) {
  if (n_max < 0) {
    throw std::invalid_argument("DTable horizon must be >= 0 (got " + std::to_string(n_max) + ")");
  }
  if (auto mx = env.max_index(); mx.has_value() && n_max > *mx) {
    throw std::invalid_argument("DTable horizon " + std::to_string(n_max) +
                                " exceeds environment domain (max index " +
                                std::to_string(*mx) + ")");
  }
  const std::size_t len = static_cast<std::size_t>(n_max) + 1;
  d_.resize(len);
  log_d_.resize(len);
  inv_cumsum_.resize(len);
  cumlog_m_.resize(len);
  inv_prod_.resize(len);

  d_[0] = 1.0;
  log_d_[0] = 0.0;
  inv_cumsum_[0] = 1.0;  // D(0) = 1, so P(Z_0 = 0) = 1
  cumlog_m_[0] = 0.0;
  inv_prod_[0] = 0.0;

  CompensatedSum inv_cum;
  inv_cum.add(1.0);
  CompensatedSum inv_prod;
  CompensatedSum cumlog;

  for (std::int64_t n = 1; n <= n_max; ++n) {
    const std::size_t i = static_cast<std::size_t>(n);
    const double m = env_.mean(n);
    const double logm = std::log(m);
    cumlog.add(logm);
    cumlog_m_[i] = cumlog.sum;

    d_[i] = 1.0 + m * d_[i - 1];
    if (d_[i] < kDirectLimit) {
      log_d_[i] = std::log(d_[i]);
    } else {
      // Continue the recursion on logs: log D(n) = log(m D(n-1)) + log1p(1/(m D(n-1))).
      const double base = logm + log_d_[i - 1];
      log_d_[i] = base + std::log1p(std::exp(-base));
      d_[i] = std::numeric_limits<double>::infinity();
    }

    inv_cum.add(d_[i] < kDirectLimit ? 1.0 / d_[i] : std::exp(-log_d_[i]));
    inv_cumsum_[i] = inv_cum.sum;

    inv_prod.add(std::exp(-cumlog_m_[i]));
    inv_prod_[i] = inv_prod.sum;
  }
}

void DTable::check_n(std::int64_t n) const {
  if (n < 0 || n > n_max_) {
    throw std::out_of_range("generation index " + std::to_string(n) +
                            " outside table horizon [0, " + std::to_string(n_max_) + "]");
  }
}

double DTable::d(std::int64_t n) const {
  check_n(n);
  return d_[static_cast<std::size_t>(n)];
}

double DTable::log_d(std::int64_t n) const {
  check_n(n);
  return log_d_[static_cast<std::size_t>(n)];
}

double DTable::log_survival_product(std::int64_t j_from, std::int64_t j_to) const {
  double s = 0.0;
  for (std::int64_t j = j_from; j <= j_to; ++j) {
    const std::size_t i = static_cast<std::size_t>(j);
    const double inv = d_[i] < kDirectLimit ? 1.0 / d_[i] : std::exp(-log_d_[i]);
    s += std::log1p(-inv);
  }
  return s;
}

double DTable::log_d_segment(std::int64_t k, std::int64_t n) const {
  check_n(n);
  if (k < 1 || k > n + 1) {
    throw std::out_of_range("d_segment requires 1 <= k <= n (k = " + std::to_string(k) +
                            ", n = " + std::to_string(n) + ")");
  }
  if (k == 1) return log_d_[static_cast<std::size_t>(n)];
  if (k == n + 1) return 0.0;  // empty sum: D(n+1, n) = 1
  // Product identity: D(k,n) = D(n) * (1 - prod_{j=k-1}^{n} (1 - 1/D(j))),
  // with the product starting at j = k-1 >= 1 here.
  //
  // D is nondecreasing, so the largest 1/D(j) appears at j = k-1.  When even
  // that underflows double range, 1 - prod collapses to sum_j 1/D(j) up to a
  // relative error below the underflow threshold; evaluate that sum in log
  // space anchored at its dominant term.
  const double log_x_max = -log_d_[static_cast<std::size_t>(k - 1)];
  if (log_x_max < std::log(1e-12)) {
    double acc = 0.0;
    for (std::int64_t j = k - 1; j <= n; ++j) {
      acc += std::exp(log_d_[static_cast<std::size_t>(k - 1)] -
                      log_d_[static_cast<std::size_t>(j)]);
    }
    return log_d_[static_cast<std::size_t>(n)] + log_x_max + std::log(acc);
  }
  const double s = log_survival_product(k - 1, n);
  return log_d_[static_cast<std::size_t>(n)] + std::log(-std::expm1(s));
}

double DTable::d_segment(std::int64_t k, std::int64_t n) const {
  check_n(n);
  if (k < 1 || k > n) {
    throw std::out_of_range("d_segment requires 1 <= k <= n (k = " + std::to_string(k) +
                            ", n = " + std::to_string(n) + ")");
  }
  if (k == 1) return d_[static_cast<std::size_t>(n)];
  const double logv = log_d_segment(k, n);
  const double direct = d_[static_cast<std::size_t>(n)];
  if (direct < kDirectLimit) {
    return direct * (-std::expm1(log_survival_product(k - 1, n)));
  }
  return std::exp(logv);
}

double DTable::prob_zero(std::int64_t n) const {
  check_n(n);
  const std::size_t i = static_cast<std::size_t>(n);
  return d_[i] < kDirectLimit ? 1.0 / d_[i] : std::exp(-log_d_[i]);
}

double DTable::prob_zero_given(std::int64_t k, std::int64_t n) const {
  check_n(n);
  if (k < 0 || k > n) {
    throw std::out_of_range("prob_zero_given requires 0 <= k <= n (k = " + std::to_string(k) +
                            ", n = " + std::to_string(n) + ")");
  }
  if (k == n) return 1.0;
  return std::exp(-log_d_segment(k + 1, n));
}

double DTable::prob_regen_k(std::int64_t n, std::int64_t k) const {
  if (n < 1) {
    throw std::out_of_range("prob_regen_k requires n >= 1 (got " + std::to_string(n) + ")");
  }
  if (k < 1) {
    throw std::out_of_range("prob_regen_k requires k >= 1 (got " + std::to_string(k) + ")");
  }
  if (n + k - 1 > n_max_) {
    throw std::out_of_range("prob_regen_k window [n, n+k-1] = [" + std::to_string(n) + ", " +
                            std::to_string(n + k - 1) + "] exceeds horizon " +
                            std::to_string(n_max_));
  }
  double r = prob_zero(n);
  for (std::int64_t i = 1; i < k; ++i) r *= env_.p(n + i);
  return r;
}

double DTable::prob_pair_regen_k(std::int64_t n, std::int64_t l, std::int64_t k) const {
  if (n < 1 || k < 1) {
    throw std::out_of_range("prob_pair_regen_k requires n >= 1 and k >= 1");
  }
  if (l < n + k) {
    throw std::out_of_range("prob_pair_regen_k requires l >= n + k (n = " + std::to_string(n) +
                            ", l = " + std::to_string(l) + ", k = " + std::to_string(k) + ")");
  }
  if (l + k - 1 > n_max_) {
    throw std::out_of_range("prob_pair_regen_k window end " + std::to_string(l + k - 1) +
                            " exceeds horizon " + std::to_string(n_max_));
  }
  double first = prob_regen_k(n, k);
  double second = std::exp(-log_d_segment(n + k, l));
  for (std::int64_t i = 1; i < k; ++i) second *= env_.p(l + i);
  return first * second;
}

double DTable::expected_regen_count(std::int64_t n) const {
  check_n(n);
  return inv_cumsum_[static_cast<std::size_t>(n)];
}

double DTable::pgf_f(std::int64_t n, double s) const {
  check_n(n);
  if (!(s >= 0.0) || !(s <= 1.0)) {
    throw std::invalid_argument("pgf_f requires s in [0,1]");
  }
  if (s == 1.0) return 1.0;
  const std::size_t i = static_cast<std::size_t>(n);
  if (d_[i] < kDirectLimit) {
    return 1.0 / (1.0 + (d_[i] - 1.0) * (1.0 - s));
  }
  // 1 + (D-1)(1-s) = s + D(1-s); take logs via D.
  const double base = log_d_[i] + std::log1p(-s);
  const double log_denom = base + std::log1p(s * std::exp(-base));
  return std::exp(-log_denom);
}

double DTable::extinction_tail(std::int64_t n) const {
  check_n(n);
  return 1.0 / (1.0 + inv_prod_[static_cast<std::size_t>(n)]);
}

double DTable::log_mean_product(std::int64_t n) const {
  check_n(n);
  return cumlog_m_[static_cast<std::size_t>(n)];
}

double DTable::inv_mean_product_sum(std::int64_t n) const {
  check_n(n);
  return inv_prod_[static_cast<std::size_t>(n)];
}

double pgf_f_segment(const Environment& env, std::int64_t k, std::int64_t n, double s) {
  if (k < 1 || k > n) {
    throw std::out_of_range("pgf_f_segment requires 1 <= k <= n (k = " + std::to_string(k) +
                            ", n = " + std::to_string(n) + ")");
  }
  if (!(s >= 0.0) || !(s <= 1.0)) {
    throw std::invalid_argument("pgf_f_segment requires s in [0,1]");
  }
  // Backward pass accumulating M_j = m_j ... m_n and the two partial sums.
  double prod = 1.0;        // m_{j+1} ... m_n
  double sum_from_k1 = 0.0; // sum_{j=k+1}^{n} M_j
  double sum_from_k = 0.0;  // sum_{j=k}^{n}   M_j
  for (std::int64_t j = n; j >= k; --j) {
    prod *= env.mean(j);
    if (j >= k + 1) sum_from_k1 += prod;
    sum_from_k += prod;
  }
  const double oms = 1.0 - s;
  return (1.0 + sum_from_k1 * oms) / (1.0 + sum_from_k * oms);
}

}  // namespace bpve
