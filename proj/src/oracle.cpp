#include "bpve/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bpve {

namespace {

constexpr double kLogTiny = -700.0;  // below exp() underflow

// Negative-binomial row: out[j] = P(next = j | current = z) for j = 0..cap,
// built from P(0) = p^{1+z} by P(j+1) = P(j) * q * (j+1+z)/(j+1).  The head
// of the row can underflow double range even when the in-cap mass is
// sizeable, so the recurrence starts in log space and materializes once
// representable.  Returns the in-cap row sum.
double nb_row(double p, std::int64_t z, std::vector<double>& out) {
  const double q = 1.0 - p;
  const std::int64_t cap = static_cast<std::int64_t>(out.size()) - 1;
  double logc = static_cast<double>(1 + z) * std::log(p);
  double c = logc > kLogTiny ? std::exp(logc) : 0.0;
  bool direct = logc > kLogTiny;
  const double logq = std::log(q);
  double sum = 0.0;
  for (std::int64_t j = 0; j <= cap; ++j) {
    if (direct) {
      out[static_cast<std::size_t>(j)] = c;
      sum += c;
      c *= q * (static_cast<double>(j + 1 + z) / static_cast<double>(j + 1));
    } else {
      out[static_cast<std::size_t>(j)] = 0.0;
      logc += logq + std::log(static_cast<double>(j + 1 + z) / static_cast<double>(j + 1));
      if (logc > kLogTiny) {
        direct = true;
        c = std::exp(logc);
      }
    }
  }
  return sum;
}

// Same row through repeated convolution with the geometric kernel
// P(j) = p q^j, applied 1+z times starting from a point mass at zero.
double geometric_convolution_row(double p, std::int64_t z, std::vector<double>& out) {
  const double q = 1.0 - p;
  const std::size_t len = out.size();
  std::vector<double> cur(len, 0.0), next(len, 0.0);
  cur[0] = 1.0;
  std::vector<double> geom(len);
  double g = p;
  for (std::size_t j = 0; j < len; ++j) {
    geom[j] = g;
    g *= q;
  }
  for (std::int64_t line = 0; line < 1 + z; ++line) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = 0; a < len; ++a) {
      if (cur[a] == 0.0) continue;
      for (std::size_t b = 0; a + b < len; ++b) {
        next[a + b] += cur[a] * geom[b];
      }
    }
    cur.swap(next);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    out[j] = cur[j];
    sum += cur[j];
  }
  return sum;
}

std::int64_t resolve_cap(std::int64_t n, std::int64_t cap) {
  if (cap < 0) return 10 * (n + 1);
  if (cap < 1) {
    throw std::invalid_argument("oracle cap must be >= 1 (got " + std::to_string(cap) + ")");
  }
  return cap;
}

ExactDistribution run_dp(const Environment& env, std::int64_t n, std::int64_t cap,
                         StepMethod method, const std::vector<std::int64_t>* kill_times) {
  if (n < 0) {
    throw std::invalid_argument("oracle generation must be >= 0 (got " + std::to_string(n) + ")");
  }
  if (auto mx = env.max_index(); mx.has_value() && n > *mx) {
    throw std::invalid_argument("oracle generation " + std::to_string(n) +
                                " exceeds environment domain");
  }

  ExactDistribution dist;
  dist.generation = n;
  dist.pmf.assign(static_cast<std::size_t>(cap) + 1, 0.0);
  dist.pmf[0] = 1.0;  // Z_0 = 0

  std::size_t kill_idx = 0;
  auto apply_kill = [&](std::int64_t t) {
    if (!kill_times) return;
    while (kill_idx < kill_times->size() && (*kill_times)[kill_idx] == t) {
      const double keep = dist.pmf[0];
      std::fill(dist.pmf.begin(), dist.pmf.end(), 0.0);
      dist.pmf[0] = keep;
      ++kill_idx;
    }
  };

  apply_kill(0);

  std::vector<double> row(static_cast<std::size_t>(cap) + 1);
  std::vector<double> next(static_cast<std::size_t>(cap) + 1);
  for (std::int64_t t = 1; t <= n; ++t) {
    const double p = env.p(t);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::int64_t z = 0; z <= cap; ++z) {
      const double mass = dist.pmf[static_cast<std::size_t>(z)];
      if (mass == 0.0) continue;
      const double row_sum = method == StepMethod::NbRow
                                 ? nb_row(p, z, row)
                                 : geometric_convolution_row(p, z, row);
      for (std::int64_t j = 0; j <= cap; ++j) {
        next[static_cast<std::size_t>(j)] += mass * row[static_cast<std::size_t>(j)];
      }
      dist.lost_mass += mass * std::max(0.0, 1.0 - row_sum);
    }
    dist.pmf.swap(next);
    apply_kill(t);
  }
  return dist;
}

}  // namespace

double ExactDistribution::total_mass() const {
  double s = 0.0;
  for (double x : pmf) s += x;
  return s;
}

double ExactDistribution::mean() const {
  double s = 0.0;
  for (std::size_t j = 0; j < pmf.size(); ++j) s += static_cast<double>(j) * pmf[j];
  return s;
}

double ExactDistribution::pgf(double s) const {
  double acc = 0.0;
  double pw = 1.0;
  for (std::size_t j = 0; j < pmf.size(); ++j) {
    acc += pmf[j] * pw;
    pw *= s;
  }
  return acc;
}

ExactDistribution exact_distribution(const Environment& env, std::int64_t n, std::int64_t cap,
                                     StepMethod method) {
  return run_dp(env, n, resolve_cap(n, cap), method, nullptr);
}

double exact_joint_zero(const Environment& env, const std::vector<std::int64_t>& times,
                        std::int64_t n, std::int64_t cap) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0 || times[i] > n) {
      throw std::invalid_argument("joint-zero time " + std::to_string(times[i]) +
                                  " outside [0, " + std::to_string(n) + "]");
    }
    if (i > 0 && times[i] <= times[i - 1]) {
      throw std::invalid_argument("joint-zero times must be strictly increasing");
    }
  }
  ExactDistribution dist = run_dp(env, n, resolve_cap(n, cap), StepMethod::NbRow, &times);
  return dist.total_mass();
}

}  // namespace bpve
