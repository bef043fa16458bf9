#include "bpve/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bpve {

std::string to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::ConvergesDiagnostic: return "converges-diagnostic";
    case SeriesVerdict::DivergesDiagnostic: return "diverges-diagnostic";
    case SeriesVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(RegenCount c) {
  return c == RegenCount::Finite ? "finite" : "infinite";
}

namespace {

// term(n) = 1/(D(n) log n), n >= 2.  May underflow to zero for fast-growing
// D; the log form below stays finite.
double series_term(const DTable& table, std::int64_t n) {
  return std::exp(-table.log_d(n)) / std::log(static_cast<double>(n));
}

double log_series_term(const DTable& table, std::int64_t n) {
  return -table.log_d(n) - std::log(std::log(static_cast<double>(n)));
}

struct TwoSlopeFit {
  double alpha = 0.0;  // coefficient of -log n
  double beta = 0.0;   // coefficient of -log log n
  double rms = 0.0;
};

// Least squares of y = a - alpha x1 - beta x2 with x1 = log n, x2 = log log n.
// The regressors are nearly collinear over one decade, so accumulate in long
// double; the data itself is smooth to ~1e-12, which keeps the solve stable.
TwoSlopeFit fit_tail(const std::vector<std::int64_t>& ns, const std::vector<double>& ys) {
  const std::size_t m = ns.size();
  long double mx1 = 0, mx2 = 0, my = 0;
  std::vector<long double> x1(m), x2(m);
  for (std::size_t i = 0; i < m; ++i) {
    x1[i] = std::log(static_cast<long double>(ns[i]));
    x2[i] = std::log(x1[i]);
    mx1 += x1[i];
    mx2 += x2[i];
    my += ys[i];
  }
  mx1 /= m;
  mx2 /= m;
  my /= m;
  long double s11 = 0, s12 = 0, s22 = 0, sy1 = 0, sy2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const long double d1 = x1[i] - mx1;
    const long double d2 = x2[i] - mx2;
    const long double dy = static_cast<long double>(ys[i]) - my;
    s11 += d1 * d1;
    s12 += d1 * d2;
    s22 += d2 * d2;
    sy1 += d1 * dy;
    sy2 += d2 * dy;
  }
  const long double det = s11 * s22 - s12 * s12;
  TwoSlopeFit fit;
  if (det <= 0) {
    // Degenerate window; fall back to a single-slope fit.
    fit.alpha = static_cast<double>(-(sy1 / s11));
    fit.beta = 0.0;
  } else {
    const long double b1 = (sy1 * s22 - sy2 * s12) / det;
    const long double b2 = (sy2 * s11 - sy1 * s12) / det;
    fit.alpha = static_cast<double>(-b1);
    fit.beta = static_cast<double>(-b2);
  }
  long double ss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const long double pred = my - static_cast<long double>(fit.alpha) * (x1[i] - mx1) -
                             static_cast<long double>(fit.beta) * (x2[i] - mx2);
    const long double r = static_cast<long double>(ys[i]) - pred;
    ss += r * r;
  }
  fit.rms = static_cast<double>(std::sqrt(ss / m));
  return fit;
}

}  // namespace

CriterionReport series_diagnostic(const DTable& table,
                                  const std::vector<std::int64_t>& checkpoints,
                                  double growth_delta) {
  if (checkpoints.empty()) {
    throw std::invalid_argument("series_diagnostic requires at least one checkpoint");
  }
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 2 || checkpoints[i] > table.horizon()) {
      throw std::out_of_range("series_diagnostic checkpoints must lie in [2, horizon]");
    }
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw std::invalid_argument("series_diagnostic checkpoints must be strictly increasing");
    }
  }

  CriterionReport report;
  report.growth_delta = growth_delta;

  // Single pass accumulating the partial sums at each checkpoint.
  double sum = 0.0;
  std::size_t next = 0;
  const std::int64_t n_last = checkpoints.back();
  for (std::int64_t m = 2; m <= n_last && next < checkpoints.size(); ++m) {
    sum += series_term(table, m);
    while (next < checkpoints.size() && checkpoints[next] == m) {
      report.partial_sums.emplace_back(m, sum);
      ++next;
    }
  }

  // Fit window: checkpoints in the final decade.
  const std::int64_t window_lo = n_last / 10;
  std::vector<std::int64_t> ns;
  std::vector<double> ys;
  for (std::int64_t n : checkpoints) {
    if (n >= window_lo) {
      ns.push_back(n);
      ys.push_back(log_series_term(table, n));
    }
  }
  if (ns.size() < 10) {
    report.verdict = SeriesVerdict::Inconclusive;
    return report;
  }

  const TwoSlopeFit fit = fit_tail(ns, ys);
  report.tail_exponent_alpha = fit.alpha;
  report.tail_exponent_beta = fit.beta;
  report.fit_rms_residual = fit.rms;

  const auto harmonic_ratio = [&](std::int64_t n) {
    // term(n) * n * log n = n / D(n)
    return static_cast<double>(n) * std::exp(-table.log_d(n));
  };
  const double r_first = harmonic_ratio(ns.front());
  const double r_last = harmonic_ratio(ns.back());
  report.harmonic_ratio_drift =
      (r_first > 0 && r_last > 0) ? std::log(r_last / r_first)
                                  : -std::numeric_limits<double>::infinity();
  const bool harmonic_stable =
      std::isfinite(report.harmonic_ratio_drift) &&
      std::abs(report.harmonic_ratio_drift) < 0.12 && r_last > 1e-9;

  report.growth_ok = growth_check(table, growth_delta, ns.front(), ns.back());

  // Decision.  alpha beyond the margins settles it outright; on the
  // near-harmonic shelf alpha ~ 1 the log exponent beta and the stability of
  // term * n * log n separate the summable (log n)^-2 boundary from the
  // divergent (log n)^-1 one.
  if (fit.alpha > 1.05) {
    report.verdict = SeriesVerdict::ConvergesDiagnostic;
  } else if (fit.alpha < 0.95) {
    report.verdict =
        report.growth_ok ? SeriesVerdict::DivergesDiagnostic : SeriesVerdict::Inconclusive;
  } else if (harmonic_stable && report.growth_ok) {
    report.verdict = SeriesVerdict::DivergesDiagnostic;
  } else if (fit.beta >= 1.5) {
    report.verdict = SeriesVerdict::ConvergesDiagnostic;
  } else {
    report.verdict = SeriesVerdict::Inconclusive;
  }
  return report;
}

bool growth_check(const DTable& table, double delta, std::int64_t n_from, std::int64_t n_to) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("growth_check requires delta > 0");
  }
  if (n_from < 2 || n_from > n_to || n_to > table.horizon()) {
    throw std::out_of_range("growth_check requires 2 <= n_from <= n_to <= horizon");
  }
  for (std::int64_t n = n_from; n <= n_to; ++n) {
    const double bound =
        std::log(delta) + std::log(static_cast<double>(n)) +
        std::log(std::log(static_cast<double>(n)));
    if (table.log_d(n) > bound) return false;
  }
  return true;
}

RegenCount classify_near_critical(double drift) {
  if (!(drift >= 0.0)) {
    throw std::invalid_argument("classify_near_critical requires drift B >= 0");
  }
  return drift >= 1.0 ? RegenCount::Finite : RegenCount::Infinite;
}

bool probability_floor_check(const Environment& env, double eps, std::int64_t n_from,
                             std::int64_t n_to) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("probability_floor_check requires eps > 0");
  }
  if (n_from < 1 || n_from > n_to) {
    throw std::out_of_range("probability_floor_check requires 1 <= n_from <= n_to");
  }
  for (std::int64_t n = n_from; n <= n_to; ++n) {
    if (!env.in_domain(n)) {
      throw std::out_of_range("probability_floor_check window exceeds environment domain");
    }
    if (env.p(n) < eps) return false;
  }
  return true;
}

GrowthConstants estimate_growth_constants(const DTable& table, double drift) {
  if (!(drift >= 0.0)) {
    throw std::invalid_argument("estimate_growth_constants requires drift B >= 0");
  }
  if (table.horizon() < 1000) {
    throw std::invalid_argument("estimate_growth_constants requires table horizon >= 1000");
  }
  const std::int64_t n_hi = table.horizon();
  const std::int64_t n_lo = n_hi / 10;

  // 32 log-spaced sample points across the last decade.
  std::vector<std::int64_t> grid;
  const int points = 32;
  for (int i = 0; i < points; ++i) {
    const double x = std::log(static_cast<double>(n_lo)) +
                     (std::log(static_cast<double>(n_hi)) -
                      std::log(static_cast<double>(n_lo))) *
                         (static_cast<double>(i) / (points - 1));
    const std::int64_t n = static_cast<std::int64_t>(std::llround(std::exp(x)));
    if (grid.empty() || n > grid.back()) grid.push_back(std::min(n, n_hi));
  }

  GrowthConstants out;
  double acc = 0.0;
  for (std::int64_t n : grid) {
    acc += table.log_mean_product(n) - drift * std::log(static_cast<double>(n));
  }
  const double logc_prod = acc / static_cast<double>(grid.size());
  out.c_prod = std::exp(logc_prod);
  double resid = 0.0;
  for (std::int64_t n : grid) {
    const double dev = table.log_mean_product(n) -
                       drift * std::log(static_cast<double>(n)) - logc_prod;
    resid = std::max(resid, std::abs(dev));
  }
  out.c_prod_residual = resid;

  if (drift < 1.0) {
    // sum_i (m_1...m_i)^{-1} ~ c (1-B)^{-1} n^{1-B}
    acc = 0.0;
    for (std::int64_t n : grid) {
      acc += std::log(table.inv_mean_product_sum(n) * (1.0 - drift)) -
             (1.0 - drift) * std::log(static_cast<double>(n));
    }
    const double logc_sum = acc / static_cast<double>(grid.size());
    out.c_sum = std::exp(logc_sum);
    resid = 0.0;
    for (std::int64_t n : grid) {
      const double dev = std::log(table.inv_mean_product_sum(n) * (1.0 - drift)) -
                         (1.0 - drift) * std::log(static_cast<double>(n)) - logc_sum;
      resid = std::max(resid, std::abs(dev));
    }
    out.c_sum_residual = resid;
  }
  return out;
}

}  // namespace bpve
