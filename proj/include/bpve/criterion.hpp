#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpve/analytics.hpp"

namespace bpve {

// Numeric series diagnostic for sum_{m>=2} 1/(D(m) log m).  A finite table
// cannot prove convergence, so the verdict is explicitly "-diagnostic"; the
// exact classifier below is reserved for the near-critical family where the
// dichotomy is a theorem.
enum class SeriesVerdict { ConvergesDiagnostic, DivergesDiagnostic, Inconclusive };

std::string to_string(SeriesVerdict v);

struct CriterionReport {
  // (n, sum_{m=2}^{n} 1/(D(m) log m)) at each checkpoint.
  std::vector<std::pair<std::int64_t, double>> partial_sums;

  // Least-squares fit of term(n) ~ c * n^{-alpha} * (log n)^{-beta} over the
  // last decade of checkpoints.
  double tail_exponent_alpha = 0.0;
  double tail_exponent_beta = 0.0;
  double fit_rms_residual = 0.0;

  // Drift of term(n) * n * log n over the fit window: log of the ratio of
  // the last value to the first.  Near zero when the terms sit on the
  // 1/(n log n) boundary.
  double harmonic_ratio_drift = 0.0;

  // D(n) <= delta * n * log n over the fit window, and the delta used.
  bool growth_ok = false;
  double growth_delta = 0.0;

  SeriesVerdict verdict = SeriesVerdict::Inconclusive;
};

// Partial sums at the given checkpoints (ascending, each >= 2) plus the
// tail-exponent fit and verdict.  At least 10 checkpoints must fall in the
// final decade [max/10, max] or the verdict is Inconclusive.
CriterionReport series_diagnostic(const DTable& table,
                                  const std::vector<std::int64_t>& checkpoints,
                                  double growth_delta = 100.0);

// True iff D(n) <= delta * n * log n for every n in [n_from, n_to].
bool growth_check(const DTable& table, double delta, std::int64_t n_from, std::int64_t n_to);

// Exact dichotomy for the near-critical family: drift B >= 1 means finitely
// many regeneration times, B < 1 infinitely many.
enum class RegenCount { Finite, Infinite };

std::string to_string(RegenCount c);

RegenCount classify_near_critical(double drift);

// Window check that the offspring probabilities stay bounded away from zero:
// p_n >= eps for every n in [n_from, n_to].
bool probability_floor_check(const Environment& env, double eps, std::int64_t n_from,
                             std::int64_t n_to);

// Empirical constants in m_1...m_n ~ c_prod * n^B and
// sum_i (m_1...m_i)^{-1} ~ c_sum * (1-B)^{-1} * n^{1-B}, fitted over the last
// decade of the table.  c_sum applies only for B < 1.  Residuals are max
// absolute log deviations over the fit grid.
struct GrowthConstants {
  double c_prod = 0.0;
  double c_prod_residual = 0.0;
  std::optional<double> c_sum;
  std::optional<double> c_sum_residual;
};

GrowthConstants estimate_growth_constants(const DTable& table, double drift);

}  // namespace bpve
