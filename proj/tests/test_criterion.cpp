#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bpve/criterion.hpp"
#include "bpve/experiment.hpp"
#include "test_oracles.hpp"

using bpve::CriterionReport;
using bpve::DTable;
using bpve::Environment;
using bpve::RegenCount;
using bpve::SeriesVerdict;
using bpve::classify_near_critical;
using bpve::estimate_growth_constants;
using bpve::expand_checkpoints;
using bpve::growth_check;
using bpve::probability_floor_check;
using bpve::series_diagnostic;

namespace {

CriterionReport diagnose(double drift, std::int64_t horizon) {
  const Environment env = Environment::near_critical(drift);
  DTable t(env, horizon);
  return series_diagnostic(t, expand_checkpoints("log:10", horizon));
}

}  // namespace

TEST_CASE("exact classifier dichotomy") {
  CHECK(classify_near_critical(0.0) == RegenCount::Infinite);
  CHECK(classify_near_critical(0.99) == RegenCount::Infinite);
  CHECK(classify_near_critical(1.0) == RegenCount::Finite);
  CHECK(classify_near_critical(2.0) == RegenCount::Finite);
  CHECK_THROWS_AS(classify_near_critical(-0.5), std::invalid_argument);
}

TEST_CASE("series diagnostic on the drift family") {
  // Horizon 1e5 keeps the unit suite quick; the acceptance suite runs 1e6.
  const CriterionReport half = diagnose(0.5, 100000);
  CHECK(half.verdict == SeriesVerdict::DivergesDiagnostic);
  CHECK(half.tail_exponent_alpha == doctest::Approx(1.0).epsilon(0.05));
  CHECK(half.growth_ok);

  const CriterionReport one = diagnose(1.0, 100000);
  CHECK(one.verdict == SeriesVerdict::ConvergesDiagnostic);
  CHECK(one.tail_exponent_beta > 1.5);

  const CriterionReport two = diagnose(2.0, 100000);
  CHECK(two.verdict == SeriesVerdict::ConvergesDiagnostic);
  CHECK(two.tail_exponent_alpha == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("partial sums are nondecreasing") {
  for (double b : {0.0, 0.5, 2.0}) {
    const CriterionReport rep = diagnose(b, 10000);
    REQUIRE(!rep.partial_sums.empty());
    for (std::size_t i = 1; i < rep.partial_sums.size(); ++i) {
      CHECK(rep.partial_sums[i].second >= rep.partial_sums[i - 1].second);
      CHECK(rep.partial_sums[i].first > rep.partial_sums[i - 1].first);
    }
  }
}

TEST_CASE("diagnostic goes inconclusive without enough tail support") {
  DTable t(Environment::constant(0.5), 1000);
  const CriterionReport rep = series_diagnostic(t, {10, 100, 1000});
  CHECK(rep.verdict == SeriesVerdict::Inconclusive);
}

TEST_CASE("checkpoint validation") {
  DTable t(Environment::constant(0.5), 100);
  CHECK_THROWS_AS(series_diagnostic(t, {}), std::invalid_argument);
  CHECK_THROWS_AS(series_diagnostic(t, {1, 10}), std::out_of_range);
  CHECK_THROWS_AS(series_diagnostic(t, {10, 10}), std::invalid_argument);
  CHECK_THROWS_AS(series_diagnostic(t, {10, 200}), std::out_of_range);
}

TEST_CASE("harmonic ratio boundedness across the subcritical drift range") {
  // term(n) * n * log n should stay within constant bounds for B < 1 ...
  for (double b : {0.0, 0.25, 0.5, 0.75}) {
    const Environment env = Environment::near_critical(b);
    DTable t(env, 1000000);
    double lo = 1e300, hi = 0.0;
    for (std::int64_t n = 1000; n <= 1000000; n *= 2) {
      const double r = static_cast<double>(n) * std::exp(-t.log_d(n));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(lo > 0.01);
    CHECK(hi < 100.0);
  }
  // ... and term(n) * n * (log n)^2 likewise for B = 1.
  {
    DTable t(Environment::near_critical(1.0), 1000000);
    double lo = 1e300, hi = 0.0;
    for (std::int64_t n = 1000; n <= 1000000; n *= 2) {
      const double r = static_cast<double>(n) * std::exp(-t.log_d(n)) *
                       std::log(static_cast<double>(n));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(lo > 0.01);
    CHECK(hi < 100.0);
  }
}

TEST_CASE("growth envelope check") {
  SUBCASE("critical: D(n) = n + 1 fits inside n log n from n = 10") {
    DTable t(Environment::constant(0.5), 10000);
    CHECK(growth_check(t, 1.0, 10, 10000));
    CHECK(!growth_check(t, 0.1, 2, 10));
  }
  SUBCASE("subcritical drift grows linearly") {
    DTable t(Environment::near_critical(0.5), 100000);
    CHECK(growth_check(t, 10.0, 100, 100000));
  }
  SUBCASE("geometric growth escapes every envelope") {
    DTable t(Environment::constant(0.25), 100);
    CHECK(!growth_check(t, 1.0, 10, 100));
  }
  SUBCASE("twice the fitted linear constant always suffices for B < 1") {
    DTable t(Environment::near_critical(0.5), 1000000);
    const double c_fit = t.d(1000000) / 1e6;
    CHECK(growth_check(t, 2.0 * c_fit, 1000, 1000000));
  }
  SUBCASE("validation") {
    DTable t(Environment::constant(0.5), 100);
    CHECK_THROWS_AS(growth_check(t, 0.0, 10, 100), std::invalid_argument);
    CHECK_THROWS_AS(growth_check(t, 1.0, 1, 100), std::out_of_range);
    CHECK_THROWS_AS(growth_check(t, 1.0, 50, 200), std::out_of_range);
  }
}

TEST_CASE("classifier and diagnostic agree across the drift grid") {
  for (double b : {0.0, 0.5, 0.9, 1.0, 1.5, 2.0}) {
    const CriterionReport rep = diagnose(b, 1000000);
    const RegenCount exact = classify_near_critical(b);
    if (exact == RegenCount::Finite) {
      CHECK(rep.verdict == SeriesVerdict::ConvergesDiagnostic);
    } else {
      CHECK(rep.verdict == SeriesVerdict::DivergesDiagnostic);
    }
  }
}

TEST_CASE("growth constant estimation") {
  SUBCASE("zero drift: all products are one") {
    DTable t(Environment::near_critical(0.0), 2000);
    const auto fit = estimate_growth_constants(t, 0.0);
    CHECK(fit.c_prod == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.c_prod_residual < 1e-12);
    REQUIRE(fit.c_sum.has_value());
    CHECK(*fit.c_sum == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("B = 1, i0 = 1 telescopes to 2/3") {
    DTable t(Environment::near_critical(1.0, 1), 10000);
    const auto fit = estimate_growth_constants(t, 1.0);
    CHECK(fit.c_prod == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
    CHECK(!fit.c_sum.has_value());
  }
  SUBCASE("B = 0.5 fits cleanly over the last decade") {
    DTable t(Environment::near_critical(0.5), 100000);
    const auto fit = estimate_growth_constants(t, 0.5);
    CHECK(fit.c_prod > 0.0);
    CHECK(fit.c_prod_residual < 0.01);
    REQUIRE(fit.c_sum.has_value());
    CHECK(*fit.c_sum_residual < 0.01);
  }
  SUBCASE("horizon validation") {
    DTable t(Environment::near_critical(0.5), 100);
    CHECK_THROWS_AS(estimate_growth_constants(t, 0.5), std::invalid_argument);
  }
}

TEST_CASE("probability floor check") {
  const Environment env = Environment::near_critical(1.0, 1);
  // p_i >= 3/8 for every i >= 2 and p_1 = 1/2.
  CHECK(probability_floor_check(env, 0.3, 1, 10000));
  CHECK(!probability_floor_check(env, 0.4, 1, 10000));
  CHECK_THROWS_AS(probability_floor_check(env, 0.0, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(probability_floor_check(Environment::custom({0.5}), 0.1, 1, 5),
                  std::out_of_range);
}
