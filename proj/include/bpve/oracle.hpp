#pragma once

#include <cstdint>
#include <vector>

#include "bpve/environment.hpp"

namespace bpve {

// Exact (truncated) distribution of Z_n computed by forward dynamic
// programming, independent of every closed form in analytics.  Ground truth
// for small horizons; deliberately naive O(n * cap^2).
struct ExactDistribution {
  std::vector<double> pmf;  // P(Z_generation = j), j = 0..cap
  double lost_mass = 0.0;   // total probability pushed beyond cap
  std::int64_t generation = 0;

  double total_mass() const;
  double mean() const;  // mean of the in-cap part
  // sum_j pmf[j] * s^j; the out-of-cap remainder is bounded by lost_mass.
  double pgf(double s) const;
};

// One-step transition law used by the DP.  From population z the next
// generation is negative binomial with 1+z trials: the default NbRow builds
// each row by the coefficient recurrence P(j+1) = P(j) * q * (j+1+z)/(j+1);
// GeometricConvolution instead convolves the geometric kernel 1+z times.
// Both describe the same law and are cross-checked in tests.
enum class StepMethod { NbRow, GeometricConvolution };

// cap < 0 selects the default cap 10 * (n + 1).
ExactDistribution exact_distribution(const Environment& env, std::int64_t n,
                                     std::int64_t cap = -1,
                                     StepMethod method = StepMethod::NbRow);

// P(Z_t = 0 for every t in times), estimated from the truncated DP by
// restricting mass to population 0 at each listed time and running to
// step n.  times must be strictly increasing, nonnegative, and <= n.
// The truncation makes this a lower bound, tight when the corresponding
// exact_distribution lost mass is negligible.
double exact_joint_zero(const Environment& env, const std::vector<std::int64_t>& times,
                        std::int64_t n, std::int64_t cap = -1);

}  // namespace bpve
