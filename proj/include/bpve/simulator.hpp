#pragma once

#include <cstdint>
#include <vector>

#include "bpve/environment.hpp"

namespace bpve {

// One simulated trajectory Z_0..Z_n.  If the population passed the hard cap
// the replica is flagged and z is truncated at the offending generation;
// flagged replicas are excluded from aggregate statistics rather than
// saturated.
struct PathSample {
  std::vector<std::uint64_t> z;
  std::uint64_t seed = 0;
  std::int64_t n = 0;  // requested horizon
  bool overflowed = false;
  std::int64_t overflow_at = -1;
};

struct SamplerOptions {
  // Replica aborts once a generation would exceed this population.
  std::uint64_t hard_cap = std::uint64_t{1} << 53;
  // Parent counts at or above this use a single closed-form negative
  // binomial draw (gamma-Poisson mixture) instead of per-individual
  // geometric sampling.  Set to ~0 to force the closed-form path, or to a
  // huge value to force per-individual sampling.
  std::uint64_t nb_threshold = 64;
};

// Inverse-transform geometric sample on {0,1,2,...}: floor(log u / log q).
// Requires 0 < p <= 1 and u in (0,1); p = 1 returns 0.
std::uint64_t sample_geometric(double p, double u);

// Deterministic 64-bit seed mix used to derive replica seeds.
std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t replica_index);

// Samples Z_0..Z_n: Z_0 = 0 and Z_t is the offspring total of 1 + Z_{t-1}
// individuals, each geometric(p_t).  Deterministic given (env, n, seed);
// the generator is mt19937_64.
PathSample sample_path(const Environment& env, std::int64_t n, std::uint64_t seed,
                       const SamplerOptions& options = {});

// {t : Z_t = 0}; always contains 0.
std::vector<std::int64_t> regen_times(const PathSample& path);

// {t : Z_t = ... = Z_{t+k-1} = 0, t + k - 1 <= n}.
std::vector<std::int64_t> k_strong_times(const PathSample& path, std::int64_t k);

// Replica aggregate.  All accumulators are integers, so merging is exact and
// the result is bit-identical for every parallelism degree.
struct RegenStats {
  std::int64_t horizon = 0;
  std::uint64_t replicas = 0;  // requested
  std::uint64_t excluded = 0;  // overflow-flagged, not in the accumulators

  std::vector<std::uint64_t> zero_count;  // per t: replicas with Z_t = 0
  std::vector<std::uint64_t> s_sum;       // per t: sum over replicas of S_t
  std::vector<std::uint64_t> s_sumsq;     // per t: sum of S_t^2
  std::vector<std::int64_t> last_regen;   // per replica; -1 marks excluded

  std::uint64_t included() const { return replicas - excluded; }
  double zero_freq(std::int64_t t) const;
  double zero_stderr(std::int64_t t) const;
  double mean_s(std::int64_t t) const;
  double stderr_s(std::int64_t t) const;
};

// Runs `replicas` independent trajectories with seeds mix_seed(base_seed, r)
// and aggregates them.  Work is split across `parallelism` threads; the
// aggregation is order-independent, so the output does not depend on the
// thread count.
RegenStats run_replicas(const Environment& env, std::int64_t n, std::uint64_t replicas,
                        std::uint64_t base_seed, unsigned parallelism = 1,
                        const SamplerOptions& options = {});

}  // namespace bpve
