#include "bpve/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace bpve {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in the open interval (0,1): 53 random bits shifted off the center
// of the lattice so neither endpoint is reachable.
double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint64_t sample_geometric(double p, double u) {
  if (!(p > 0.0) || !(p <= 1.0)) {
    throw std::invalid_argument("sample_geometric requires 0 < p <= 1");
  }
  if (!(u > 0.0) || !(u < 1.0)) {
    throw std::invalid_argument("sample_geometric requires u in (0,1)");
  }
  if (p == 1.0) return 0;
  const double v = std::log(u) / std::log1p(-p);
  return static_cast<std::uint64_t>(v);
}

std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t replica_index) {
  return splitmix64(base_seed + 0x9E3779B97F4A7C15ULL * (replica_index + 1));
}

PathSample sample_path(const Environment& env, std::int64_t n, std::uint64_t seed,
                       const SamplerOptions& options) {
  if (n < 0) {
    throw std::invalid_argument("horizon must be >= 0 (got " + std::to_string(n) + ")");
  }
  if (auto mx = env.max_index(); mx.has_value() && n > *mx) {
    throw std::invalid_argument("horizon " + std::to_string(n) +
                                " exceeds environment domain");
  }

  PathSample path;
  path.seed = seed;
  path.n = n;
  path.z.reserve(static_cast<std::size_t>(n) + 1);
  path.z.push_back(0);

  std::mt19937_64 rng(seed);

  for (std::int64_t t = 1; t <= n; ++t) {
    const std::uint64_t parents = path.z.back() + 1;
    const double p = env.p(t);
    const double q = 1.0 - p;

    double total;
    if (parents >= options.nb_threshold) {
      // Sum of `parents` geometric(p) draws is negative binomial; sample it
      // in one step as a gamma-Poisson mixture.
      std::gamma_distribution<double> gamma(static_cast<double>(parents), q / p);
      const double lambda = gamma(rng);
      std::poisson_distribution<std::uint64_t> poisson(lambda);
      total = static_cast<double>(poisson(rng));
    } else {
      std::uint64_t acc = 0;
      for (std::uint64_t i = 0; i < parents; ++i) {
        acc += sample_geometric(p, uniform_open(rng));
      }
      total = static_cast<double>(acc);
    }

    if (total > static_cast<double>(options.hard_cap)) {
      path.overflowed = true;
      path.overflow_at = t;
      return path;
    }
    path.z.push_back(static_cast<std::uint64_t>(total));
  }
  return path;
}

std::vector<std::int64_t> regen_times(const PathSample& path) {
  std::vector<std::int64_t> out;
  for (std::size_t t = 0; t < path.z.size(); ++t) {
    if (path.z[t] == 0) out.push_back(static_cast<std::int64_t>(t));
  }
  return out;
}

std::vector<std::int64_t> k_strong_times(const PathSample& path, std::int64_t k) {
  if (k < 1) {
    throw std::invalid_argument("k-strong regeneration requires k >= 1");
  }
  std::vector<std::int64_t> out;
  const std::int64_t len = static_cast<std::int64_t>(path.z.size());
  std::int64_t run = 0;  // zeros ending at t
  for (std::int64_t t = 0; t < len; ++t) {
    run = path.z[static_cast<std::size_t>(t)] == 0 ? run + 1 : 0;
    if (run >= k) out.push_back(t - k + 1);
  }
  return out;
}

double RegenStats::zero_freq(std::int64_t t) const {
  const std::uint64_t inc = included();
  if (inc == 0) return 0.0;
  return static_cast<double>(zero_count[static_cast<std::size_t>(t)]) / static_cast<double>(inc);
}

double RegenStats::zero_stderr(std::int64_t t) const {
  const std::uint64_t inc = included();
  if (inc < 2) return 0.0;
  const double f = zero_freq(t);
  return std::sqrt(f * (1.0 - f) / static_cast<double>(inc));
}

double RegenStats::mean_s(std::int64_t t) const {
  const std::uint64_t inc = included();
  if (inc == 0) return 0.0;
  return static_cast<double>(s_sum[static_cast<std::size_t>(t)]) / static_cast<double>(inc);
}

double RegenStats::stderr_s(std::int64_t t) const {
  const std::uint64_t inc = included();
  if (inc < 2) return 0.0;
  const double r = static_cast<double>(inc);
  const double sum = static_cast<double>(s_sum[static_cast<std::size_t>(t)]);
  const double sumsq = static_cast<double>(s_sumsq[static_cast<std::size_t>(t)]);
  const double var = (sumsq - sum * sum / r) / (r - 1.0);
  return std::sqrt(std::max(0.0, var) / r);
}

namespace {

struct Accumulator {
  std::vector<std::uint64_t> zero_count;
  std::vector<std::uint64_t> s_sum;
  std::vector<std::uint64_t> s_sumsq;
  std::uint64_t excluded = 0;

  explicit Accumulator(std::size_t len)
      : zero_count(len, 0), s_sum(len, 0), s_sumsq(len, 0) {}

  // Returns the replica's last regeneration time, or -1 when excluded.
  std::int64_t absorb(const PathSample& path) {
    if (path.overflowed) {
      ++excluded;
      return -1;
    }
    std::uint64_t s = 0;
    std::int64_t last = 0;
    for (std::size_t t = 0; t < path.z.size(); ++t) {
      if (path.z[t] == 0) {
        ++zero_count[t];
        ++s;
        last = static_cast<std::int64_t>(t);
      }
      s_sum[t] += s;
      s_sumsq[t] += s * s;
    }
    return last;
  }
};

}  // namespace

RegenStats run_replicas(const Environment& env, std::int64_t n, std::uint64_t replicas,
                        std::uint64_t base_seed, unsigned parallelism,
                        const SamplerOptions& options) {
  if (replicas < 1) {
    throw std::invalid_argument("run_replicas requires replicas >= 1");
  }
  if (parallelism < 1) parallelism = 1;
  const std::size_t len = static_cast<std::size_t>(n) + 1;

  RegenStats stats;
  stats.horizon = n;
  stats.replicas = replicas;
  stats.zero_count.assign(len, 0);
  stats.s_sum.assign(len, 0);
  stats.s_sumsq.assign(len, 0);
  stats.last_regen.assign(static_cast<std::size_t>(replicas), -1);

  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(parallelism, replicas));
  std::vector<Accumulator> accs(workers, Accumulator(len));
  std::vector<std::thread> threads;
  threads.reserve(workers);

  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w]() {
      // Contiguous replica range per worker.
      const std::uint64_t lo = replicas * w / workers;
      const std::uint64_t hi = replicas * (w + 1) / workers;
      for (std::uint64_t r = lo; r < hi; ++r) {
        PathSample path = sample_path(env, n, mix_seed(base_seed, r), options);
        stats.last_regen[static_cast<std::size_t>(r)] = accs[w].absorb(path);
      }
    });
  }
  for (auto& th : threads) th.join();

  // Integer merge: associative and commutative, so the order of workers
  // cannot change the result.
  for (const Accumulator& acc : accs) {
    stats.excluded += acc.excluded;
    for (std::size_t t = 0; t < len; ++t) {
      stats.zero_count[t] += acc.zero_count[t];
      stats.s_sum[t] += acc.s_sum[t];
      stats.s_sumsq[t] += acc.s_sumsq[t];
    }
  }
  return stats;
}

}  // namespace bpve
