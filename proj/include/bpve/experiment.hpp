#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bpve/environment.hpp"

namespace bpve {

inline constexpr const char* kToolVersion = "0.1.0";

// One experiment invocation: which run, over which environment, and the
// sampling/checkpoint parameters.  Built either from CLI flags or from a
// key = value config file; validation happens in validate().
struct ExperimentConfig {
  enum class Run { Exact, Simulate, Classify, Theorem2, Theorem3 };

  Run run = Run::Exact;

  // Environment selection: "critical" (constant, probability p),
  // "near-critical" (drift B, optional i0), or "custom" (env_file).
  std::string env_kind = "critical";
  double p = 0.5;
  double drift = 0.0;
  std::optional<std::int64_t> i0;
  std::string env_file;

  std::int64_t horizon = 1000;
  std::uint64_t replicas = 1000;
  std::uint64_t base_seed = 1;
  std::optional<std::int64_t> k;  // strong-regeneration order
  unsigned parallelism = 1;

  // "log:P" for P log-spaced points per decade (default log:10), or an
  // explicit comma-separated list "10,100,1000".
  std::string checkpoints = "log:10";

  std::string out_path;  // empty or "-": stdout

  Environment make_environment() const;
  std::vector<std::int64_t> make_checkpoints() const;
  void validate() const;
};

// Expands a checkpoint schedule over [2, horizon]; the horizon itself is
// always included.
std::vector<std::int64_t> expand_checkpoints(const std::string& schedule, std::int64_t horizon);

// Applies a key = value config file to fields of config.  Keys mirror the CLI
// flag names (env, p, B, i0, env-file, n, replicas, seed, k, out,
// parallelism, checkpoints); '#' lines and blank lines are ignored; unknown
// keys are an error.  The CLI applies this before flag values so that flags
// override the file.
void apply_config_file(ExperimentConfig& config, const std::string& path);

// Each run_* writes one CSV document: '#' comment preamble recording the
// full config and tool version, a header row, then data rows.  Output is
// byte-identical across reruns of the same config.
void run_exact(const ExperimentConfig& config, std::ostream& out);
void run_simulate(const ExperimentConfig& config, std::ostream& out);
void run_classify(const ExperimentConfig& config, std::ostream& out);
void run_theorem2(const ExperimentConfig& config, std::ostream& out);
void run_theorem3(const ExperimentConfig& config, std::ostream& out);

// Dispatches on config.run and handles out_path ("-" or empty for stdout).
void run_experiment(const ExperimentConfig& config);

}  // namespace bpve
