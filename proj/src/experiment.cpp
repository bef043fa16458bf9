#include "bpve/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <ostream>
#include <stdexcept>

#include "bpve/analytics.hpp"
#include "bpve/criterion.hpp"
#include "bpve/simulator.hpp"

namespace bpve {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

const char* run_name(ExperimentConfig::Run run) {
  switch (run) {
    case ExperimentConfig::Run::Exact: return "exact";
    case ExperimentConfig::Run::Simulate: return "simulate";
    case ExperimentConfig::Run::Classify: return "classify";
    case ExperimentConfig::Run::Theorem2: return "theorem2";
    case ExperimentConfig::Run::Theorem3: return "theorem3";
  }
  return "?";
}

void write_preamble(const ExperimentConfig& config, std::ostream& out) {
  out << "# bpve " << run_name(config.run) << " v" << kToolVersion << "\n";
  out << "# env = " << config.env_kind << "\n";
  if (config.env_kind == "critical") {
    out << "# p = " << fmt(config.p) << "\n";
  } else if (config.env_kind == "near-critical") {
    out << "# B = " << fmt(config.drift) << "\n";
    if (config.i0.has_value()) {
      out << "# i0 = " << *config.i0 << "\n";
    } else {
      out << "# i0 = default\n";
    }
  } else {
    out << "# env-file = " << config.env_file << "\n";
  }
  out << "# n = " << config.horizon << "\n";
  out << "# replicas = " << config.replicas << "\n";
  out << "# seed = " << config.base_seed << "\n";
  if (config.k.has_value()) out << "# k = " << *config.k << "\n";
  out << "# parallelism = " << config.parallelism << "\n";
  out << "# checkpoints = " << config.checkpoints << "\n";
}

Environment require_near_critical(const ExperimentConfig& config, const char* what) {
  if (config.env_kind != "near-critical") {
    throw std::invalid_argument(std::string(what) +
                                " requires a near-critical environment; for other "
                                "environments use `classify` (series diagnostic only)");
  }
  return config.make_environment();
}

}  // namespace

Environment ExperimentConfig::make_environment() const {
  if (env_kind == "critical") return Environment::constant(p);
  if (env_kind == "near-critical") return Environment::near_critical(drift, i0);
  if (env_kind == "custom") {
    if (env_file.empty()) {
      throw std::invalid_argument("custom environment requires --env-file");
    }
    return Environment::from_file(env_file);
  }
  throw std::invalid_argument("unknown environment kind '" + env_kind +
                              "' (expected critical | near-critical | custom)");
}

std::vector<std::int64_t> expand_checkpoints(const std::string& schedule,
                                             std::int64_t horizon) {
  if (horizon < 2) {
    throw std::invalid_argument("checkpoint expansion requires horizon >= 2");
  }
  std::vector<std::int64_t> points;
  if (schedule.rfind("log:", 0) == 0) {
    const long per_decade = std::strtol(schedule.c_str() + 4, nullptr, 10);
    if (per_decade < 1 || per_decade > 1000) {
      throw std::invalid_argument("checkpoint schedule '" + schedule +
                                  "': points per decade must be in [1, 1000]");
    }
    if (horizon >= 10) {
      const double lo = 1.0;  // first decade boundary 10
      const double hi = std::log10(static_cast<double>(horizon));
      const double step = 1.0 / static_cast<double>(per_decade);
      for (double e = lo; e < hi + step / 2; e += step) {
        const std::int64_t n =
            std::min<std::int64_t>(horizon, std::llround(std::pow(10.0, e)));
        if (points.empty() || n > points.back()) points.push_back(n);
      }
    } else {
      for (std::int64_t n = 2; n <= horizon; ++n) points.push_back(n);
    }
  } else {
    // Explicit comma-separated list.
    std::size_t pos = 0;
    while (pos < schedule.size()) {
      std::size_t end = schedule.find(',', pos);
      if (end == std::string::npos) end = schedule.size();
      const std::string tok = schedule.substr(pos, end - pos);
      try {
        const std::int64_t n = std::stoll(tok);
        points.push_back(n);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad checkpoint '" + tok + "' in schedule '" + schedule +
                                    "'");
      }
      pos = end + 1;
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    for (std::int64_t n : points) {
      if (n < 2 || n > horizon) {
        throw std::invalid_argument("checkpoint " + std::to_string(n) +
                                    " outside [2, horizon]");
      }
    }
  }
  if (points.empty() || points.back() != horizon) points.push_back(horizon);
  return points;
}

std::vector<std::int64_t> ExperimentConfig::make_checkpoints() const {
  return expand_checkpoints(checkpoints, horizon);
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  const auto trim = [](std::string s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    const auto where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) {
      throw std::runtime_error(where + ": expected key = value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "env") {
        config.env_kind = value;
      } else if (key == "p") {
        config.p = std::stod(value);
      } else if (key == "B") {
        config.drift = std::stod(value);
      } else if (key == "i0") {
        config.i0 = std::stoll(value);
      } else if (key == "env-file") {
        config.env_file = value;
      } else if (key == "n") {
        config.horizon = std::stoll(value);
      } else if (key == "replicas") {
        config.replicas = std::stoull(value);
      } else if (key == "seed") {
        config.base_seed = std::stoull(value);
      } else if (key == "k") {
        config.k = std::stoll(value);
      } else if (key == "out") {
        config.out_path = value;
      } else if (key == "parallelism") {
        config.parallelism = static_cast<unsigned>(std::stoul(value));
      } else if (key == "checkpoints") {
        config.checkpoints = value;
      } else {
        throw std::runtime_error(where + ": unknown config key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(where + ": bad value '" + value + "' for key '" + key + "'");
    } catch (const std::out_of_range&) {
      throw std::runtime_error(where + ": value '" + value + "' out of range for key '" +
                               key + "'");
    }
  }
}

void ExperimentConfig::validate() const {
  if (env_kind != "critical" && env_kind != "near-critical" && env_kind != "custom") {
    throw std::invalid_argument("unknown environment kind '" + env_kind + "'");
  }
  if (horizon < 2) {
    throw std::invalid_argument("horizon must be >= 2 (got " + std::to_string(horizon) + ")");
  }
  if (replicas < 1 &&
      (run == Run::Simulate || run == Run::Theorem2 || run == Run::Theorem3)) {
    throw std::invalid_argument("replicas must be >= 1");
  }
  if (k.has_value() && *k < 1) {
    throw std::invalid_argument("k must be >= 1");
  }
  if (parallelism < 1) {
    throw std::invalid_argument("parallelism must be >= 1");
  }
  make_environment();  // surfaces environment parameter errors
}

void run_exact(const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  const Environment env = config.make_environment();
  const std::int64_t table_horizon =
      config.k.has_value() ? config.horizon + *config.k - 1 : config.horizon;
  const DTable table(env, table_horizon);
  const auto checkpoints = config.make_checkpoints();

  write_preamble(config, out);
  out << "n,D,log10_D,p_zero,expected_S,extinction_tail";
  if (config.k.has_value()) out << ",p_in_Ck";
  out << "\n";
  for (std::int64_t n : checkpoints) {
    out << n << ',' << fmt(table.d(n)) << ',' << fmt(table.log_d(n) / std::log(10.0)) << ','
        << fmt(table.prob_zero(n)) << ',' << fmt(table.expected_regen_count(n)) << ','
        << fmt(table.extinction_tail(n));
    if (config.k.has_value()) out << ',' << fmt(table.prob_regen_k(n, *config.k));
    out << "\n";
  }
}

void run_simulate(const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  const Environment env = config.make_environment();
  const DTable table(env, config.horizon);
  const auto checkpoints = config.make_checkpoints();
  const RegenStats stats = run_replicas(env, config.horizon, config.replicas,
                                        config.base_seed, config.parallelism);

  write_preamble(config, out);
  out << "n,mc_mean_S,mc_stderr_S,exact_expected_S,zero_freq,exact_p_zero,excluded_replicas\n";
  for (std::int64_t n : checkpoints) {
    out << n << ',' << fmt(stats.mean_s(n)) << ',' << fmt(stats.stderr_s(n)) << ','
        << fmt(table.expected_regen_count(n)) << ',' << fmt(stats.zero_freq(n)) << ','
        << fmt(table.prob_zero(n)) << ',' << stats.excluded << "\n";
  }
}

void run_classify(const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  const Environment env = config.make_environment();
  const DTable table(env, config.horizon);
  const CriterionReport report = series_diagnostic(table, config.make_checkpoints());

  write_preamble(config, out);
  out << "kind,B,classifier,diagnostic,alpha,beta,growth_ok,partial_sum\n";
  const bool nc = env.kind() == Environment::Kind::NearCritical;
  out << config.env_kind << ',' << (nc ? fmt(env.drift()) : std::string("")) << ','
      << (nc ? to_string(classify_near_critical(env.drift())) : std::string("na")) << ','
      << to_string(report.verdict) << ',' << fmt(report.tail_exponent_alpha) << ','
      << fmt(report.tail_exponent_beta) << ',' << (report.growth_ok ? "1" : "0") << ','
      << fmt(report.partial_sums.back().second) << "\n";
}

void run_theorem2(const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  const Environment env = require_near_critical(config, "theorem2");
  const DTable table(env, config.horizon);
  const CriterionReport report = series_diagnostic(table, config.make_checkpoints());
  const RegenStats stats = run_replicas(env, config.horizon, config.replicas,
                                        config.base_seed, config.parallelism);

  write_preamble(config, out);
  out << "# classifier = " << to_string(classify_near_critical(env.drift())) << "\n";
  out << "# diagnostic = " << to_string(report.verdict) << "\n";
  out << "# excluded = " << stats.excluded << "\n";
  out << "replica,last_regen\n";
  for (std::size_t r = 0; r < stats.last_regen.size(); ++r) {
    out << r << ',' << stats.last_regen[r] << "\n";
  }
}

void run_theorem3(const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  const Environment env = require_near_critical(config, "theorem3");
  if (env.drift() >= 1.0) {
    throw std::invalid_argument(
        "theorem3 requires drift B < 1: B >= 1 yields finitely many regeneration times "
        "(run `classify` to see the dichotomy)");
  }
  const DTable table(env, config.horizon);
  const auto checkpoints = config.make_checkpoints();
  const RegenStats stats = run_replicas(env, config.horizon, config.replicas,
                                        config.base_seed, config.parallelism);
  // One long path, independent of the Monte Carlo replicas.
  const PathSample path =
      sample_path(env, config.horizon, mix_seed(config.base_seed, config.replicas));

  // S_t for the long path at the checkpoints.
  std::vector<std::uint64_t> path_s(checkpoints.size(), 0);
  {
    std::uint64_t s = 0;
    std::size_t ci = 0;
    for (std::size_t t = 0; t < path.z.size() && ci < checkpoints.size(); ++t) {
      if (path.z[t] == 0) ++s;
      while (ci < checkpoints.size() &&
             checkpoints[ci] == static_cast<std::int64_t>(t)) {
        path_s[ci] = s;
        ++ci;
      }
    }
  }

  write_preamble(config, out);
  if (path.overflowed) out << "# long_path_overflowed_at = " << path.overflow_at << "\n";
  out << "# excluded = " << stats.excluded << "\n";
  out << "n,exact_expected_S,es_over_log_n,mc_mean_S,mc_stderr_S,"
         "path_ratio_eps025,path_ratio_eps05,path_ratio_eps10\n";
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const std::int64_t n = checkpoints[i];
    const double logn = std::log(static_cast<double>(n));
    const double es = table.expected_regen_count(n);
    const double s = static_cast<double>(path_s[i]);
    out << n << ',' << fmt(es) << ',' << fmt(es / logn) << ',' << fmt(stats.mean_s(n)) << ','
        << fmt(stats.stderr_s(n)) << ',' << fmt(s / std::pow(logn, 1.25)) << ','
        << fmt(s / std::pow(logn, 1.5)) << ',' << fmt(s / std::pow(logn, 2.0)) << "\n";
  }
}

void run_experiment(const ExperimentConfig& config) {
  const auto dispatch = [&](std::ostream& out) {
    switch (config.run) {
      case ExperimentConfig::Run::Exact: run_exact(config, out); break;
      case ExperimentConfig::Run::Simulate: run_simulate(config, out); break;
      case ExperimentConfig::Run::Classify: run_classify(config, out); break;
      case ExperimentConfig::Run::Theorem2: run_theorem2(config, out); break;
      case ExperimentConfig::Run::Theorem3: run_theorem3(config, out); break;
    }
  };
  if (config.out_path.empty() || config.out_path == "-") {
    dispatch(std::cout);
    return;
  }
  std::ofstream out(config.out_path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open output path: " + config.out_path);
  }
  dispatch(out);
  if (!out.good()) {
    throw std::runtime_error("error writing output path: " + config.out_path);
  }
}

}  // namespace bpve
