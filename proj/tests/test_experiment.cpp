#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpve/experiment.hpp"
#include "test_oracles.hpp"

using bpve::ExperimentConfig;
using bpve::expand_checkpoints;
using testutil::throws_with;

namespace {

// Parses one CSV column (by header name) from run_* output, skipping the
// comment preamble.
std::vector<std::string> column(const std::string& csv, const std::string& name) {
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> header;
  std::size_t col = static_cast<std::size_t>(-1);
  std::vector<std::string> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t c = line.find(',', pos);
      fields.push_back(line.substr(pos, c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (col == static_cast<std::size_t>(-1)) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == name) col = i;
      }
      REQUIRE(col != static_cast<std::size_t>(-1));
      continue;
    }
    REQUIRE(col < fields.size());
    out.push_back(fields[col]);
  }
  return out;
}

ExperimentConfig base_config(ExperimentConfig::Run run) {
  ExperimentConfig c;
  c.run = run;
  c.env_kind = "critical";
  c.horizon = 10;
  c.replicas = 100;
  c.base_seed = 9;
  c.parallelism = 2;
  c.checkpoints = "log:10";
  return c;
}

}  // namespace

TEST_CASE("checkpoint schedules") {
  SUBCASE("default log schedule") {
    const auto pts = expand_checkpoints("log:10", 1000000);
    CHECK(pts.front() == 10);
    CHECK(pts.back() == 1000000);
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i] > pts[i - 1]);
    std::size_t in_last_decade = 0;
    for (auto n : pts) {
      if (n >= 100000) ++in_last_decade;
    }
    CHECK(in_last_decade >= 10);
  }
  SUBCASE("horizon always included") {
    const auto pts = expand_checkpoints("log:10", 54321);
    CHECK(pts.back() == 54321);
  }
  SUBCASE("small horizons enumerate") {
    CHECK(expand_checkpoints("log:10", 5) == std::vector<std::int64_t>{2, 3, 4, 5});
  }
  SUBCASE("explicit lists") {
    CHECK(expand_checkpoints("10,100,1000", 1000) ==
          std::vector<std::int64_t>{10, 100, 1000});
    CHECK(expand_checkpoints("100,10", 1000) ==
          std::vector<std::int64_t>{10, 100, 1000});
    CHECK_THROWS_AS(expand_checkpoints("10,borked", 1000), std::invalid_argument);
    CHECK_THROWS_AS(expand_checkpoints("10,2000", 1000), std::invalid_argument);
    CHECK_THROWS_AS(expand_checkpoints("1,10", 1000), std::invalid_argument);
  }
}

TEST_CASE("config validation names the offending field") {
  ExperimentConfig c = base_config(ExperimentConfig::Run::Exact);
  c.env_kind = "weird";
  CHECK(throws_with([&] { c.validate(); }, "environment kind"));
  c = base_config(ExperimentConfig::Run::Exact);
  c.horizon = 1;
  CHECK(throws_with([&] { c.validate(); }, "horizon"));
  c = base_config(ExperimentConfig::Run::Simulate);
  c.replicas = 0;
  CHECK(throws_with([&] { c.validate(); }, "replicas"));
  c = base_config(ExperimentConfig::Run::Exact);
  c.k = 0;
  CHECK(throws_with([&] { c.validate(); }, "k must"));
  c = base_config(ExperimentConfig::Run::Exact);
  c.parallelism = 0;
  CHECK(throws_with([&] { c.validate(); }, "parallelism"));
  c = base_config(ExperimentConfig::Run::Exact);
  c.env_kind = "custom";
  CHECK(throws_with([&] { c.validate(); }, "env-file"));
  c = base_config(ExperimentConfig::Run::Exact);
  c.p = 0.7;
  CHECK(throws_with([&] { c.validate(); }, "1/2"));
}

TEST_CASE("exact run emits the documented schema") {
  ExperimentConfig c = base_config(ExperimentConfig::Run::Exact);
  c.checkpoints = "2,5,10";
  std::ostringstream out;
  bpve::run_exact(c, out);
  const std::string csv = out.str();

  CHECK(csv.find("# bpve exact v") != std::string::npos);
  CHECK(csv.find("# seed = 9") != std::string::npos);
  CHECK(csv.find("n,D,log10_D,p_zero,expected_S,extinction_tail\n") != std::string::npos);
  const auto d = column(csv, "D");
  REQUIRE(d.size() == 3);
  CHECK(d.back() == "11");
  const auto pz = column(csv, "p_zero");
  CHECK(std::stod(pz.back()) == doctest::Approx(1.0 / 11.0).epsilon(1e-10));

  SUBCASE("k adds the window probability column") {
    c.k = 2;
    std::ostringstream out2;
    bpve::run_exact(c, out2);
    const auto pc = column(out2.str(), "p_in_Ck");
    REQUIRE(pc.size() == 3);
    // n = 10, k = 2: p_11 / D(10) = (1/2) / 11.
    CHECK(std::stod(pc.back()) == doctest::Approx(0.5 / 11.0).epsilon(1e-10));
  }
}

TEST_CASE("exact run on the drift family stays finite and monotone") {
  ExperimentConfig c = base_config(ExperimentConfig::Run::Exact);
  c.env_kind = "near-critical";
  c.drift = 1.0;
  c.horizon = 100;
  std::ostringstream out;
  bpve::run_exact(c, out);
  for (const char* col : {"D", "log10_D", "p_zero", "expected_S", "extinction_tail"}) {
    for (const auto& v : column(out.str(), col)) {
      CHECK(std::isfinite(std::stod(v)));
    }
  }
  ExperimentConfig c2 = base_config(ExperimentConfig::Run::Exact);
  c2.env_kind = "near-critical";
  c2.drift = 0.5;
  c2.horizon = 10000;
  std::ostringstream out2;
  bpve::run_exact(c2, out2);
  const auto es = column(out2.str(), "expected_S");
  for (std::size_t i = 1; i < es.size(); ++i) {
    CHECK(std::stod(es[i]) >= std::stod(es[i - 1]));
  }
}

TEST_CASE("simulation run cross-checks and reruns byte-identically") {
  ExperimentConfig c = base_config(ExperimentConfig::Run::Simulate);
  c.horizon = 30;
  c.replicas = 5000;
  std::ostringstream a, b;
  bpve::run_simulate(c, a);
  bpve::run_simulate(c, b);
  CHECK(a.str() == b.str());

  ExperimentConfig c8 = c;
  c8.parallelism = 8;
  std::ostringstream d;
  bpve::run_simulate(c8, d);
  // Only the recorded parallelism line may differ.
  std::string s1 = a.str(), s2 = d.str();
  const std::string p1 = "# parallelism = 2\n", p2 = "# parallelism = 8\n";
  s1.replace(s1.find(p1), p1.size(), "# parallelism = X\n");
  s2.replace(s2.find(p2), p2.size(), "# parallelism = X\n");
  CHECK(s1 == s2);

  CHECK(a.str().find("n,mc_mean_S,mc_stderr_S,exact_expected_S,zero_freq,exact_p_zero,"
                     "excluded_replicas\n") != std::string::npos);
  const auto zf = column(a.str(), "zero_freq");
  const auto pz = column(a.str(), "exact_p_zero");
  const double f = std::stod(zf.back());
  const double p = std::stod(pz.back());
  CHECK(std::abs(f - p) < 4.0 * std::sqrt(p * (1 - p) / 5000.0));
}

TEST_CASE("classify run reports both verdicts") {
  ExperimentConfig c = base_config(ExperimentConfig::Run::Classify);
  c.env_kind = "near-critical";
  c.drift = 2.0;
  c.horizon = 100000;
  std::ostringstream out;
  bpve::run_classify(c, out);
  CHECK(out.str().find("finite,converges-diagnostic") != std::string::npos);

  SUBCASE("custom environments fall back to the diagnostic only") {
    const std::string path = "/tmp/bpve_classify_env.txt";
    {
      std::ofstream f(path);
      for (int i = 0; i < 2000; ++i) f << "0.5\n";
    }
    ExperimentConfig cc = base_config(ExperimentConfig::Run::Classify);
    cc.env_kind = "custom";
    cc.env_file = path;
    cc.horizon = 2000;
    std::ostringstream o2;
    bpve::run_classify(cc, o2);
    CHECK(o2.str().find(",na,") != std::string::npos);
    std::remove(path.c_str());
  }
}

TEST_CASE("theorem2 run") {
  ExperimentConfig c = base_config(ExperimentConfig::Run::Theorem2);
  c.env_kind = "near-critical";
  c.drift = 2.0;
  c.horizon = 2000;
  c.replicas = 50;
  std::ostringstream out;
  bpve::run_theorem2(c, out);
  const std::string csv = out.str();
  CHECK(csv.find("# classifier = finite") != std::string::npos);
  CHECK(csv.find("# diagnostic = ") != std::string::npos);
  CHECK(column(csv, "last_regen").size() == 50);

  SUBCASE("rejects non-near-critical environments") {
    ExperimentConfig cc = base_config(ExperimentConfig::Run::Theorem2);
    std::ostringstream o;
    CHECK(throws_with([&] { bpve::run_theorem2(cc, o); }, "near-critical"));
  }
}

TEST_CASE("theorem3 run") {
  SUBCASE("refuses the finite regime") {
    ExperimentConfig c = base_config(ExperimentConfig::Run::Theorem3);
    c.env_kind = "near-critical";
    c.drift = 1.0;
    std::ostringstream o;
    CHECK(throws_with([&] { bpve::run_theorem3(c, o); }, "B < 1"));
  }
  SUBCASE("emits exact, Monte Carlo, and long-path columns") {
    ExperimentConfig c = base_config(ExperimentConfig::Run::Theorem3);
    c.env_kind = "near-critical";
    c.drift = 0.5;
    c.horizon = 2000;
    c.replicas = 100;
    std::ostringstream o;
    bpve::run_theorem3(c, o);
    const std::string csv = o.str();
    for (const char* col :
         {"exact_expected_S", "es_over_log_n", "mc_mean_S", "path_ratio_eps05"}) {
      for (const auto& v : column(csv, col)) CHECK(std::isfinite(std::stod(v)));
    }
    // Long-path ratio columns are consistent: eps025 >= eps05 >= eps10.
    const auto r1 = column(csv, "path_ratio_eps025");
    const auto r2 = column(csv, "path_ratio_eps05");
    const auto r3 = column(csv, "path_ratio_eps10");
    for (std::size_t i = 0; i < r1.size(); ++i) {
      CHECK(std::stod(r1[i]) >= std::stod(r2[i]));
      CHECK(std::stod(r2[i]) >= std::stod(r3[i]));
    }
  }
}

TEST_CASE("config files apply key = value pairs") {
  const std::string path = "/tmp/bpve_conf_test.txt";
  {
    std::ofstream f(path);
    f << "# nightly sweep\n";
    f << "env = near-critical\n";
    f << "B=0.75\n";
    f << "i0 = 3\n";
    f << "n = 5000\n";
    f << "replicas=250\n";
    f << "seed = 99\n";
    f << "checkpoints = log:5\n";
  }
  ExperimentConfig c;
  bpve::apply_config_file(c, path);
  CHECK(c.env_kind == "near-critical");
  CHECK(c.drift == 0.75);
  CHECK(c.i0 == 3);
  CHECK(c.horizon == 5000);
  CHECK(c.replicas == 250);
  CHECK(c.base_seed == 99);
  CHECK(c.checkpoints == "log:5");
  CHECK(c.p == 0.5);  // untouched fields keep their defaults

  {
    std::ofstream f(path);
    f << "volume = 11\n";
  }
  CHECK(throws_with([&] { bpve::apply_config_file(c, path); }, "unknown config key"));
  {
    std::ofstream f(path);
    f << "n capped\n";
  }
  CHECK(throws_with([&] { bpve::apply_config_file(c, path); }, "key = value"));
  {
    std::ofstream f(path);
    f << "n = lots\n";
  }
  CHECK(throws_with([&] { bpve::apply_config_file(c, path); }, "bad value"));
  std::remove(path.c_str());
  CHECK_THROWS_AS(bpve::apply_config_file(c, path), std::runtime_error);
}

TEST_CASE("run_experiment writes files") {
  const std::string path = "/tmp/bpve_out_test.csv";
  ExperimentConfig c = base_config(ExperimentConfig::Run::Exact);
  c.out_path = path;
  bpve::run_experiment(c);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("# bpve exact", 0) == 0);
  in.close();
  std::remove(path.c_str());

  c.out_path = "/nonexistent-dir/x.csv";
  CHECK_THROWS_AS(bpve::run_experiment(c), std::runtime_error);
}
