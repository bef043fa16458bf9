#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bpve {

// Offspring-parameter sequence (p_k, q_k, m_k), k >= 1, for a geometric
// branching process with one immigrant per generation.  Every p_k lies in
// (0, 1/2], so the offspring mean m_k = q_k / p_k is always >= 1.
//
// Three families:
//   constant       p_k = p for all k
//   near_critical  p_i = 1/2 for i <= i0, p_i = 1/2 - B/(4i) for i > i0
//   custom         finite user-supplied list p_1..p_N
//
// Environments are immutable after construction and safe to share across
// threads.
class Environment {
 public:
  enum class Kind { Constant, NearCritical, Custom };

  // Requires 0 < p <= 1/2.
  static Environment constant(double p);

  // Requires drift >= 0 and, when given, drift / (4 * threshold) < 1/2.
  // With threshold omitted the smallest admissible value floor(drift/2) + 1
  // is used.
  static Environment near_critical(double drift,
                                   std::optional<std::int64_t> threshold = {});

  // Requires a nonempty list with every entry in (0, 1/2].
  static Environment custom(std::vector<double> probs);

  // Plain-text file, one probability per line, '#' lines and blank lines
  // ignored; entries are indexed 1..N in order of appearance.
  static Environment from_file(const std::string& path);

  Kind kind() const { return kind_; }

  double p(std::int64_t k) const;
  double q(std::int64_t k) const { return 1.0 - p(k); }

  // m_k = q_k / p_k.
  double mean(std::int64_t k) const;

  bool in_domain(std::int64_t k) const;

  // nullopt for the unbounded parametric families.
  std::optional<std::int64_t> max_index() const;

  // Near-critical parameters; meaningful only when kind() == NearCritical.
  double drift() const { return drift_; }
  std::int64_t threshold() const { return threshold_; }

  // Constant-family probability; meaningful only when kind() == Constant.
  double constant_p() const { return p_const_; }

  std::string describe() const;

 private:
  Environment() = default;

  Kind kind_ = Kind::Constant;
  double p_const_ = 0.5;
  double drift_ = 0.0;
  std::int64_t threshold_ = 1;
  std::vector<double> probs_;
};

}  // namespace bpve
