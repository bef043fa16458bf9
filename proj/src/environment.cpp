#include "bpve/environment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bpve {

namespace {

std::string fmt_double(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

Environment Environment::constant(double p) {
  if (!(p > 0.0) || !(p <= 0.5)) {
    throw std::invalid_argument("constant environment requires 0 < p <= 1/2 (got " +
                                fmt_double(p) + ")");
  }
  Environment env;
  env.kind_ = Kind::Constant;
  env.p_const_ = p;
  return env;
}

Environment Environment::near_critical(double drift,
                                       std::optional<std::int64_t> threshold) {
  if (!(drift >= 0.0) || !std::isfinite(drift)) {
    throw std::invalid_argument("near-critical environment requires drift B >= 0 (got " +
                                fmt_double(drift) + ")");
  }
  std::int64_t i0;
  if (threshold.has_value()) {
    i0 = *threshold;
    if (i0 < 1) {
      throw std::invalid_argument("near-critical threshold i0 must be a positive integer (got " +
                                  std::to_string(i0) + ")");
    }
    if (!(drift / (4.0 * static_cast<double>(i0)) < 0.5)) {
      throw std::invalid_argument("near-critical environment requires B/(4*i0) < 1/2 (B = " +
                                  fmt_double(drift) + ", i0 = " + std::to_string(i0) + ")");
    }
  } else {
    // Smallest positive integer with B/(4*i0) < 1/2.
    i0 = static_cast<std::int64_t>(std::floor(drift / 2.0)) + 1;
  }
  Environment env;
  env.kind_ = Kind::NearCritical;
  env.drift_ = drift;
  env.threshold_ = i0;
  return env;
}

Environment Environment::custom(std::vector<double> probs) {
  if (probs.empty()) {
    throw std::invalid_argument("custom environment requires a nonempty probability list");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p > 0.0) || !(p <= 0.5)) {
      throw std::invalid_argument("custom environment entry " + std::to_string(i + 1) +
                                  " must lie in (0, 1/2] (got " + fmt_double(p) + ")");
    }
  }
  Environment env;
  env.kind_ = Kind::Custom;
  env.probs_ = std::move(probs);
  return env;
}

Environment Environment::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open environment file: " + path);
  }
  std::vector<double> probs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    std::istringstream ls(line);
    double p;
    if (!(ls >> p)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected a probability, got '" + line + "'");
    }
    std::string trailing;
    if (ls >> trailing) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": trailing content after probability: '" + trailing + "'");
    }
    probs.push_back(p);
  }
  try {
    return custom(std::move(probs));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

double Environment::p(std::int64_t k) const {
  if (k < 1) {
    throw std::out_of_range("environment index must be >= 1 (got " + std::to_string(k) + ")");
  }
  switch (kind_) {
    case Kind::Constant:
      return p_const_;
    case Kind::NearCritical:
      if (k <= threshold_) return 0.5;
      return 0.5 - drift_ / (4.0 * static_cast<double>(k));
    case Kind::Custom:
      if (static_cast<std::size_t>(k) > probs_.size()) {
        throw std::out_of_range("custom environment has " + std::to_string(probs_.size()) +
                                " entries; index " + std::to_string(k) + " out of range");
      }
      return probs_[static_cast<std::size_t>(k - 1)];
  }
  throw std::logic_error("unreachable environment kind");
}

double Environment::mean(std::int64_t k) const {
  const double pk = p(k);
  return (1.0 - pk) / pk;
}

bool Environment::in_domain(std::int64_t k) const {
  if (k < 1) return false;
  if (kind_ == Kind::Custom) return static_cast<std::size_t>(k) <= probs_.size();
  return true;
}

std::optional<std::int64_t> Environment::max_index() const {
  if (kind_ == Kind::Custom) return static_cast<std::int64_t>(probs_.size());
  return std::nullopt;
}

std::string Environment::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Constant:
      os << "constant p=" << p_const_;
      break;
    case Kind::NearCritical:
      os << "near-critical B=" << drift_ << " i0=" << threshold_;
      break;
    case Kind::Custom:
      os << "custom N=" << probs_.size();
      break;
  }
  return os.str();
}

}  // namespace bpve
