#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grazing/angular_kernels.hpp"
#include "grazing/error.hpp"

namespace grazing {

inline constexpr int kConfigVersion = 1;

/// Parses a real number or a symbolic multiple of pi such as "pi/8", "3pi/4", "2*pi".
inline double parse_real(const std::string& text) {
  static const std::regex sym(R"(^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, sym)) {
    const double coef = m[1].matched ? std::stod(m[1].str()) : 1.0;
    const double div = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (div == 0.0) throw ParameterError("division by zero in '" + text + "'");
    return coef * kPi / div;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParameterError("'" + text + "' is not a number");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw ParameterError("'" + text + "' is not a number");
  return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) throw ParameterError("empty element in list '" + text + "'");
    out.push_back(item.substr(a, b - a + 1));
  }
  if (out.empty()) throw ParameterError("empty list");
  return out;
}

inline std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_real(s));
  return out;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ParameterError("'" + s + "' is not a boolean");
}

/// Every key the runner understands, with a one-line description.
inline const std::map<std::string, std::string>& config_keys() {
  static const std::map<std::string, std::string> keys = {
      {"version", "config format version (must be 1)"},
      {"family", "kernel family: soft, grazing or coulomb"},
      {"gamma", "velocity exponent gamma in (-3, 0); fixed to -3 for coulomb"},
      {"nu", "angular singularity nu in (0, 2)"},
      {"eps", "grazing parameter (accepts pi/k)"},
      {"h-eps", "Coulomb velocity regularization h_eps (default eps)"},
      {"n", "particle count N"},
      {"dt", "time step"},
      {"horizon", "final time T"},
      {"theta-min", "truncation angle (default eps/64)"},
      {"v-floor", "relative-speed floor for rate majorization"},
      {"mode", "Boltzmann update: nanbu or symmetric"},
      {"rate-cap", "maximum expected candidates per particle and step"},
      {"pairing", "Landau pairing: full, subsampled or conservative"},
      {"m", "Landau companions per particle (subsampled) or matchings (conservative)"},
      {"reg-delta", "Landau relative-speed regularization"},
      {"seed", "RNG seed"},
      {"seeds", "number of seeds in a sweep, starting at seed"},
      {"initial", "initial law: gaussian:s2, mixture:w,s2a,s2b or ball:R"},
      {"snapshots", "comma-separated snapshot times"},
      {"eps-list", "comma-separated decreasing eps values"},
      {"p", "moment order fixing slab and truncation schedules"},
      {"n0", "slab resolution prefactor"},
      {"level", "coupling level a (common companions) or b (gaussian matching)"},
      {"tanaka", "apply the Tanaka rotation in coupled runs"},
      {"w2", "also compute exact W2 at every coupled node"},
      {"samples", "sample count for verifiers"},
      {"a-list", "initial values for the Gronwall check"},
      {"t-list", "horizons for the Poisson-Gaussian check"},
      {"input", "sweep CSV consumed by fit-rate"},
      {"output", "output directory"},
  };
  return keys;
}

/// Flat key = value document; values are kept verbatim so symbolic angles survive a round trip.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text, const std::string& origin = "config") {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;
      const auto eq = line.find('=');
      const std::string where = origin + ":" + std::to_string(lineno);
      if (eq == std::string::npos) throw ParameterError(where + ": expected 'key = value'");
      std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParameterError(where + ": empty key");
      if (!config_keys().count(key)) throw ParameterError(where + ": unknown key '" + key + "'");
      if (value.empty()) throw ParameterError(where + ": key '" + key + "' has no value");
      if (c.values_.count(key)) throw ParameterError(where + ": duplicate key '" + key + "'");
      c.values_[key] = value;
    }
    if (!c.values_.count("version")) throw ParameterError(origin + ": missing 'version' field");
    if (c.values_.at("version") != std::to_string(kConfigVersion))
      throw ParameterError(origin + ": unsupported version '" + c.values_.at("version") + "'");
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParameterError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

  /// Canonical text: version first, then keys in sorted order.
  std::string serialize() const {
    std::ostringstream out;
    out << "version = " << kConfigVersion << "\n";
    for (const auto& [k, v] : values_)
      if (k != "version") out << k << " = " << v << "\n";
    return out.str();
  }

  void set(const std::string& key, const std::string& value) {
    if (!config_keys().count(key)) throw ParameterError("unknown key '" + key + "'");
    values_[key] = value;
  }

  void erase(const std::string& key) {
    if (key != "version") values_.erase(key);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParameterError("missing required field '" + key + "'");
    return it->second;
  }

  double real(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return field(key, [&] { return parse_real(it->second); });
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return field(key, [&] {
      std::size_t used = 0;
      const long long v = std::stoll(it->second, &used);
      if (used != it->second.size()) throw ParameterError("'" + it->second + "' is not an integer");
      return static_cast<std::int64_t>(v);
    });
  }

  bool boolean(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return field(key, [&] { return parse_bool(it->second); });
  }

  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return field(key, [&] { return parse_real_list(it->second); });
  }

  bool operator==(const ExperimentConfig&) const = default;

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  template <class F>
  static auto field(const std::string& key, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const std::exception& e) {
      throw ParameterError("field '" + key + "': " + e.what());
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace grazing
