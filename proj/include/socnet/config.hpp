#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "socnet/errors.hpp"

namespace socnet {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

// Flat key = value store with [section] prefixes. Every key an experiment
// reads is marked consumed; finish() rejects the leftovers, so a config can
// only contain keys its experiment understands.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    Config c;
    std::string line, section;
    long lineno = 0;
    while (std::getline(in, line)) {
      lineno += 1;
      std::string t = detail::trim(line);
      if (t.empty() || t[0] == '#') continue;
      if (t.front() == '[') {
        if (t.back() != ']')
          throw ConfigError(path + ":" + std::to_string(lineno) +
                            ": unterminated section");
        section = detail::trim(t.substr(1, t.size() - 2));
        if (section.empty())
          throw ConfigError(path + ":" + std::to_string(lineno) +
                            ": empty section name");
        continue;
      }
      std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected key = value");
      std::string key = detail::trim(t.substr(0, eq));
      std::string val = detail::trim(t.substr(eq + 1));
      if (key.empty())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
      c.set(section.empty() ? key : section + "." + key, val);
    }
    return c;
  }

  // Overrides win over file contents; the key keeps its section prefix.
  void set(const std::string& key, const std::string& value) {
    kv_[key] = value;
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string require_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    consumed_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  long require_long(const std::string& key) const {
    return parse_long(key, require_string(key));
  }

  long get_long(const std::string& key, long fallback) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_long(key, it->second);
  }

  double require_double(const std::string& key) const {
    return parse_double(key, require_string(key));
  }

  double get_double(const std::string& key, double fallback) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_double(key, it->second);
  }

  std::vector<double> require_double_list(const std::string& key) const {
    return parse_double_list(key, require_string(key));
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::string& fallback) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    return parse_double_list(key, it == kv_.end() ? fallback : it->second);
  }

  std::vector<long> get_long_list(const std::string& key,
                                  const std::string& fallback) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    std::vector<long> out;
    for (double x : parse_double_list(key, it == kv_.end() ? fallback
                                                           : it->second))
      out.push_back(long(x));
    return out;
  }

  // Rejects any key that was never read.
  void finish() const {
    for (const auto& [key, value] : kv_)
      if (consumed_.count(key) == 0)
        throw ConfigError("unknown config key: " + key);
  }

  // Stable fingerprint of the full key/value set, order independent by
  // construction (the map iterates sorted).
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const std::string& s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
      }
      h ^= 0x1f;
      h *= 1099511628211ULL;
    };
    for (const auto& [key, value] : kv_) {
      mix(key);
      mix(value);
    }
    return h;
  }

 private:
  static long parse_long(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      long x = std::stol(v, &pos);
      if (pos != v.size()) throw ConfigError("");
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an integer: " + v);
    }
  }

  static double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      double x = std::stod(v, &pos);
      if (pos != v.size()) throw ConfigError("");
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: " + v);
    }
  }

  static std::vector<double> parse_double_list(const std::string& key,
                                               const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (item.empty())
        throw ConfigError("config key " + key + ": empty list entry");
      out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> consumed_;
};

}  // namespace socnet
