#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vims/geometry.hpp"

namespace vims {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key-value configuration. Format, one entry per line:
//   key = value          (value may be a scalar, a word, or whitespace-
//   # comment             separated numbers for vectors)
// Keys not consumed by any getter can be reported via unknown_keys(), which
// callers use to reject typos.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  bool get_bool(const std::string& key, bool def) const;
  Vec3 get_vec3(const std::string& key, const Vec3& def) const;

  // Keys present in the file but never read through a getter.
  std::vector<std::string> unknown_keys() const;

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> touched_;
};

}  // namespace vims
