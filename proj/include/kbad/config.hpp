#ifndef KBAD_CONFIG_HPP
#define KBAD_CONFIG_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kbad/types.hpp"

namespace kbad {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// ignored. Typed getters record which keys were read so that loaders can
/// reject unknown (typically misspelled) keys.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  /// Keys present in the file but never read through a getter.
  std::vector<std::string> unused_keys() const;
  /// Throws Error listing every unused key.
  void require_all_used(const std::string& what) const;

  /// Sorted `key = value` lines.
  std::string format() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

std::string format_double(double v);
std::string format_int_list(const std::vector<int>& v);

}  // namespace kbad

#endif  // KBAD_CONFIG_HPP
