#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mslam {

/// Flat `section.key = value` configuration text: UTF-8, `#` comments,
/// whitespace-insensitive around `=`. Reads are tracked so that unread
/// (unknown) keys can be rejected, catching typos in threshold names.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key,
                           std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);

  /// Keys present in the file but never read by any getter.
  std::vector<std::string> unread_keys() const;

  /// Throws InvalidArgumentError naming every unread key.
  void throw_on_unread() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> read_;
};

}  // namespace mslam
