#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace drone_assoc {

// `key = value` text files. '#' starts a comment; blank lines are ignored;
// later duplicates override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  // Typed accessors throw ValidationError naming the key on bad values.
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  // Throws ValidationError on the first key not in `known`.
  void require_known(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  // Sorted `key = value` lines.
  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
};

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace drone_assoc
