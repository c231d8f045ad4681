#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

namespace snakecpg {

// Flat `key = value` text format. Lines starting with '#' are comments.
// Keys may be dotted (`physics.head_mass`) but carry no structure beyond that.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double value);

  // Parses `key=value` overrides as given on a command line.
  void apply_override(std::string_view assignment);

  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  // Throws ConfigError naming the first key not in `known`.
  void require_known(const std::set<std::string>& known) const;

  // Serialized form, one `key = value` per line, sorted by key.
  std::string dump(std::string_view line_prefix = "") const;
  void save(const std::string& path) const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<string>";
};

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace snakecpg
