#pragma once

// Line-oriented `key = value` text used for manifests, reports and parameter overrides.
// '#' starts a comment; blank lines are ignored; keys keep insertion order on output.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace advscene {

class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text);

  // Replaces an existing key in place, otherwise appends.
  void set(const std::string& key, std::string value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);

  std::optional<std::string> get(std::string_view key) const;
  // Throws ParseError when present but not numeric.
  std::optional<double> get_double(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string to_string() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace advscene
