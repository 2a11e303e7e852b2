#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace selfheal {

/// Parses a plain-text `key = value` file: one assignment per line, `#`
/// starts a comment, blank lines are ignored. Later assignments win.
std::map<std::string, std::string> parse_key_value(std::istream& in);
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

/// Splits `key=value` (as given to `--set`). Throws ConfigError when the
/// text has no `=` or an empty key.
std::pair<std::string, std::string> split_assignment(std::string_view text);

/// Binds dotted configuration keys to fields of live config structs so that
/// files and command-line overrides can address every tunable by name.
class ConfigRegistry {
 public:
  using Target = std::variant<double*, std::int64_t*, std::uint64_t*, bool*>;

  struct Entry {
    std::string key;
    Target target;
    std::string help;
  };

  void bind(std::string key, double& field, std::string help = {});
  void bind(std::string key, std::int64_t& field, std::string help = {});
  void bind(std::string key, std::uint64_t& field, std::string help = {});
  void bind(std::string key, bool& field, std::string help = {});

  /// Assigns a value from its textual form. Unknown keys and unparsable
  /// values raise ConfigError naming the key.
  void set(const std::string& key, const std::string& value);
  void apply(const std::map<std::string, std::string>& assignments);

  bool contains(const std::string& key) const;
  std::string get(const std::string& key) const;
  std::vector<std::string> keys() const;
  const std::vector<Entry>& entries() const { return entries_; }

  /// Canonical `key = value` dump in registration order.
  std::string dump() const;
  /// FNV-1a hash of dump(); used to tag persisted artifacts.
  std::uint64_t hash() const;

 private:
  const Entry& find(const std::string& key) const;
  std::vector<Entry> entries_;
};

/// Shortest text that parses back to exactly `value`.
std::string format_exact(double value);
std::string hex64(std::uint64_t value);

}  // namespace selfheal
