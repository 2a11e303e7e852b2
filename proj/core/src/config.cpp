#include "selfheal/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "selfheal/errors.hpp"

namespace selfheal {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& text) {
  Int v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + text + "'");
}

}  // namespace

std::map<std::string, std::string> parse_key_value(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    out[std::move(key)] = std::move(value);
  }
  return out;
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  return parse_key_value(in);
}

std::pair<std::string, std::string> split_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(text) + "' is not of the form key=value");
  }
  std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw ConfigError("override '" + std::string(text) + "' has an empty key");
  return {key, trim(text.substr(eq + 1))};
}

void ConfigRegistry::bind(std::string key, double& field, std::string help) {
  entries_.push_back({std::move(key), &field, std::move(help)});
}
void ConfigRegistry::bind(std::string key, std::int64_t& field, std::string help) {
  entries_.push_back({std::move(key), &field, std::move(help)});
}
void ConfigRegistry::bind(std::string key, std::uint64_t& field, std::string help) {
  entries_.push_back({std::move(key), &field, std::move(help)});
}
void ConfigRegistry::bind(std::string key, bool& field, std::string help) {
  entries_.push_back({std::move(key), &field, std::move(help)});
}

const ConfigRegistry::Entry& ConfigRegistry::find(const std::string& key) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Entry& e) { return e.key == key; });
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  return *it;
}

void ConfigRegistry::set(const std::string& key, const std::string& value) {
  const Entry& e = find(key);
  std::visit(
      [&](auto* field) {
        using T = std::remove_pointer_t<decltype(field)>;
        if constexpr (std::is_same_v<T, double>) {
          *field = parse_double(key, value);
        } else if constexpr (std::is_same_v<T, bool>) {
          *field = parse_bool(key, value);
        } else {
          *field = parse_integer<T>(key, value);
        }
      },
      e.target);
}

void ConfigRegistry::apply(const std::map<std::string, std::string>& assignments) {
  for (const auto& [k, v] : assignments) set(k, v);
}

bool ConfigRegistry::contains(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.key == key; });
}

std::string ConfigRegistry::get(const std::string& key) const {
  const Entry& e = find(key);
  return std::visit(
      [](auto* field) -> std::string {
        using T = std::remove_pointer_t<decltype(field)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_exact(*field);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *field ? "true" : "false";
        } else {
          return std::to_string(*field);
        }
      },
      e.target);
}

std::vector<std::string> ConfigRegistry::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.key);
  return out;
}

std::string ConfigRegistry::dump() const {
  std::ostringstream os;
  for (const auto& e : entries_) os << e.key << " = " << get(e.key) << '\n';
  return os.str();
}

std::uint64_t ConfigRegistry::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char c : dump()) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string format_exact(double value) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::stod(buf) == value) break;
  }
  return buf;
}

std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace selfheal
