#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace shiftlab {

// Value of one `key = value` line: scalar string/number/bool or a bracketed
// list. Bare words parse as strings, numbers as doubles.
struct ConfigValue {
  enum class Kind { Number, String, Bool, NumberList, StringList };
  Kind kind = Kind::String;
  double number = 0.0;
  std::string text;
  bool boolean = false;
  std::vector<double> numbers;
  std::vector<std::string> strings;
};

// `[section]` headers group keys into nested tables; keys before any header
// land in the root table.
struct Config {
  std::map<std::string, ConfigValue> root;
  std::map<std::string, std::map<std::string, ConfigValue>> sections;

  bool has(const std::string& section, const std::string& key) const;
  const ConfigValue& get(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  std::string text(const std::string& section, const std::string& key) const;
  std::string text_or(const std::string& section, const std::string& key,
                      const std::string& fallback) const;
  bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> number_list(const std::string& section, const std::string& key) const;
  std::vector<double> number_list_or(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const;
};

struct ConfigError : std::runtime_error {
  ConfigError(int line, const std::string& what);
  int line;
};

Config parse_config_text(const std::string& text);
Config parse_config_file(const std::string& path);

// Sections and keys in sorted order, numbers at full precision; comments and
// formatting do not affect it.
std::string canonical_config_string(const Config& cfg);

// FNV-1a over the canonical form.
std::uint64_t config_hash(const Config& cfg);

}  // namespace shiftlab
