#include "shiftlab/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace shiftlab {

ConfigError::ConfigError(int line_, const std::string& what)
    : std::runtime_error("config line " + std::to_string(line_) + ": " + what),
      line(line_) {}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string unquote(const std::string& s, int line) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  if (!s.empty() && (s.front() == '"' || s.back() == '"'))
    throw ConfigError(line, "unbalanced quotes in value '" + s + "'");
  return s;
}

ConfigValue parse_scalar(const std::string& raw, int line) {
  ConfigValue v;
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError(line, "empty value");
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::Kind::Bool;
    v.boolean = s == "true";
    return v;
  }
  double num;
  if (parse_number(s, num)) {
    v.kind = ConfigValue::Kind::Number;
    v.number = num;
    return v;
  }
  v.kind = ConfigValue::Kind::String;
  v.text = unquote(s, line);
  return v;
}

ConfigValue parse_value(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    ConfigValue v;
    const std::string inner = trim(s.substr(1, s.size() - 2));
    std::vector<std::string> items;
    std::string cur;
    for (char c : inner) {
      if (c == ',') {
        items.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    bool all_numbers = !items.empty();
    std::vector<double> nums;
    for (const std::string& item : items) {
      double num;
      if (parse_number(item, num))
        nums.push_back(num);
      else
        all_numbers = false;
    }
    if (all_numbers) {
      v.kind = ConfigValue::Kind::NumberList;
      v.numbers = std::move(nums);
    } else {
      v.kind = ConfigValue::Kind::StringList;
      for (const std::string& item : items) v.strings.push_back(unquote(item, line));
    }
    return v;
  }
  return parse_scalar(s, line);
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_value(const ConfigValue& v) {
  switch (v.kind) {
    case ConfigValue::Kind::Number: return format_number(v.number);
    case ConfigValue::Kind::Bool: return v.boolean ? "true" : "false";
    case ConfigValue::Kind::String: return "\"" + v.text + "\"";
    case ConfigValue::Kind::NumberList: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.numbers.size(); ++i) {
        if (i) out += ",";
        out += format_number(v.numbers[i]);
      }
      return out + "]";
    }
    case ConfigValue::Kind::StringList: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.strings.size(); ++i) {
        if (i) out += ",";
        out += "\"" + v.strings[i] + "\"";
      }
      return out + "]";
    }
  }
  return "";
}

}  // namespace

Config parse_config_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(lineno, "empty section name");
      cfg.sections[section];  // sections may be empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(lineno, "expected 'key = value' in '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(lineno, "empty key");
    const ConfigValue value = parse_value(line.substr(eq + 1), lineno);
    auto& table = section.empty() ? cfg.root : cfg.sections[section];
    if (table.count(key))
      throw ConfigError(lineno, "duplicate key '" + key + "'");
    table[key] = value;
  }
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  if (section.empty()) return root.count(key) > 0;
  const auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

const ConfigValue& Config::get(const std::string& section, const std::string& key) const {
  const auto& table = section.empty() ? root : [&]() -> const std::map<std::string, ConfigValue>& {
    const auto it = sections.find(section);
    if (it == sections.end())
      throw std::runtime_error("config: missing section [" + section + "]");
    return it->second;
  }();
  const auto it = table.find(key);
  if (it == table.end())
    throw std::runtime_error("config: missing key '" + key + "'" +
                             (section.empty() ? "" : " in [" + section + "]"));
  return it->second;
}

double Config::number(const std::string& section, const std::string& key) const {
  const ConfigValue& v = get(section, key);
  if (v.kind != ConfigValue::Kind::Number)
    throw std::runtime_error("config: key '" + key + "' is not a number");
  return v.number;
}

double Config::number_or(const std::string& section, const std::string& key,
                         double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

std::string Config::text(const std::string& section, const std::string& key) const {
  const ConfigValue& v = get(section, key);
  if (v.kind != ConfigValue::Kind::String)
    throw std::runtime_error("config: key '" + key + "' is not a string");
  return v.text;
}

std::string Config::text_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  return has(section, key) ? text(section, key) : fallback;
}

bool Config::flag_or(const std::string& section, const std::string& key,
                     bool fallback) const {
  if (!has(section, key)) return fallback;
  const ConfigValue& v = get(section, key);
  if (v.kind != ConfigValue::Kind::Bool)
    throw std::runtime_error("config: key '" + key + "' is not a bool");
  return v.boolean;
}

std::vector<double> Config::number_list(const std::string& section,
                                        const std::string& key) const {
  const ConfigValue& v = get(section, key);
  if (v.kind == ConfigValue::Kind::Number) return {v.number};
  if (v.kind != ConfigValue::Kind::NumberList)
    throw std::runtime_error("config: key '" + key + "' is not a number list");
  return v.numbers;
}

std::vector<double> Config::number_list_or(const std::string& section,
                                           const std::string& key,
                                           const std::vector<double>& fallback) const {
  return has(section, key) ? number_list(section, key) : fallback;
}

std::string canonical_config_string(const Config& cfg) {
  std::string out;
  for (const auto& [key, value] : cfg.root)
    out += key + "=" + format_value(value) + "\n";
  for (const auto& [name, table] : cfg.sections) {
    out += "[" + name + "]\n";
    for (const auto& [key, value] : table)
      out += key + "=" + format_value(value) + "\n";
  }
  return out;
}

std::uint64_t config_hash(const Config& cfg) {
  const std::string canon = canonical_config_string(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace shiftlab
