#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hbl/core.hpp"

namespace hbl {

// Config files are TOML-style: [section] headers, key = value lines, '#' or ';' comments. Values are numbers,
// booleans, quoted or bare strings, or bracketed comma-separated lists of those.
struct config_error : std::runtime_error {
  explicit config_error(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems(std::move(problems)) {}
  std::vector<std::string> problems;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& p : v) s += (s.empty() ? "" : "; ") + p;
    return s;
  }
};

enum class ValueKind { integer, number, boolean, string, number_list, string_list };

inline const char* to_string(ValueKind k) {
  switch (k) {
    case ValueKind::integer: return "an integer";
    case ValueKind::number: return "a number";
    case ValueKind::boolean: return "true or false";
    case ValueKind::string: return "a string";
    case ValueKind::number_list: return "a list of numbers";
    case ValueKind::string_list: return "a list of strings";
  }
  return "?";
}

// section -> key -> kind
using ConfigSchema = std::map<std::string, std::map<std::string, ValueKind>>;

namespace detail {

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Drops a trailing "# ..." comment that is outside quotes.
inline std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (!quoted && s[i] == '#') return trim(s.substr(0, i));
  }
  return trim(s);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

inline std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::vector<std::string>> to_list(const std::string& s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') return std::nullopt;
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(unquote(trim(cur)));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(unquote(trim(cur)));
  return out;
}

}  // namespace detail

class Config {
 public:
  Config() = default;

  static Config load(const std::string& path) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw config_error({path + ":" + std::to_string(e.line()) + ": " + e.message()});
    }
    Config c;
    c.path_ = path;
    std::vector<std::string> problems;
    for (const auto& [section, body] : tree) {
      if (body.empty()) {
        if (!body.data().empty()) problems.push_back(section + ": keys must live inside a [section]");
        continue;
      }
      for (const auto& [key, value] : body) c.values_[section][key] = detail::strip_comment(value.data());
    }
    if (!problems.empty()) throw config_error(problems);
    return c;
  }

  const std::string& path() const { return path_; }
  bool empty() const { return values_.empty(); }

  // Every violation, as "section.key: problem".
  std::vector<std::string> validate(const ConfigSchema& schema) const {
    std::vector<std::string> out;
    for (const auto& [section, keys] : values_) {
      auto s = schema.find(section);
      if (s == schema.end()) {
        out.push_back("[" + section + "]: unknown section");
        continue;
      }
      for (const auto& [key, raw] : keys) {
        auto k = s->second.find(key);
        if (k == s->second.end()) {
          out.push_back(section + "." + key + ": unknown key");
          continue;
        }
        if (!conforms(raw, k->second))
          out.push_back(section + "." + key + ": expected " + to_string(k->second) + ", got '" + raw + "'");
      }
    }
    return out;
  }

  bool has(const std::string& section, const std::string& key) const { return raw(section, key).has_value(); }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  }

  // Typed getters assume validate() passed.
  std::optional<double> number(const std::string& section, const std::string& key) const {
    auto r = raw(section, key);
    if (!r) return std::nullopt;
    return detail::to_number(*r);
  }
  std::optional<long long> integer(const std::string& section, const std::string& key) const {
    auto v = number(section, key);
    if (!v) return std::nullopt;
    return static_cast<long long>(*v);
  }
  std::optional<bool> boolean(const std::string& section, const std::string& key) const {
    auto r = raw(section, key);
    if (!r) return std::nullopt;
    return *r == "true";
  }
  std::optional<std::string> string(const std::string& section, const std::string& key) const {
    auto r = raw(section, key);
    if (!r) return std::nullopt;
    return detail::unquote(*r);
  }
  std::optional<std::vector<double>> numbers(const std::string& section, const std::string& key) const {
    auto r = raw(section, key);
    if (!r) return std::nullopt;
    const auto list = detail::to_list(*r);
    std::vector<double> out;
    for (const auto& s : *list) out.push_back(*detail::to_number(s));
    return out;
  }
  std::optional<std::vector<std::string>> strings(const std::string& section, const std::string& key) const {
    auto r = raw(section, key);
    if (!r) return std::nullopt;
    return detail::to_list(*r);
  }

 private:
  static bool conforms(const std::string& raw, ValueKind kind) {
    switch (kind) {
      case ValueKind::integer: {
        auto v = detail::to_number(raw);
        return v && *v == std::floor(*v);
      }
      case ValueKind::number: return detail::to_number(raw).has_value();
      case ValueKind::boolean: return raw == "true" || raw == "false";
      case ValueKind::string: return !raw.empty() && raw.front() != '[';
      case ValueKind::number_list: {
        auto l = detail::to_list(raw);
        if (!l) return false;
        for (const auto& s : *l)
          if (!detail::to_number(s)) return false;
        return true;
      }
      case ValueKind::string_list: return detail::to_list(raw).has_value();
    }
    return false;
  }

  std::string path_;
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace hbl
