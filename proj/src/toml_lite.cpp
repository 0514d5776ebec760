#include "dispersim/toml_lite.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dispersim {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

}  // namespace

TomlLite TomlLite::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open toml: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

TomlLite TomlLite::parse(const std::string& text, const std::string& origin) {
  TomlLite t;
  t.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + why);
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string raw = trim(line.substr(eq + 1));
    if (key.empty() || raw.empty()) fail("expected key = value");
    Value v;
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"') fail("unterminated string");
      v.raw = raw.substr(1, raw.size() - 2);
      v.is_string = true;
    } else if (raw.front() == '[') {
      if (raw.back() != ']') fail("unterminated array");
      v.is_array = true;
      std::string body = raw.substr(1, raw.size() - 2);
      std::string cur;
      bool in_str = false;
      for (char ch : body) {
        if (ch == '"') in_str = !in_str;
        if (ch == ',' && !in_str) {
          v.array.push_back(trim(cur));
          cur.clear();
        } else {
          cur += ch;
        }
      }
      if (!trim(cur).empty()) v.array.push_back(trim(cur));
      for (auto& e : v.array) {
        if (!e.empty() && e.front() == '"') {
          if (e.size() < 2 || e.back() != '"') fail("unterminated array string");
          e = e.substr(1, e.size() - 2);
        }
      }
    } else {
      v.raw = raw;
    }
    t.sections_[section][key] = std::move(v);
  }
  return t;
}

const TomlLite::Value* TomlLite::lookup(const std::string& section,
                                        const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  return &k->second;
}

const TomlLite::Value& TomlLite::require(const std::string& section,
                                         const std::string& key) const {
  const Value* v = lookup(section, key);
  if (!v)
    throw std::runtime_error(origin_ + ": missing [" + section + "] " + key);
  return *v;
}

bool TomlLite::has(const std::string& section, const std::string& key) const {
  return lookup(section, key) != nullptr;
}

std::string TomlLite::get_string(const std::string& section,
                                 const std::string& key) const {
  return require(section, key).raw;
}

std::string TomlLite::get_string(const std::string& section,
                                 const std::string& key,
                                 const std::string& fallback) const {
  const Value* v = lookup(section, key);
  return v ? v->raw : fallback;
}

double TomlLite::get_number(const std::string& section,
                            const std::string& key) const {
  const Value& v = require(section, key);
  try {
    return std::stod(v.raw);
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": [" + section + "] " + key +
                             " is not a number");
  }
}

double TomlLite::get_number(const std::string& section, const std::string& key,
                            double fallback) const {
  return lookup(section, key) ? get_number(section, key) : fallback;
}

bool TomlLite::get_bool(const std::string& section, const std::string& key,
                        bool fallback) const {
  const Value* v = lookup(section, key);
  if (!v) return fallback;
  if (v->raw == "true") return true;
  if (v->raw == "false") return false;
  throw std::runtime_error(origin_ + ": [" + section + "] " + key +
                           " is not a boolean");
}

std::vector<std::string> TomlLite::get_string_array(
    const std::string& section, const std::string& key) const {
  const Value& v = require(section, key);
  if (!v.is_array)
    throw std::runtime_error(origin_ + ": [" + section + "] " + key +
                             " is not an array");
  return v.array;
}

std::vector<double> TomlLite::get_number_array(const std::string& section,
                                               const std::string& key) const {
  std::vector<double> out;
  for (const auto& e : get_string_array(section, key)) {
    try {
      out.push_back(std::stod(e));
    } catch (const std::exception&) {
      throw std::runtime_error(origin_ + ": [" + section + "] " + key +
                               " has a non-numeric element");
    }
  }
  return out;
}

}  // namespace dispersim
