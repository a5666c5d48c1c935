#pragma once

// INI-style scenario files:
//   # comment
//   [section]
//   key = value
// Keys are addressed as "section.key". Later assignments (including CLI overrides) win.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bvocsr/binary_io.hpp"
#include "bvocsr/text.hpp"

namespace bvocsr {

class Config {
 public:
  static Config parse(const std::string& content, const std::string& origin = "config") {
    Config cfg;
    cfg.origin_ = origin;
    std::string section;
    const auto ls = text::split(content, '\n');
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const std::size_t line_no = i + 1;
      std::string line = ls[i];
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = text::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3)
          fail(ErrorKind::Config, origin + ":" + std::to_string(line_no) + ": malformed section header");
        section = text::trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        fail(ErrorKind::Config, origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
      const std::string key = text::trim(line.substr(0, eq));
      if (key.empty()) fail(ErrorKind::Config, origin + ":" + std::to_string(line_no) + ": empty key");
      cfg.entries_[section.empty() ? key : section + "." + key] = {text::trim(line.substr(eq + 1)), line_no};
    }
    return cfg;
  }

  static Config load(const std::filesystem::path& path) {
    std::string content;
    try {
      content = io::read_text(path);
    } catch (const Error&) {
      fail(ErrorKind::Config, "cannot read config file " + path.string());
    }
    return parse(content, path.string());
  }

  void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = lookup(key);
    return it ? it->value : fallback;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = lookup(key);
    if (!it) return fallback;
    try {
      return text::parse_double(it->value, key);
    } catch (const Error&) {
      fail(ErrorKind::Config, where(*it) + key + " expects a number, got '" + it->value + "'");
    }
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = lookup(key);
    if (!it) return fallback;
    try {
      return text::parse_int(it->value, key);
    } catch (const Error&) {
      fail(ErrorKind::Config, where(*it) + key + " expects an integer, got '" + it->value + "'");
    }
  }

  std::size_t get_size(const std::string& key, std::size_t fallback) const {
    const auto v = get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) fail(ErrorKind::Config, key + " must be non-negative");
    return static_cast<std::size_t>(v);
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = lookup(key);
    if (!it) return fallback;
    if (it->value == "true" || it->value == "1" || it->value == "yes" || it->value == "on") return true;
    if (it->value == "false" || it->value == "0" || it->value == "no" || it->value == "off") return false;
    fail(ErrorKind::Config, where(*it) + key + " expects a boolean, got '" + it->value + "'");
  }

  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = lookup(key);
    if (!it) return fallback;
    std::vector<double> out;
    for (const auto& part : text::split(it->value, ',')) {
      try {
        out.push_back(text::parse_double(part, key));
      } catch (const Error&) {
        fail(ErrorKind::Config, where(*it) + key + " expects a comma-separated list of numbers");
      }
    }
    return out;
  }

  std::vector<std::string> get_strings(const std::string& key) const {
    const auto it = lookup(key);
    std::vector<std::string> out;
    if (!it) return out;
    for (const auto& part : text::split(it->value, ','))
      if (auto t = text::trim(part); !t.empty()) out.push_back(t);
    return out;
  }

  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  /// Sorted "key = value" lines; the basis of the config hash.
  std::string canonical(const std::set<std::string>& exclude = {}) const {
    std::string out;
    for (const auto& [k, e] : entries_)
      if (!exclude.count(k)) out += k + " = " + e.value + "\n";
    return out;
  }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  const Entry* lookup(const std::string& key) const {
    used_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::string where(const Entry& e) const {
    return e.line ? origin_ + ":" + std::to_string(e.line) + ": " : std::string("command line: ");
  }

  std::string origin_ = "config";
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace bvocsr
