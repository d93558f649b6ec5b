//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tflow/error.h"

namespace tflow {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            const char *kind) {
  throw Error(Errc::kFormat, "config key '" + std::string(key) + "': '"
                                 + std::string(value) + "' is not " + kind);
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::string section;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view {}
                                        : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == ';')
      continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw Error(Errc::kFormat,
                    "malformed section header on line " + std::to_string(line_no));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || trim(line.substr(0, eq)).empty())
      throw Error(Errc::kFormat,
                  "expected key = value on line " + std::to_string(line_no));
    std::string key(trim(line.substr(0, eq)));
    if (!section.empty())
      key = section + "." + key;
    cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::kIo, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Config::has(std::string_view key) const {
  return values_.find(key) != values_.end();
}

void Config::set(const std::string &key, std::string value) {
  values_[key] = std::move(value);
}

void Config::merge(const Config &other) {
  for (const auto &[k, v]: other.values_)
    values_[k] = v;
}

std::string Config::get(std::string_view key, std::string fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(std::string_view key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    return fallback;
  const std::string &s = it->second;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    bad_value(key, s, "a number");
  return v;
}

long long Config::get_int(std::string_view key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    return fallback;
  const std::string &s = it->second;
  long long v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    bad_value(key, s, "an integer");
  return v;
}

bool Config::get_bool(std::string_view key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    return fallback;
  const std::string &s = it->second;
  if (s == "true" || s == "1" || s == "yes" || s == "on")
    return true;
  if (s == "false" || s == "0" || s == "no" || s == "off")
    return false;
  bad_value(key, s, "a boolean");
}

std::string Config::to_text() const {
  std::string out;
  // Section-less keys must precede the first header.
  for (const auto &[key, value]: values_) {
    if (key.find('.') == std::string::npos)
      out += key + " = " + value + "\n";
  }
  std::string section;
  for (const auto &[key, value]: values_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos)
      continue;
    const std::string sec = key.substr(0, dot);
    const std::string name = key.substr(dot + 1);
    if (sec != section) {
      if (!out.empty())
        out += '\n';
      if (!sec.empty())
        out += "[" + sec + "]\n";
      section = sec;
    }
    out += name + " = " + value + "\n";
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace tflow
