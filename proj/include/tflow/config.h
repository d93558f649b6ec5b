//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_CONFIG_H_
#define TFLOW_CONFIG_H_

#include <map>
#include <string>
#include <string_view>

namespace tflow {

// Flat key=value settings with INI sections. A key "epochs" under "[train]"
// is addressed as "train.epochs". Lines starting with '#' or ';' are
// comments. Text form is canonical (sections and keys sorted), so equal
// configurations serialize identically.
class Config {
public:
  // E_FORMAT on malformed lines, with the line number.
  static Config parse(std::string_view text);
  // E_IO if the file cannot be read.
  static Config load(const std::string &path);

  bool has(std::string_view key) const;
  void set(const std::string &key, std::string value);
  // Values of `other` win.
  void merge(const Config &other);

  // Typed getters return the fallback when the key is absent and throw
  // E_FORMAT when the value does not parse.
  std::string get(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  const std::map<std::string, std::string, std::less<>> &values() const {
    return values_;
  }

  std::string to_text() const;

private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace tflow

#endif  // TFLOW_CONFIG_H_
