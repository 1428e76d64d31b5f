// Copyright 2026 The InfoDesign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Line-oriented reports: `[section]` headers, `key = value` lines and
// comma-separated tables introduced by `[table <name>]` with a header row.

#ifndef INFODESIGN_REPORT_HPP_
#define INFODESIGN_REPORT_HPP_

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "infodesign/equilibrium.hpp"
#include "infodesign/game.hpp"

namespace infodesign {

class Report {
 public:
  struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
  };

  void section(const std::string& name) { os_ << "[" << name << "]\n"; }

  void kv(const std::string& key, const std::string& value) {
    os_ << key << " = " << value << "\n";
  }
  void kv(const std::string& key, const char* value) { kv(key, std::string(value)); }
  void kv(const std::string& key, double value) { kv(key, detail::fmt_double(value)); }
  void kv(const std::string& key, bool value) { kv(key, value ? "true" : "false"); }
  template <typename T>
    requires std::is_integral_v<T>
  void kv(const std::string& key, T value) {
    kv(key, std::to_string(value));
  }

  void table(Table t) {
    os_ << "[table " << t.name << "]\n" << csv_text(t);
    tables_.push_back(std::move(t));
  }

  std::string str() const { return os_.str(); }
  const std::vector<Table>& tables() const { return tables_; }

  static std::string csv_field(const std::string& f) {
    if (f.find_first_of(",\"\n") == std::string::npos) return f;
    std::string q = "\"";
    for (char c : f) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

  static std::string csv_text(const Table& t) {
    std::ostringstream os;
    for (std::size_t k = 0; k < t.header.size(); ++k)
      os << (k ? "," : "") << csv_field(t.header[k]);
    os << "\n";
    for (const auto& r : t.rows) {
      for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << csv_field(r[k]);
      os << "\n";
    }
    return os.str();
  }

  /// Nested certification report as `<prefix>.<name>.*` keys.
  void certification(const CertificationReport& r, const std::string& prefix = "") {
    const std::string base = prefix.empty() ? r.name : prefix + "." + r.name;
    kv(base + ".pass", r.pass);
    kv(base + ".violation", r.violation);
    kv(base + ".tol", r.tol);
    kv(base + ".witness", r.witness.empty() ? std::string("none") : r.witness);
    for (const auto& p : r.parts) certification(p, base);
  }

 private:
  std::ostringstream os_;
  std::vector<Table> tables_;
};

inline std::string cell(double v) { return detail::fmt_double(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }

}  // namespace infodesign

#endif  // INFODESIGN_REPORT_HPP_
